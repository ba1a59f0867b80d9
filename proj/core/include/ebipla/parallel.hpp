#pragma once

#include <cstddef>
#include <functional>

namespace ebipla {

/// Number of worker threads used by `parallel_for`. Defaults to 1.
std::size_t worker_threads();
void set_worker_threads(std::size_t count);

/// Resolves a thread count from an explicit value (0 = unset), then the EBIPLA_THREADS
/// environment variable, then 1.
std::size_t resolve_thread_count(std::size_t requested);

/// Stops glibc from unmapping large freed blocks, which otherwise page-faults every
/// per-chunk temporary back in. Call once at program start; no-op on other libcs.
void tune_allocator();

/// Runs `body(chunk)` for every chunk in [0, chunks). Chunks are claimed dynamically by
/// the workers, so `body` must only write to state owned by its chunk. Exceptions are
/// rethrown on the calling thread (the one from the lowest chunk index wins).
void parallel_for(std::size_t chunks, const std::function<void(std::size_t)>& body);

/// Fixed chunking of `count` items into blocks of `block` items. The partition depends
/// only on (count, block), never on the thread count.
struct ChunkPlan {
  std::size_t count;
  std::size_t block;

  std::size_t chunks() const { return count == 0 ? 0 : (count + block - 1) / block; }
  std::size_t begin(std::size_t c) const { return c * block; }
  std::size_t end(std::size_t c) const { return c * block + block < count ? c * block + block : count; }
};

}  // namespace ebipla
