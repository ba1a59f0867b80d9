#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace ebipla {

/// Independent families of Gaussian draws. Each role owns a disjoint key space.
enum class NoiseRole : std::uint8_t {
  kThetaAlpha = 1,
  kThetaBeta = 2,
  kPosterior = 3,
  kPriorInit = 4,
  kPrior = 5,
  kNoiseAddition = 6,
  kWarmup = 7,
  kLebmInit = 8,
  kLebmPosterior = 9,
  kParticleInit = 10,
  kParamInit = 11,
  kGenerateInit = 12,
  kGenerate = 13,
  kData = 14,
  kShuffle = 15,
  kMapInit = 16,
  kObservation = 17,
  kTest = 255,
};

/// Coordinates of one vector of draws: iteration k, role, inner step j, data index m,
/// particle index n. Distinct keys give independent streams.
struct NoiseKey {
  std::uint32_t k = 0;
  NoiseRole role = NoiseRole::kTest;
  std::uint32_t j = 0;  // < 2^24
  std::uint32_t m = 0;
  std::uint32_t n = 0;  // < 2^16
};

/// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64 finaliser; the documented seed-splitting function.
std::uint64_t splitmix64(std::uint64_t x);

/// Derives the `index`-th child seed of `master`.
std::uint64_t split_seed(std::uint64_t master, std::uint64_t index);

/// Counter-based Gaussian source. A draw is a pure function of (seed, key, coordinate),
/// so results do not depend on the order or thread in which draws are requested.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed, bool zero = false) : seed_(seed), zero_(zero) {}

  /// Zero stream: every Gaussian draw is exactly 0. Uniforms are unaffected.
  static NoiseStream zeros(std::uint64_t seed = 0) { return NoiseStream(seed, true); }

  std::uint64_t seed() const { return seed_; }
  bool is_zero() const { return zero_; }

  /// Fills `out` with standard normal draws for `key`; coordinate i is fixed by i alone.
  void normal(const NoiseKey& key, std::span<double> out) const;

  /// Fills `out` with uniforms in [0, 1) for `key`.
  void uniform(const NoiseKey& key, std::span<double> out) const;

  /// Uniform integer in [0, bound) from the i-th uniform of `key`.
  std::uint64_t uniform_index(const NoiseKey& key, std::uint64_t i, std::uint64_t bound) const;

 private:
  std::array<std::uint32_t, 4> block(const NoiseKey& key, std::uint32_t block_index) const;

  std::uint64_t seed_;
  bool zero_;
};

}  // namespace ebipla
