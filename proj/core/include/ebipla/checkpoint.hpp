#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "ebipla/types.hpp"

namespace ebipla {

inline constexpr int kCheckpointSchemaVersion = 1;

/// Parameter snapshot. On disk: `<path>.json` header and `<path>.bin` holding alpha then
/// beta as little-endian f64.
struct Checkpoint {
  Theta theta;
  std::string energy_model;
  std::string decoder;
  /// Model description (e.g. MLP layer sizes and activation) as a JSON document.
  std::string spec_json = "{}";
  std::uint64_t step = 0;
};

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ebipla
