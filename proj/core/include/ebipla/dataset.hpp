#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "ebipla/types.hpp"

namespace ebipla {

/// Where a dataset came from. `params_json` is kept verbatim through save/load.
struct Provenance {
  std::string generator = "unknown";
  std::uint64_t seed = 0;
  std::string params_json = "{}";
};

/// Observations y_1..y_M stored as the columns of a d_y x M matrix.
struct Dataset {
  Matrix y;
  std::optional<Matrix> latents;  // ground truth, d_x x M, when the generator knows it
  Provenance provenance;

  std::size_t size() const { return static_cast<std::size_t>(y.cols()); }
  std::size_t dim() const { return static_cast<std::size_t>(y.rows()); }
};

inline constexpr int kDatasetSchemaVersion = 1;

/// Writes `<path>.json` (header) and `<path>.bin` (little-endian f64, point-major:
/// y then optional latents).
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// One row per point, `y0,y1,...` columns. Full round-trip precision.
void export_dataset_csv(const Dataset& dataset, const std::filesystem::path& file);
/// Reads a points file: dataset header/binary pair, or a CSV with a header row.
Matrix load_points(const std::filesystem::path& path);

}  // namespace ebipla
