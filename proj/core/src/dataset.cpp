#include "ebipla/dataset.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "binary_io.hpp"

namespace ebipla {

using nlohmann::json;

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  if (dataset.size() == 0) throw ConfigError("save_dataset: empty dataset");
  json header = {
      {"schema_version", kDatasetSchemaVersion},
      {"kind", "dataset"},
      {"points", dataset.size()},
      {"data_dim", dataset.dim()},
      {"latent_dim", dataset.latents ? dataset.latents->rows() : 0},
      {"layout", "point-major little-endian f64: y then latents"},
      {"generator", dataset.provenance.generator},
      {"seed", dataset.provenance.seed},
      {"params", json::parse(dataset.provenance.params_json)},
  };
  std::vector<double> values(dataset.y.data(), dataset.y.data() + dataset.y.size());
  if (dataset.latents) {
    require_dim("latent points", dataset.size(), dataset.latents->cols());
    values.insert(values.end(), dataset.latents->data(),
                  dataset.latents->data() + dataset.latents->size());
  }
  detail::write_text(detail::with_suffix(path, ".json"), header.dump(2) + "\n");
  detail::write_f64_le(detail::with_suffix(path, ".bin"), values);
}

Dataset load_dataset(const std::filesystem::path& path) {
  try {
    const json header = json::parse(detail::read_text(detail::with_suffix(path, ".json")));
    if (header.at("kind") != "dataset") throw SchemaError("not a dataset header");
    if (header.at("schema_version") != kDatasetSchemaVersion) {
      throw SchemaError("dataset schema version " + header.at("schema_version").dump() +
                        " is not supported");
    }
    const auto points = header.at("points").get<std::size_t>();
    const auto dy = header.at("data_dim").get<std::size_t>();
    const auto dx = header.at("latent_dim").get<std::size_t>();
    if (points == 0 || dy == 0) throw SchemaError("dataset header declares an empty dataset");
    const auto values = detail::read_f64_le(detail::with_suffix(path, ".bin"), points * (dy + dx));
    Dataset out;
    out.y = Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(dy),
                                     static_cast<Eigen::Index>(points));
    if (dx > 0) {
      out.latents = Matrix(Eigen::Map<const Matrix>(values.data() + points * dy,
                                                    static_cast<Eigen::Index>(dx),
                                                    static_cast<Eigen::Index>(points)));
    }
    out.provenance.generator = header.at("generator").get<std::string>();
    out.provenance.seed = header.at("seed").get<std::uint64_t>();
    out.provenance.params_json = header.at("params").dump();
    return out;
  } catch (const json::exception& e) {
    throw SchemaError("malformed dataset header '" + path.string() + "': " + e.what());
  }
}

void export_dataset_csv(const Dataset& dataset, const std::filesystem::path& file) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << std::setprecision(17);
  for (Eigen::Index r = 0; r < dataset.y.rows(); ++r) out << (r ? "," : "") << "y" << r;
  out << "\n";
  for (Eigen::Index c = 0; c < dataset.y.cols(); ++c) {
    for (Eigen::Index r = 0; r < dataset.y.rows(); ++r) out << (r ? "," : "") << dataset.y(r, c);
    out << "\n";
  }
  detail::write_text(file, out.str());
}

Matrix load_points(const std::filesystem::path& path) {
  if (path.extension() != ".csv") return load_dataset(path).y;
  std::istringstream in(detail::read_text(path));
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("'" + path.string() + "' is empty");
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (start <= line.size()) {
      const std::size_t stop = std::min(line.find(',', start), line.size());
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(line.data() + start, line.data() + stop, value);
      if (ec != std::errc() || ptr != line.data() + stop) {
        throw SchemaError("'" + path.string() + "': bad number in line '" + line + "'");
      }
      row.push_back(value);
      start = stop + 1;
    }
    if (width == 0) width = row.size();
    if (row.size() != width) throw SchemaError("'" + path.string() + "': ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw SchemaError("'" + path.string() + "' has no points");
  Matrix out(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t c = 0; c < rows.size(); ++c) {
    for (std::size_t r = 0; r < width; ++r) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[c][r];
  }
  return out;
}

}  // namespace ebipla
