#include "ebipla/checkpoint.hpp"

#include <json.hpp>

#include "binary_io.hpp"

namespace ebipla {

using nlohmann::json;

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const json header = {
      {"schema_version", kCheckpointSchemaVersion},
      {"kind", "checkpoint"},
      {"energy_model", checkpoint.energy_model},
      {"decoder", checkpoint.decoder},
      {"spec", json::parse(checkpoint.spec_json)},
      {"layout", "alpha then beta, little-endian f64"},
      {"alpha_size", checkpoint.theta.alpha.size()},
      {"beta_size", checkpoint.theta.beta.size()},
      {"step", checkpoint.step},
  };
  detail::write_text(detail::with_suffix(path, ".json"), header.dump(2) + "\n");
  const Vector flat = checkpoint.theta.flat();
  detail::write_f64_le(detail::with_suffix(path, ".bin"), {flat.data(), static_cast<std::size_t>(flat.size())});
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  json header;
  try {
    header = json::parse(detail::read_text(detail::with_suffix(path, ".json")));
    if (header.at("kind") != "checkpoint") throw SchemaError("not a checkpoint header");
    if (header.at("schema_version") != kCheckpointSchemaVersion) {
      throw SchemaError("checkpoint schema version " + header.at("schema_version").dump() +
                        " is not supported");
    }
    Checkpoint out;
    out.energy_model = header.at("energy_model").get<std::string>();
    out.decoder = header.at("decoder").get<std::string>();
    out.spec_json = header.at("spec").dump();
    out.step = header.at("step").get<std::uint64_t>();
    const auto na = header.at("alpha_size").get<std::size_t>();
    const auto nb = header.at("beta_size").get<std::size_t>();
    const auto values = detail::read_f64_le(detail::with_suffix(path, ".bin"), na + nb);
    out.theta.alpha = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(na));
    out.theta.beta = Eigen::Map<const Vector>(values.data() + na, static_cast<Eigen::Index>(nb));
    return out;
  } catch (const json::exception& e) {
    throw SchemaError("malformed checkpoint header '" + path.string() + "': " + e.what());
  }
}

}  // namespace ebipla
