#include "binary_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ebipla/errors.hpp"

namespace ebipla::detail {

namespace {

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xFFu) << (8 * (7 - i));
  return out;
}

}  // namespace

std::filesystem::path with_suffix(const std::filesystem::path& base, const char* suffix) {
  return std::filesystem::path(base.string() + suffix);
}

void write_f64_le(const std::filesystem::path& file, std::span<const double> values) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + file.string() + "' for writing");
  for (double v : values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    bits = to_le(bits);
    out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
  if (!out) throw IoError("write failed for '" + file.string() + "'");
}

std::vector<double> read_f64_le(const std::filesystem::path& file, std::size_t count) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open '" + file.string() + "' for reading");
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::uint64_t>(in.tellg());
  if (bytes != count * sizeof(double)) {
    throw SchemaError("'" + file.string() + "' holds " + std::to_string(bytes) +
                      " bytes, header promises " + std::to_string(count * sizeof(double)));
  }
  in.seekg(0);
  std::vector<double> values(count);
  for (double& v : values) {
    std::uint64_t bits;
    in.read(reinterpret_cast<char*>(&bits), sizeof bits);
    bits = to_le(bits);
    std::memcpy(&v, &bits, sizeof v);
  }
  if (!in) throw IoError("read failed for '" + file.string() + "'");
  return values;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + file.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write failed for '" + file.string() + "'");
}

std::string read_text(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open '" + file.string() + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace ebipla::detail
