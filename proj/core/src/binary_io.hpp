#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ebipla::detail {

/// Appends `.json` / `.bin` to a base path.
std::filesystem::path with_suffix(const std::filesystem::path& base, const char* suffix);

void write_f64_le(const std::filesystem::path& file, std::span<const double> values);
/// Reads exactly `count` values; a short or long file is a SchemaError.
std::vector<double> read_f64_le(const std::filesystem::path& file, std::size_t count);

void write_text(const std::filesystem::path& file, const std::string& text);
std::string read_text(const std::filesystem::path& file);

}  // namespace ebipla::detail
