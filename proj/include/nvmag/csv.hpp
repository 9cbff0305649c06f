#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nvmag/lockin.hpp"

namespace nvmag::io {

std::uint64_t fnv1a64(std::string_view s);
std::string hex64(std::uint64_t v);

/// Scientific notation with 9 significant digits, the fixed CSV number
/// format.
std::string format_sci(double v);

/// Column-major CSV document with '#'-prefixed header comments.
struct CsvDoc {
  std::vector<std::string> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;  // one vector per column
};

void write_csv(const std::filesystem::path& path, const CsvDoc& doc);

/// Reads a two-column numeric CSV, skipping '#' comments and a non-numeric
/// header row if present.
std::pair<std::vector<double>, std::vector<double>> read_two_column_csv(
    const std::filesystem::path& path);

/// (t_s, value) file with a uniform time grid.
lockin::TimeSeries read_timeseries_csv(const std::filesystem::path& path);

}  // namespace nvmag::io
