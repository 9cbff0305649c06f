#include "nvmag/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nvmag::io {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

std::string format_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.8e", v);
  return buf;
}

void write_csv(const std::filesystem::path& path, const CsvDoc& doc) {
  std::ofstream out(path);
  if (!out) {
    throw ConfigError("write_csv: cannot open " + path.string());
  }
  for (const std::string& c : doc.comments) out << "# " << c << "\n";
  for (std::size_t i = 0; i < doc.columns.size(); ++i) {
    out << (i ? "," : "") << doc.columns[i];
  }
  out << "\n";
  std::size_t rows = 0;
  for (const auto& col : doc.data) rows = std::max(rows, col.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < doc.data.size(); ++c) {
      if (c) out << ",";
      if (r < doc.data[c].size()) out << format_sci(doc.data[c][r]);
    }
    out << "\n";
  }
  if (!out) throw ConfigError("write_csv: write failed for " + path.string());
}

std::pair<std::vector<double>, std::vector<double>> read_two_column_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("read_csv: cannot open " + path.string());
  std::vector<double> a, b;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string f1, f2;
    if (!std::getline(ss, f1, ',') || !std::getline(ss, f2, ',')) continue;
    try {
      const double x = std::stod(f1);
      const double y = std::stod(f2);
      a.push_back(x);
      b.push_back(y);
    } catch (const std::exception&) {
      // header row; skip
      continue;
    }
  }
  if (a.size() < 2) {
    throw ConfigError("read_csv: fewer than 2 numeric rows in " +
                      path.string());
  }
  return {std::move(a), std::move(b)};
}

lockin::TimeSeries read_timeseries_csv(const std::filesystem::path& path) {
  auto [t, v] = read_two_column_csv(path);
  const double dt = t[1] - t[0];
  if (!(dt > 0.0)) throw ConfigError("read_timeseries_csv: non-increasing t");
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double step = t[i] - t[i - 1];
    if (std::abs(step - dt) > 1e-6 * dt) {
      throw ConfigError("read_timeseries_csv: non-uniform time grid");
    }
  }
  lockin::TimeSeries ts;
  ts.sample_rate_hz = 1.0 / dt;
  ts.start_time_s = t[0];
  ts.values = std::move(v);
  ts.validate();
  return ts;
}

}  // namespace nvmag::io
