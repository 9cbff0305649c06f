#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nvmag {

inline constexpr const char* kVersion = "0.1.0";

/// Invalid configuration or input contract violation (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure at runtime: singular system, missing zero crossing,
/// non-finite result (CLI exit code 3).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }

  Vec3 normalized() const {
    const double n = norm();
    if (n == 0.0) throw ConfigError("Vec3: cannot normalize zero vector");
    return {x / n, y / n, z / n};
  }
};

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace nvmag
