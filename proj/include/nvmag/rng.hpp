#pragma once

#include <cstdint>
#include <random>

namespace nvmag {

/// Deterministic Gaussian source: mt19937_64 + Box-Muller. Avoids
/// std::normal_distribution, whose algorithm is implementation-defined, so
/// streams are reproducible for a given seed on any platform.
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : eng_(seed) {}

  double uniform() {
    // 53-bit mantissa in (0, 1].
    return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.28318530717958647692 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace nvmag
