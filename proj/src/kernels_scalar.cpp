#include <cmath>

#include "nvmag/kernels.hpp"

namespace nvmag::kernels::scalar {

void lorentzian_sum(std::span<const double> x,
                    std::span<const LorentzLine> lines, std::span<double> out,
                    bool accumulate) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    double acc = accumulate ? out[i] : 0.0;
    for (const LorentzLine& ln : lines) {
      const double d = x[i] - ln.center;
      acc += ln.amp * ln.hw2 / (d * d + ln.hw2);
    }
    out[i] = acc;
  }
}

void sine_series(double phase0, double dphase, double amp,
                 std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = amp * std::sin(phase0 + static_cast<double>(i) * dphase);
  }
}

void mix_sine(double phase0, double dphase, double gain, std::span<double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] *= gain * std::sin(phase0 + static_cast<double>(i) * dphase);
  }
}

double sum(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v;
  return acc;
}

double dot(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

}  // namespace nvmag::kernels::scalar
