#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

// Arithmetic inner loops of the signal chain: multi-Lorentzian evaluation,
// reference-tone generation and mixing, and reductions. Each kernel has a
// scalar reference implementation and an AVX2 variant; the active backend is
// picked once at startup (cpuid, overridable with NVMAG_KERNELS=scalar|avx2).
// The variants are equivalence-tested against the scalar reference.

namespace nvmag::kernels {

enum class Backend { scalar, avx2 };

Backend active_backend();
const char* backend_name(Backend b);
/// Force a backend (throws ConfigError if unsupported on this CPU).
void set_backend(Backend b);
bool cpu_has_avx2();

/// One Lorentzian absorption line prepared for fast evaluation:
/// amp * hw2 / ((x - center)^2 + hw2) with hw2 = (fwhm/2)^2.
struct LorentzLine {
  double center;
  double hw2;
  double amp;
};

inline LorentzLine make_line(double center, double fwhm, double amp) {
  const double hw = 0.5 * fwhm;
  return {center, hw * hw, amp};
}

/// out[i] = sum_j lines[j](x[i]); with accumulate, adds onto out instead.
void lorentzian_sum(std::span<const double> x,
                    std::span<const LorentzLine> lines, std::span<double> out,
                    bool accumulate = false);

/// out[i] = amp * sin(phase0 + i * dphase).
void sine_series(double phase0, double dphase, double amp,
                 std::span<double> out);

/// In-place mixer: y[i] *= gain * sin(phase0 + i * dphase).
void mix_sine(double phase0, double dphase, double gain, std::span<double> y);

double sum(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);

// Scalar reference implementations, exposed for the equivalence tests.
namespace scalar {
void lorentzian_sum(std::span<const double> x,
                    std::span<const LorentzLine> lines, std::span<double> out,
                    bool accumulate);
void sine_series(double phase0, double dphase, double amp,
                 std::span<double> out);
void mix_sine(double phase0, double dphase, double gain, std::span<double> y);
double sum(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
}  // namespace scalar

/// True when the AVX2 translation unit was built with AVX2 enabled.
bool avx2_compiled();

namespace avx2 {
void lorentzian_sum(std::span<const double> x,
                    std::span<const LorentzLine> lines, std::span<double> out,
                    bool accumulate);
void sine_series(double phase0, double dphase, double amp,
                 std::span<double> out);
void mix_sine(double phase0, double dphase, double gain, std::span<double> y);
double sum(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
}  // namespace avx2

}  // namespace nvmag::kernels
