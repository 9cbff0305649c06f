#include <cstdlib>
#include <string>

#include "nvmag/common.hpp"
#include "nvmag/kernels.hpp"

namespace nvmag::kernels {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

Backend resolve_initial() {
  if (const char* env = std::getenv("NVMAG_KERNELS")) {
    const std::string v(env);
    if (v == "scalar") return Backend::scalar;
    if (v == "avx2") {
      if (!(avx2_compiled() && cpu_has_avx2())) {
        throw ConfigError("NVMAG_KERNELS=avx2 requested but AVX2 unavailable");
      }
      return Backend::avx2;
    }
    if (v != "auto" && !v.empty()) {
      throw ConfigError("NVMAG_KERNELS must be scalar, avx2 or auto");
    }
  }
  return (avx2_compiled() && cpu_has_avx2()) ? Backend::avx2 : Backend::scalar;
}

Backend& backend_slot() {
  static Backend b = resolve_initial();
  return b;
}

}  // namespace

Backend active_backend() { return backend_slot(); }

const char* backend_name(Backend b) {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

void set_backend(Backend b) {
  if (b == Backend::avx2 && !(avx2_compiled() && cpu_has_avx2())) {
    throw ConfigError("AVX2 backend unavailable on this CPU/build");
  }
  backend_slot() = b;
}

void lorentzian_sum(std::span<const double> x,
                    std::span<const LorentzLine> lines, std::span<double> out,
                    bool accumulate) {
  if (out.size() != x.size()) {
    throw ConfigError("lorentzian_sum: output size mismatch");
  }
  if (active_backend() == Backend::avx2) {
    avx2::lorentzian_sum(x, lines, out, accumulate);
  } else {
    scalar::lorentzian_sum(x, lines, out, accumulate);
  }
}

void sine_series(double phase0, double dphase, double amp,
                 std::span<double> out) {
  if (active_backend() == Backend::avx2) {
    avx2::sine_series(phase0, dphase, amp, out);
  } else {
    scalar::sine_series(phase0, dphase, amp, out);
  }
}

void mix_sine(double phase0, double dphase, double gain, std::span<double> y) {
  if (active_backend() == Backend::avx2) {
    avx2::mix_sine(phase0, dphase, gain, y);
  } else {
    scalar::mix_sine(phase0, dphase, gain, y);
  }
}

double sum(std::span<const double> x) {
  return active_backend() == Backend::avx2 ? avx2::sum(x) : scalar::sum(x);
}

double dot(std::span<const double> x, std::span<const double> y) {
  if (y.size() != x.size()) throw ConfigError("dot: size mismatch");
  return active_backend() == Backend::avx2 ? avx2::dot(x, y)
                                           : scalar::dot(x, y);
}

}  // namespace nvmag::kernels
