// AVX2/FMA kernel variants. Trig-bearing loops recompute the exact phase with
// std::sin at block boundaries and advance inside a block with the rotation
// recurrence, so the drift against the scalar reference stays at the
// block-length * ulp level.

#include "nvmag/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>

namespace nvmag::kernels {

bool avx2_compiled() { return true; }

namespace avx2 {

void lorentzian_sum(std::span<const double> x,
                    std::span<const LorentzLine> lines, std::span<double> out,
                    bool accumulate) {
  const std::size_t n = x.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(&x[i]);
    __m256d acc =
        accumulate ? _mm256_loadu_pd(&out[i]) : _mm256_setzero_pd();
    for (const LorentzLine& ln : lines) {
      const __m256d c = _mm256_set1_pd(ln.center);
      const __m256d hw2 = _mm256_set1_pd(ln.hw2);
      const __m256d a = _mm256_set1_pd(ln.amp);
      const __m256d d = _mm256_sub_pd(xv, c);
      const __m256d denom = _mm256_fmadd_pd(d, d, hw2);
      acc = _mm256_add_pd(acc,
                          _mm256_div_pd(_mm256_mul_pd(a, hw2), denom));
    }
    _mm256_storeu_pd(&out[i], acc);
  }
  for (; i < n; ++i) {
    double acc = accumulate ? out[i] : 0.0;
    for (const LorentzLine& ln : lines) {
      const double d = x[i] - ln.center;
      acc += ln.amp * ln.hw2 / (d * d + ln.hw2);
    }
    out[i] = acc;
  }
}

namespace {

constexpr std::size_t kTrigBlock = 1024;

// Fills out[0..m) with amp*sin(phase0 + k*dphase) (op == 0) or multiplies
// y[k] by gain*sin(...) (op == 1), using a 4-lane rotation recurrence.
template <int Op>
void sine_blocks(double phase0, double dphase, double scale,
                 std::span<double> out) {
  const std::size_t n = out.size();
  const double c4s = std::cos(4.0 * dphase);
  const double s4s = std::sin(4.0 * dphase);
  const __m256d c4 = _mm256_set1_pd(c4s);
  const __m256d s4 = _mm256_set1_pd(s4s);
  const __m256d sc = _mm256_set1_pd(scale);

  std::size_t i = 0;
  while (i < n) {
    const std::size_t end = std::min(n, i + kTrigBlock);
    // Exact lane phases at the block start.
    const double p0 = phase0 + static_cast<double>(i) * dphase;
    alignas(32) double sl[4], cl[4];
    for (int k = 0; k < 4; ++k) {
      sl[k] = std::sin(p0 + k * dphase);
      cl[k] = std::cos(p0 + k * dphase);
    }
    __m256d s = _mm256_load_pd(sl);
    __m256d c = _mm256_load_pd(cl);
    std::size_t j = i;
    for (; j + 4 <= end; j += 4) {
      if constexpr (Op == 0) {
        _mm256_storeu_pd(&out[j], _mm256_mul_pd(sc, s));
      } else {
        const __m256d y = _mm256_loadu_pd(&out[j]);
        _mm256_storeu_pd(&out[j], _mm256_mul_pd(y, _mm256_mul_pd(sc, s)));
      }
      const __m256d s_next =
          _mm256_fmadd_pd(s, c4, _mm256_mul_pd(c, s4));
      const __m256d c_next =
          _mm256_fnmadd_pd(s, s4, _mm256_mul_pd(c, c4));
      s = s_next;
      c = c_next;
    }
    for (; j < end; ++j) {
      const double v = scale * std::sin(phase0 + static_cast<double>(j) * dphase);
      if constexpr (Op == 0) {
        out[j] = v;
      } else {
        out[j] *= v;
      }
    }
    i = end;
  }
}

}  // namespace

void sine_series(double phase0, double dphase, double amp,
                 std::span<double> out) {
  sine_blocks<0>(phase0, dphase, amp, out);
}

void mix_sine(double phase0, double dphase, double gain, std::span<double> y) {
  sine_blocks<1>(phase0, dphase, gain, y);
}

double sum(std::span<const double> x) {
  const std::size_t n = x.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(&x[i]));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < n; ++i) total += x[i];
  return total;
}

double dot(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i]), acc);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < n; ++i) total += x[i] * y[i];
  return total;
}

}  // namespace avx2
}  // namespace nvmag::kernels

#else  // !__AVX2__: keep the symbols defined so callers can link; dispatch
       // never selects them because avx2_compiled() is false.

#include "nvmag/common.hpp"

namespace nvmag::kernels {

bool avx2_compiled() { return false; }

namespace avx2 {

void lorentzian_sum(std::span<const double> x,
                    std::span<const LorentzLine> lines, std::span<double> out,
                    bool accumulate) {
  scalar::lorentzian_sum(x, lines, out, accumulate);
}
void sine_series(double phase0, double dphase, double amp,
                 std::span<double> out) {
  scalar::sine_series(phase0, dphase, amp, out);
}
void mix_sine(double phase0, double dphase, double gain, std::span<double> y) {
  scalar::mix_sine(phase0, dphase, gain, y);
}
double sum(std::span<const double> x) { return scalar::sum(x); }
double dot(std::span<const double> x, std::span<const double> y) {
  return scalar::dot(x, y);
}

}  // namespace avx2
}  // namespace nvmag::kernels

#endif
