#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "nvmag/kernels.hpp"

using namespace nvmag;
namespace k = nvmag::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed,
                               double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 eng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = dist(eng);
  return v;
}

bool have_avx2() { return k::avx2_compiled() && k::cpu_has_avx2(); }

}  // namespace

TEST_CASE("lorentzian_sum matches the direct formula") {
  const std::vector<k::LorentzLine> lines = {
      k::make_line(10.0, 2.0, 0.5), k::make_line(-3.0, 0.7, 1.5)};
  const std::vector<double> x = {-3.0, 0.0, 9.0, 10.0, 11.0};
  std::vector<double> out(x.size());
  k::scalar::lorentzian_sum(x, lines, out, false);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double want = 0.0;
    for (const auto& ln : lines) {
      const double d = x[i] - ln.center;
      want += ln.amp * ln.hw2 / (d * d + ln.hw2);
    }
    CHECK(out[i] == doctest::Approx(want).epsilon(1e-15));
  }
  // Value at a line center equals its amp plus the other line's tail.
  const double tail = lines[1].amp * lines[1].hw2 / (13.0 * 13.0 + lines[1].hw2);
  CHECK(out[3] == doctest::Approx(0.5 + tail).epsilon(1e-12));
}

TEST_CASE("lorentzian_sum accumulate adds onto the output") {
  const std::vector<k::LorentzLine> lines = {k::make_line(0.0, 1.0, 1.0)};
  std::vector<double> x = {0.0, 1.0};
  std::vector<double> out = {10.0, 20.0};
  k::lorentzian_sum(x, lines, out, true);
  CHECK(out[0] == doctest::Approx(11.0));
  CHECK(out[1] > 20.0);
}

TEST_CASE("AVX2 variants agree with the scalar reference") {
  if (!have_avx2()) {
    MESSAGE("AVX2 unavailable; equivalence checks skipped");
    return;
  }
  const std::size_t n = 100003;  // odd length exercises the remainder loop

  SUBCASE("lorentzian_sum") {
    std::vector<k::LorentzLine> lines;
    std::mt19937_64 eng(7);
    std::uniform_real_distribution<double> c(-5.0, 5.0), w(0.1, 3.0),
        a(0.1, 2.0);
    for (int i = 0; i < 17; ++i) {
      lines.push_back(k::make_line(c(eng), w(eng), a(eng)));
    }
    const auto x = random_vec(n, 11, -8.0, 8.0);
    std::vector<double> ref(n), simd(n);
    k::scalar::lorentzian_sum(x, lines, ref, false);
    k::avx2::lorentzian_sum(x, lines, simd, false);
    double max_rel = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      max_rel = std::max(max_rel,
                         std::abs(simd[i] - ref[i]) / std::max(1.0, ref[i]));
    }
    CHECK(max_rel < 1e-12);
  }

  SUBCASE("sine_series and mix_sine") {
    std::vector<double> ref(n), simd(n);
    const double phase0 = 0.37, dphase = 0.0123, amp = 2.5;
    k::scalar::sine_series(phase0, dphase, amp, ref);
    k::avx2::sine_series(phase0, dphase, amp, simd);
    double max_err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      max_err = std::max(max_err, std::abs(simd[i] - ref[i]));
    }
    CHECK(max_err < 1e-10 * amp);

    auto y1 = random_vec(n, 3);
    auto y2 = y1;
    k::scalar::mix_sine(phase0, dphase, 2.0, y1);
    k::avx2::mix_sine(phase0, dphase, 2.0, y2);
    max_err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      max_err = std::max(max_err, std::abs(y1[i] - y2[i]));
    }
    CHECK(max_err < 1e-9);
  }

  SUBCASE("reductions") {
    const auto x = random_vec(n, 5);
    const auto y = random_vec(n, 6);
    CHECK(k::avx2::sum(x) == doctest::Approx(k::scalar::sum(x)).epsilon(1e-10));
    CHECK(k::avx2::dot(x, y) ==
          doctest::Approx(k::scalar::dot(x, y)).epsilon(1e-10));
  }
}

TEST_CASE("backend dispatch honors set_backend") {
  const k::Backend original = k::active_backend();
  k::set_backend(k::Backend::scalar);
  CHECK(k::active_backend() == k::Backend::scalar);
  CHECK(std::string(k::backend_name(k::active_backend())) == "scalar");
  if (have_avx2()) {
    k::set_backend(k::Backend::avx2);
    CHECK(k::active_backend() == k::Backend::avx2);
  }
  k::set_backend(original);
}

TEST_CASE("sine_series tracks std::sin across block boundaries") {
  std::vector<double> out(4096);
  k::sine_series(1.0, 0.01, 1.0, out);
  for (const std::size_t i : {std::size_t{0}, std::size_t{1023},
                              std::size_t{1024}, std::size_t{4095}}) {
    CHECK(out[i] ==
          doctest::Approx(std::sin(1.0 + 0.01 * static_cast<double>(i)))
              .epsilon(1e-11));
  }
}
