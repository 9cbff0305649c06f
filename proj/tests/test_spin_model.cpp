#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "nvmag/spin_model.hpp"

using namespace nvmag;
using namespace nvmag::spin;

namespace {

Vec3 field_along(const std::array<int, 3>& m, double tesla) {
  return miller_unit(m) * tesla;
}

std::vector<double> all_line_centers(const ResonanceSet& set) {
  std::vector<double> lines;
  for (const auto& ax : set.axes) {
    for (const auto* tr : {&ax.minus, &ax.plus}) {
      lines.insert(lines.end(), tr->lines_hz.begin(), tr->lines_hz.end());
    }
  }
  std::sort(lines.begin(), lines.end());
  return lines;
}

}  // namespace

TEST_CASE("project_field: parallel, [110] on [111], orthogonal axis") {
  const auto& axes = nv_axes();
  const Vec3 b111 = field_along({1, 1, 1}, 1e-3);
  CHECK(project_field(b111, axes[0]) == doctest::Approx(1e-3).epsilon(1e-12));

  const Vec3 b110 = field_along({1, 1, 0}, 1e-3);
  // (1,1,0).(1,1,1)/(sqrt2 sqrt3) = 2/sqrt6
  const double expect = 1e-3 * 2.0 / std::sqrt(6.0);
  CHECK(project_field(b110, axes[0]) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(expect == doctest::Approx(0.8165e-3).epsilon(1e-4));
  // [1 -1 -1] is orthogonal to [110].
  CHECK(project_field(b110, axes[1]) == doctest::Approx(0.0).epsilon(1e-20));
}

TEST_CASE("transition_frequencies: degenerate at zero field, 1 mT split") {
  SpinParams p;
  PhysicalConstants c;
  const auto [f0m, f0p] = transition_frequencies(p, c, 0.0);
  CHECK(f0m == doctest::Approx(2.870e9));
  CHECK(f0p == doctest::Approx(2.870e9));

  const double gamma = c.gyromagnetic_hz_per_t();
  CHECK(gamma == doctest::Approx(28.0e9).epsilon(2e-3));  // ~28 GHz/T
  const auto [fm, fp] = transition_frequencies(p, c, 1e-3);
  CHECK(fm == doctest::Approx(p.zfs_hz - gamma * 1e-3).epsilon(1e-15));
  CHECK(fp == doctest::Approx(p.zfs_hz + gamma * 1e-3).epsilon(1e-15));
  // 2.0028 mu_B / h = 28.032 MHz/mT.
  CHECK(fm == doctest::Approx(2.84197e9).epsilon(1e-5));
  CHECK(fp == doctest::Approx(2.89803e9).epsilon(1e-5));

  // Projection of 1 mT [110] on an NV axis, then split.
  const double b_nv = 1e-3 * 2.0 / std::sqrt(6.0);
  const auto [gm, gp] = transition_frequencies(p, c, b_nv);
  CHECK(gp - p.zfs_hz == doctest::Approx(22.89e6).epsilon(1e-3));
  CHECK(p.zfs_hz - gm == doctest::Approx(22.89e6).epsilon(1e-3));
}

TEST_CASE("transition_frequencies monotone in |b|") {
  SpinParams p;
  PhysicalConstants c;
  double prev_plus = 0.0, prev_minus = 1e18;
  for (double b = 0.0; b <= 2e-3; b += 1e-4) {
    const auto [fm, fp] = transition_frequencies(p, c, b);
    CHECK(fp >= prev_plus);
    CHECK(fm <= prev_minus);
    CHECK(fp >= fm);
    prev_plus = fp;
    prev_minus = fm;
  }
}

TEST_CASE("hyperfine_lines: coincident, 14N triplet, spinless host") {
  SpinParams p;
  p.hyperfine_hz = 0.0;
  auto lines = hyperfine_lines(2.870e9, p);
  REQUIRE(lines.size() == 3);
  for (double f : lines) CHECK(f == doctest::Approx(2.870e9));

  p.hyperfine_hz = 2.16e6;
  lines = hyperfine_lines(2.870e9, p);
  CHECK(lines[0] == doctest::Approx(2.86784e9));
  CHECK(lines[1] == doctest::Approx(2.870e9));
  CHECK(lines[2] == doctest::Approx(2.87216e9));

  p.n_hyperfine = 1;
  lines = hyperfine_lines(2.871e9, p);
  REQUIRE(lines.size() == 1);
  CHECK(lines[0] == doctest::Approx(2.871e9));

  p.n_hyperfine = 2;
  CHECK_THROWS_AS(hyperfine_lines(2.87e9, p), ConfigError);
}

TEST_CASE("all_resonances groups axes along [110], [100] and zero field") {
  SpinParams p;
  PhysicalConstants c;

  SUBCASE("[110]: two split, two untouched") {
    const auto set = all_resonances(field_along({1, 1, 0}, 1e-3), p, c);
    REQUIRE(set.degenerate_groups.size() == 2);
    // Axes 0 and 2 carry the projection; 1 and 3 are orthogonal.
    CHECK(std::abs(set.axes[1].b_proj_tesla) < 1e-15);
    CHECK(std::abs(set.axes[3].b_proj_tesla) < 1e-15);
    CHECK(set.axes[1].f_minus_hz == doctest::Approx(p.zfs_hz));
    CHECK(set.axes[1].f_plus_hz == doctest::Approx(p.zfs_hz));
    CHECK(std::abs(set.axes[0].b_proj_tesla) ==
          doctest::Approx(std::abs(set.axes[2].b_proj_tesla)));
    for (const auto& g : set.degenerate_groups) CHECK(g.size() == 2);
  }

  SUBCASE("zero field: all four in one group at the ZFS") {
    const auto set = all_resonances({0, 0, 0}, p, c);
    REQUIRE(set.degenerate_groups.size() == 1);
    CHECK(set.degenerate_groups[0].size() == 4);
    for (const auto& ax : set.axes) {
      CHECK(ax.f_minus_hz == doctest::Approx(p.zfs_hz));
      CHECK(ax.f_plus_hz == doctest::Approx(p.zfs_hz));
    }
  }

  SUBCASE("[100]: all axes share |projection| = 1/sqrt(3) mT") {
    const auto set = all_resonances(field_along({1, 0, 0}, 1e-3), p, c);
    REQUIRE(set.degenerate_groups.size() == 1);
    CHECK(set.degenerate_groups[0].size() == 4);
    for (const auto& ax : set.axes) {
      CHECK(std::abs(ax.b_proj_tesla) ==
            doctest::Approx(1e-3 / std::sqrt(3.0)).epsilon(1e-12));
    }
  }
}

TEST_CASE("sum of squared projections is isotropic: (4/3)|b|^2") {
  std::mt19937_64 eng(42);
  std::uniform_real_distribution<double> dist(-1e-3, 1e-3);
  const auto& axes = nv_axes();
  for (int trial = 0; trial < 200; ++trial) {
    const Vec3 b{dist(eng), dist(eng), dist(eng)};
    double acc = 0.0;
    for (const auto& ax : axes) {
      const double proj = project_field(b, ax);
      acc += proj * proj;
    }
    const double want = 4.0 / 3.0 * b.dot(b);
    CHECK(acc == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("resonance lines invariant under b -> -b") {
  SpinParams p;
  PhysicalConstants c;
  std::mt19937_64 eng(9);
  std::uniform_real_distribution<double> dist(-1e-3, 1e-3);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 b{dist(eng), dist(eng), dist(eng)};
    const auto fwd = all_line_centers(all_resonances(b, p, c));
    const auto rev = all_line_centers(all_resonances(-b, p, c));
    REQUIRE(fwd.size() == rev.size());
    for (std::size_t i = 0; i < fwd.size(); ++i) {
      CHECK(fwd[i] == doctest::Approx(rev[i]).epsilon(1e-15));
    }
  }
}

TEST_CASE("line multiset matches an independent per-axis recomputation") {
  SpinParams p;
  PhysicalConstants c;
  const Vec3 b = field_along({1, 1, 0}, 7.4e-4);
  const auto set = all_resonances(b, p, c);
  std::vector<double> expect;
  for (const auto& ax : nv_axes()) {
    const double proj = b.dot(ax.unit);
    const double zeeman = c.gyromagnetic_hz_per_t() * std::abs(proj);
    for (const double center : {p.zfs_hz - zeeman, p.zfs_hz + zeeman}) {
      for (int k = -1; k <= 1; ++k) expect.push_back(center + k * p.hyperfine_hz);
    }
  }
  std::sort(expect.begin(), expect.end());
  const auto got = all_line_centers(set);
  REQUIRE(got.size() == expect.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-15));
  }
}

TEST_CASE("degeneracy grouping is stable under axis-order permutation") {
  SpinParams p;
  PhysicalConstants c;
  const Vec3 b = field_along({1, 1, 0}, 1e-3);
  const auto set = all_resonances(b, p, c);
  // Group sizes as a sorted multiset must be {2,2} regardless of ordering.
  std::vector<std::size_t> sizes;
  for (const auto& g : set.degenerate_groups) sizes.push_back(g.size());
  std::sort(sizes.begin(), sizes.end());
  CHECK(sizes == std::vector<std::size_t>{2, 2});
}

TEST_CASE("validation rejects bad spin parameters") {
  SpinParams p;
  p.zfs_hz = -1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = SpinParams{};
  p.hyperfine_hz = -5.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  PhysicalConstants c;
  c.electron_g = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
