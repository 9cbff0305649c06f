#include "nvmag/spin_model.hpp"

#include <algorithm>
#include <cmath>

namespace nvmag::spin {

const std::array<NVAxis, 4>& nv_axes() {
  static const std::array<NVAxis, 4> axes = {
      NVAxis{{1, 1, 1}, miller_unit({1, 1, 1})},
      NVAxis{{1, -1, -1}, miller_unit({1, -1, -1})},
      NVAxis{{-1, -1, 1}, miller_unit({-1, -1, 1})},
      NVAxis{{-1, 1, -1}, miller_unit({-1, 1, -1})},
  };
  return axes;
}

Vec3 miller_unit(const std::array<int, 3>& m) {
  const Vec3 v{static_cast<double>(m[0]), static_cast<double>(m[1]),
               static_cast<double>(m[2])};
  return v.normalized();
}

double project_field(const Vec3& b_tesla, const NVAxis& axis) {
  if (!b_tesla.finite()) throw ConfigError("project_field: non-finite field");
  return b_tesla.dot(axis.unit);
}

std::pair<double, double> transition_frequencies(const SpinParams& p,
                                                 const PhysicalConstants& c,
                                                 double b_nv_tesla) {
  const double zeeman = c.gyromagnetic_hz_per_t() * std::abs(b_nv_tesla);
  return {p.zfs_hz - zeeman, p.zfs_hz + zeeman};
}

std::vector<double> hyperfine_lines(double f_center_hz, const SpinParams& p) {
  p.validate();
  std::vector<double> lines;
  lines.reserve(static_cast<std::size_t>(p.n_hyperfine));
  const int half = (p.n_hyperfine - 1) / 2;
  for (int k = -half; k <= half; ++k) {
    lines.push_back(f_center_hz + static_cast<double>(k) * p.hyperfine_hz);
  }
  return lines;
}

ResonanceSet all_resonances(const Vec3& b_tesla, const SpinParams& p,
                            const PhysicalConstants& c,
                            const std::array<double, 4>& axis_weights) {
  p.validate();
  c.validate();
  ResonanceSet set;
  const auto& axes = nv_axes();
  const double amp = 1.0 / static_cast<double>(p.n_hyperfine);
  for (int i = 0; i < 4; ++i) {
    AxisResonance& ar = set.axes[static_cast<std::size_t>(i)];
    ar.axis_index = i;
    ar.b_proj_tesla = project_field(b_tesla, axes[static_cast<std::size_t>(i)]);
    const auto [fm, fp] = transition_frequencies(p, c, ar.b_proj_tesla);
    ar.f_minus_hz = fm;
    ar.f_plus_hz = fp;
    ar.minus = {fm, hyperfine_lines(fm, p), amp};
    ar.plus = {fp, hyperfine_lines(fp, p), amp};
    ar.weight = axis_weights[static_cast<std::size_t>(i)];
  }

  // Group axes whose Zeeman splittings coincide within the tolerance.
  const double gamma = c.gyromagnetic_hz_per_t();
  std::array<bool, 4> assigned{};
  for (int i = 0; i < 4; ++i) {
    if (assigned[static_cast<std::size_t>(i)]) continue;
    std::vector<int> group{i};
    assigned[static_cast<std::size_t>(i)] = true;
    const double fi =
        gamma * std::abs(set.axes[static_cast<std::size_t>(i)].b_proj_tesla);
    for (int j = i + 1; j < 4; ++j) {
      if (assigned[static_cast<std::size_t>(j)]) continue;
      const double fj =
          gamma * std::abs(set.axes[static_cast<std::size_t>(j)].b_proj_tesla);
      if (std::abs(fi - fj) < kDegeneracyToleranceHz) {
        group.push_back(j);
        assigned[static_cast<std::size_t>(j)] = true;
      }
    }
    set.degenerate_groups.push_back(std::move(group));
  }
  return set;
}

}  // namespace nvmag::spin
