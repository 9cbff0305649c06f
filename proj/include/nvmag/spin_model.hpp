#pragma once

#include <array>
#include <utility>
#include <vector>

#include "nvmag/common.hpp"
#include "nvmag/constants.hpp"

namespace nvmag::spin {

/// Ground-state spin parameters. The linear Zeeman model f = D +- g*muB*B/h
/// is valid for the ~1 mT bias fields used here; no state mixing terms.
struct SpinParams {
  double zfs_hz = 2.870e9;
  double hyperfine_hz = 2.16e6;  // 14N default; config value, not ground truth
  int n_hyperfine = 3;

  void validate() const {
    if (!(zfs_hz > 0.0)) throw ConfigError("SpinParams: zfs_hz must be > 0");
    if (!(hyperfine_hz >= 0.0)) {
      throw ConfigError("SpinParams: hyperfine_hz must be >= 0");
    }
    if (n_hyperfine < 1 || n_hyperfine % 2 == 0) {
      throw ConfigError("SpinParams: n_hyperfine must be odd and >= 1");
    }
  }
};

struct NVAxis {
  std::array<int, 3> miller;
  Vec3 unit;
};

/// The four NV orientations in the cubic crystal frame:
/// [111], [1-1-1], [-1-11], [-11-1].
const std::array<NVAxis, 4>& nv_axes();

/// Unit vector for an (integer) Miller direction.
Vec3 miller_unit(const std::array<int, 3>& m);

/// Signed projection of b (tesla, crystal frame) on the axis, tesla.
double project_field(const Vec3& b_tesla, const NVAxis& axis);

/// m_s = 0 <-> -1 / +1 transition frequencies for a given axis projection.
std::pair<double, double> transition_frequencies(const SpinParams& p,
                                                 const PhysicalConstants& c,
                                                 double b_nv_tesla);

/// Hyperfine components at f_center + k*a, k = -(n-1)/2 .. +(n-1)/2.
std::vector<double> hyperfine_lines(double f_center_hz, const SpinParams& p);

struct TransitionLines {
  double center_hz = 0.0;
  std::vector<double> lines_hz;
  double amplitude_each = 1.0;  // relative amplitudes sum to 1 per transition
};

struct AxisResonance {
  int axis_index = 0;
  double b_proj_tesla = 0.0;
  double f_minus_hz = 0.0;
  double f_plus_hz = 0.0;
  TransitionLines minus;
  TransitionLines plus;
  double weight = 1.0;  // probe-polarization selection weight
};

struct ResonanceSet {
  std::array<AxisResonance, 4> axes;
  /// Axis indices grouped by degenerate |projection| (< 1 kHz in frequency).
  std::vector<std::vector<int>> degenerate_groups;
};

/// Frequency tolerance below which two axis projections count as degenerate.
inline constexpr double kDegeneracyToleranceHz = 1e3;

ResonanceSet all_resonances(const Vec3& b_tesla, const SpinParams& p,
                            const PhysicalConstants& c,
                            const std::array<double, 4>& axis_weights = {
                                1.0, 1.0, 1.0, 1.0});

}  // namespace nvmag::spin
