#pragma once

#include <array>
#include <optional>
#include <vector>

#include "nvmag/common.hpp"

namespace nvmag::photo {

/// Rates of the six-level optical cycle, all s^-1. Defaults follow the
/// measured lifetimes (10 ns radiative, 100 ps singlet relaxation, 200 ns
/// metastable); the ISC rates are fitted defaults chosen to land near the
/// observed pulsed contrasts, not measured values.
struct RateConfig {
  double pump_rate = 0.0;           // proportional to pump power
  double k_radiative = 1e8;         // 3E -> 3A2, both spin branches
  double k_isc0 = 8e6;              // 3E m_s=0 -> 1A1
  double k_isc1 = 4.4e7;            // 3E m_s=+-1 -> 1A1
  double k_singlet_relax = 1e10;    // 1A1 -> 1E
  double k_metastable = 5e6;        // 1E -> 3A2
  double mw_mixing_rate = 0.0;      // ground-state m_s=0 <-> +-1, 0 = MW off

  void validate() const;
};

/// Occupancies of (3A2 m_s=0), (3A2 m_s=+-1), (3E m_s=0), (3E m_s=+-1),
/// 1A1 and 1E; m_s=+1 and m_s=-1 are lumped.
struct LevelPopulations {
  double g0 = 1.0, g1 = 0.0, e0 = 0.0, e1 = 0.0, s_upper = 0.0, s_meta = 0.0;

  double sum() const { return g0 + g1 + e0 + e1 + s_upper + s_meta; }
  std::array<double, 6> as_array() const {
    return {g0, g1, e0, e1, s_upper, s_meta};
  }
  static LevelPopulations from_array(const std::array<double, 6>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5]};
  }
};

/// Probe-path optics: peak singlet single-pass absorbance (density x cross
/// section x 2.6 mm path, lumped) and the slow saturable background bleach
/// seen in CVD material.
struct OpticalConfig {
  double nv_areal_absorbance = 1.3;
  double background_bleach_depth = 0.0;       // in [0,1)
  double background_bleach_sat_power_w = 0.1;
  double background_time_const_s = 1e-3;

  void validate() const;
};

struct ContrastReport {
  double c_no_mw = 0.0;
  double c_mw = 0.0;
  double spin_contrast = 0.0;
  double effective_spin_contrast = 0.0;
};

/// Square-wave pump modulation (AOM emulation).
struct PulsedPumpSpec {
  double frequency_hz = 300e3;
  double duty = 0.3;
};

struct TransientTrace {
  double dt_s = 0.0;
  std::vector<double> t_s;
  std::vector<LevelPopulations> pops;
  std::vector<double> pump_on;  // 1.0 while the pump is on
};

/// Unpolarized dark state: ground manifold split evenly, everything else 0.
LevelPopulations dark_state();

/// Steady state of the closed six-level balance system, normalized to 1.
/// pump_rate == 0 returns the dark state; all rates zero is rejected.
LevelPopulations steady_state(const RateConfig& r);

/// Integrates the rate equations under square-wave pumping with exact
/// matrix-exponential steps (the system is linear and stiff). dt is also the
/// output sampling interval and must resolve every rate slower than 1 ns
/// (dt <= 0.1/rate); faster channels are integrated exactly regardless.
TransientTrace transient(const RateConfig& r, const PulsedPumpSpec& pump,
                         double duration_s, double dt_s,
                         std::optional<LevelPopulations> initial = {});

/// Beer-Lambert singlet absorption plus the CW background bleach level.
double ir_transmission(const LevelPopulations& pop, const OpticalConfig& o,
                       double pump_power_w);

/// Transmission along a pulsed trace. The bleach state responds with the
/// configured time constant and starts at its duty-averaged equilibrium.
std::vector<double> transmission_trace(const TransientTrace& trace,
                                       const OpticalConfig& o,
                                       double pump_power_w,
                                       const PulsedPumpSpec& pump);

/// Contrast arithmetic: spin = (c_mw - c_no)/(c_mw + c_no), effective =
/// c_no_mw * spin (the no-MW optical contrast is the basis; 8% x 20% = 1.6%).
ContrastReport contrast_report_from_values(double c_mw, double c_no_mw);

/// Pulsed-pump contrast protocol: settle to the periodic steady state, take
/// max |dT/T| over one period for each drive condition. The two configs must
/// differ only in mw_mixing_rate.
ContrastReport contrasts(const RateConfig& r_mw_on, const RateConfig& r_mw_off,
                         const OpticalConfig& o,
                         const PulsedPumpSpec& pump = {},
                         int settle_periods = 40);

/// Max |dT/T| over the last period of a pulsed trace, referenced to the
/// end-of-off-phase transmission (background bleach is common mode and
/// cancels).
double pulsed_optical_contrast(const RateConfig& r, const OpticalConfig& o,
                               const PulsedPumpSpec& pump,
                               int settle_periods = 40);

namespace detail {
using Mat6 = std::array<double, 36>;  // row-major

Mat6 rate_matrix(const RateConfig& r, bool pump_on);
Mat6 expm6(const Mat6& m);
std::array<double, 6> apply(const Mat6& m, const std::array<double, 6>& x);
}  // namespace detail

}  // namespace nvmag::photo
