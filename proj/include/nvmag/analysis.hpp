#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nvmag/constants.hpp"
#include "nvmag/lockin.hpp"
#include "nvmag/spin_model.hpp"

namespace nvmag::analysis {

/// theta is the angle between the measured field direction ([110]) and the
/// two field-split NV axes; 35.3 degrees for the [110] bias geometry.
struct MagnetometerGeometry {
  double theta_rad = 35.3 * kPi / 180.0;

  void validate() const {
    if (!(std::cos(theta_rad) > 0.0)) {
      throw ConfigError("MagnetometerGeometry: cos(theta) must be > 0");
    }
  }
};

struct MainsLine {
  double freq_hz = 0.0;
  double amplitude_t = 0.0;
};

/// Non-magnetic noise budget in field-equivalent units plus ambient magnetic
/// lines. The white components (technical/laser, shot, electronics) add in
/// quadrature; each is a one-sided LSD in T/sqrt(Hz). technical_floor_t is a
/// calibration input: the insensitive-scenario floor is an experimental
/// outcome, not derivable, so it is dialed in here.
struct NoiseModel {
  double electronic_floor_t = 1.5e-12;
  double technical_floor_t = 0.0;
  double shot_floor_t = 0.0;
  std::vector<MainsLine> mains;
  std::uint64_t seed = 1;

  double white_floor_t() const {
    return std::sqrt(electronic_floor_t * electronic_floor_t +
                     technical_floor_t * technical_floor_t +
                     shot_floor_t * shot_floor_t);
  }
  void validate() const;
};

/// Builds 50 Hz (or other fundamental) harmonics with a 1/n^p roll-off.
std::vector<MainsLine> mains_harmonics(double fundamental_hz,
                                       double amplitude_t, int n_harmonics,
                                       double rolloff_exponent = 1.0);

/// delta B = S_LIA h / (g mu_B alpha cos theta).
double field_from_lia(double s_lia_v, double alpha_v_per_hz,
                      const MagnetometerGeometry& g,
                      const PhysicalConstants& c);

/// Field-equivalent noise record: white Gaussian at the quadrature floor
/// plus the deterministic mains sinusoids (phases derived from the seed).
lockin::TimeSeries synth_noise(const NoiseModel& n, double duration_s,
                               double rate_hz);

struct LSDConfig {
  enum class Window { rectangular, hann };

  double segment_s = 1.0;
  int n_segments = 60;
  Window window = Window::rectangular;
  int smoothing_bins = 0;  // moving-median width; <=1 disables

  void validate() const;
};

struct SensitivityReport {
  std::vector<double> freq_hz;
  std::vector<double> lsd;           // averaged amplitude spectrum, T/sqrt(Hz)
  std::vector<double> lsd_smoothed;  // empty unless smoothing configured
  double noise_floor = 0.0;          // median over [band_lo, band_hi]
  double band_lo_hz = 0.0;
  double band_hi_hz = 0.0;
  double bandwidth_hz = 0.0;         // measurement bandwidth metadata
};

/// Segment-averaged one-sided linear spectral density. Periodograms are
/// averaged in power and reported as amplitude: sqrt(2 |X_k|^2 / (fs S2))
/// with S2 the window power sum (= N for rectangular); DC and Nyquist carry
/// no factor 2. Bin spacing is 1/segment_s.
SensitivityReport lsd(const lockin::TimeSeries& ts, const LSDConfig& cfg);

/// Median of the LSD over the band; robust against mains peaks.
double noise_floor(const SensitivityReport& report, double band_lo_hz,
                   double band_hi_hz);

std::vector<double> moving_median(const std::vector<double>& values,
                                  int window_bins);

/// CW-ODMR shot-noise limit: eta = P_F (h/(g mu_B cos theta)) fwhm /
/// (C sqrt(rate)), with the Lorentzian FM-readout prefactor P_F = 4/(3
/// sqrt(3)). Throws when eta exceeds cap_t.
double shot_noise_sensitivity(double photon_rate, double effective_contrast,
                              double fwhm_hz, const MagnetometerGeometry& g,
                              const PhysicalConstants& c,
                              double cap_t = 1e-6);

/// Detector-referred white LSD (signal units) that produces the target
/// field-equivalent floor after the demod chain: the mixer raises white
/// noise by sqrt(2) and the lowpass shapes it; the calibration uses the
/// median in-band response so the reported median floor lands on target.
double calibrated_detector_noise_lsd(double target_floor_t,
                                     double alpha_v_per_hz,
                                     const MagnetometerGeometry& g,
                                     const PhysicalConstants& c,
                                     const lockin::DemodConfig& d,
                                     double sample_rate_hz, double band_lo_hz,
                                     double band_hi_hz, double bin_hz);

/// Exact magnitude response of the demodulator's lowpass cascade.
double lowpass_cascade_gain(const lockin::DemodConfig& d,
                            double sample_rate_hz, double freq_hz);

/// Complete Fig-4 style scenario: spin model -> ODMR synthesis -> dispersive
/// calibration -> three sensitivity runs (on resonance, detuned, no light).
struct SensitivityScenario {
  spin::SpinParams spin_params;
  PhysicalConstants constants;
  Vec3 bias_field_t;
  std::array<double, 4> axis_weights = {1.0, 0.0, 0.0, 1.0};
  odmr::MWConfig mw;                 // mixed drive, sg2_center scan coords
  double fwhm_hz = 700e3;
  double depth_per_line = 0.0;
  double probe_level_v = 1.0;
  lockin::FMConfig fm;               // carrier resolved internally
  lockin::DemodConfig lia;
  bool auto_phase = true;            // false: use lia.reference_phase_rad
  double synth_rate_hz = 250e3;
  double decimate_to_hz = 5e3;
  double insensitive_detuning_hz = 50e6;
  MagnetometerGeometry geometry;
  NoiseModel noise;
  LSDConfig lsd_cfg;
  double band_lo_hz = 1.0;
  double band_hi_hz = 900.0;
};

struct ScenarioResult {
  lockin::DispersiveFit calibration;
  double reference_phase_rad = 0.0;
  SensitivityReport sensitive;
  SensitivityReport insensitive;
  SensitivityReport electronic;
};

ScenarioResult end_to_end_sensitivity(const SensitivityScenario& s);

}  // namespace nvmag::analysis
