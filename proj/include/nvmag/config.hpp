#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nvmag/analysis.hpp"
#include "nvmag/fitting.hpp"
#include "nvmag/lockin.hpp"
#include "nvmag/odmr.hpp"
#include "nvmag/photophysics.hpp"
#include "nvmag/spin_model.hpp"

namespace nvmag::config {

/// Full scenario configuration. Parsing is strict: unknown keys are rejected
/// with their JSON path; rate entries accept either *_rate_hz or
/// *_lifetime_s, never both. All units are SI (Hz, s, T, W, V).
struct Config {
  std::uint64_t seed = 1;
  std::string output_dir = "out";

  struct Spin {
    double zfs_hz = 2.870e9;
    double hyperfine_hz = 2.16e6;
    int n_hyperfine = 3;
    double g_factor = 2.0028;
    double bias_field_tesla = 1.0e-3;
    std::array<double, 3> bias_direction_miller = {1.0, 1.0, 0.0};
    std::array<double, 4> axis_weights = {1.0, 1.0, 1.0, 1.0};
  } spin;

  struct Rates {
    double pump_rate_hz = 3.0e6;
    double pump_power_w = 0.2;
    double pump_rate_per_watt_hz = 1.5e7;
    bool pump_rate_explicit = false;
    double radiative_rate_hz = 1e8;
    double isc0_rate_hz = 8e6;
    double isc1_rate_hz = 4.4e7;
    double singlet_relax_rate_hz = 1e10;
    double metastable_rate_hz = 5e6;
    double mw_mixing_rate_hz = 1e7;
  } rates;

  struct Optics {
    double nv_areal_absorbance = 1.3;
    double background_bleach_depth = 0.0;
    double background_bleach_sat_power_w = 0.1;
    double background_time_const_s = 1e-3;
    double probe_level_v = 1.0;
  } optics;

  struct Transient {
    double frequency_hz = 300e3;
    double duty = 0.3;
    double duration_s = 1e-5;
    double dt_s = 1e-9;
    int settle_periods = 40;
    std::vector<double> power_sweep_w;
  } transient;

  struct Mw {
    double f_sg1_hz = 2.870e9;
    std::vector<double> sg2_tones_hz;
    bool mixing_enabled = false;
    std::string scan_target = "sg1";  // or "sg2_center"
    double scan_start_hz = 2.82e9;
    double scan_stop_hz = 2.92e9;
    int scan_points = 2001;
  } mw;

  struct Lineshape {
    double fwhm_hz = 700e3;
    double depth_per_line = 0.004;
  } lineshape;

  struct Fm {
    double f_mod_hz = 5.6e3;
    double f_dev_hz = 330e3;
    std::optional<double> carrier_center_hz;  // absent = auto (central peak)
  } fm;

  struct Lia {
    std::optional<double> reference_phase_rad;  // absent = auto calibration
    double lowpass_cutoff_hz = 1e3;
    int lowpass_order = 4;
    double sample_rate_hz = 1e6;
    double settle_s = 0.0;   // 0 = auto
    double average_s = 0.0;  // 0 = auto
  } lia;

  struct DemodScan {
    std::optional<double> start_hz;  // absent = auto around line list
    std::optional<double> stop_hz;
    int points = 201;
    std::optional<double> fit_window_hz;  // absent = fwhm/8
  } demod_scan;

  struct Noise {
    double electronic_floor_tesla = 1.5e-12;
    double technical_floor_tesla = 0.0;
    double shot_floor_tesla = 0.0;
    double shot_photon_rate_hz = 0.0;  // >0: derive shot floor from formula
    double mains_fundamental_hz = 50.0;
    double mains_amplitude_tesla = 0.0;
    int mains_harmonics = 9;
    double mains_rolloff_exponent = 1.0;
    std::vector<analysis::MainsLine> mains_lines;  // explicit, overrides
    std::optional<analysis::MainsLine> test_field;
  } noise;

  struct Lsd {
    double segment_s = 1.0;
    int n_segments = 60;
    std::string window = "rectangular";  // or "hann"
    int smoothing_bins = 0;
    double band_lo_hz = 1.0;
    double band_hi_hz = 900.0;
    double decimate_to_hz = 5e3;
  } lsd;

  struct Sensitivity {
    double synth_rate_hz = 250e3;
    double insensitive_detuning_hz = 50e6;
    double theta_deg = 35.3;
  } sensitivity;

  struct Fit {
    int n_peaks = 6;
    bool shared_fwhm = false;
    int max_iterations = 200;
  } fit;

  struct ShotNoise {
    double photon_rate_hz = 8e16;
    double effective_contrast = 0.016;
    double fwhm_hz = 700e3;
    double cap_tesla = 1e-6;
  } shotnoise;
};

Config parse(const std::string& json_text);
Config load_file(const std::filesystem::path& path);
/// Canonical serialization (sorted keys); round-trips bit-exactly.
std::string serialize(const Config& c);
std::string config_hash(const Config& c);

// Mappings onto the module types.
PhysicalConstants constants_of(const Config& c);
spin::SpinParams spin_params_of(const Config& c);
Vec3 bias_field_of(const Config& c);
photo::RateConfig rates_of(const Config& c, bool mw_on);
photo::OpticalConfig optics_of(const Config& c);
photo::PulsedPumpSpec pump_spec_of(const Config& c);
odmr::MWConfig mw_config_of(const Config& c);
lockin::FMConfig fm_config_of(const Config& c);
lockin::DemodConfig demod_config_of(const Config& c);
lockin::ScanTiming scan_timing_of(const Config& c);
analysis::NoiseModel noise_model_of(const Config& c);
analysis::LSDConfig lsd_config_of(const Config& c);
analysis::MagnetometerGeometry geometry_of(const Config& c);
fit::FitOptions fit_options_of(const Config& c);
analysis::SensitivityScenario scenario_of(const Config& c);

}  // namespace nvmag::config
