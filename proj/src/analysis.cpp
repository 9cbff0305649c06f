#include "nvmag/analysis.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>

#include "nvmag/rng.hpp"

namespace nvmag::analysis {

void NoiseModel::validate() const {
  for (double v : {electronic_floor_t, technical_floor_t, shot_floor_t}) {
    if (!(v >= 0.0)) throw ConfigError("NoiseModel: floors must be >= 0");
  }
  for (const MainsLine& m : mains) {
    if (!(m.freq_hz > 0.0) || !(m.amplitude_t >= 0.0)) {
      throw ConfigError("NoiseModel: mains lines need freq > 0, amplitude >= 0");
    }
  }
}

std::vector<MainsLine> mains_harmonics(double fundamental_hz,
                                       double amplitude_t, int n_harmonics,
                                       double rolloff_exponent) {
  if (!(fundamental_hz > 0.0) || n_harmonics < 0) {
    throw ConfigError("mains_harmonics: bad parameters");
  }
  std::vector<MainsLine> lines;
  for (int n = 1; n <= n_harmonics; ++n) {
    lines.push_back(
        {fundamental_hz * n,
         amplitude_t / std::pow(static_cast<double>(n), rolloff_exponent)});
  }
  return lines;
}

double field_from_lia(double s_lia_v, double alpha_v_per_hz,
                      const MagnetometerGeometry& g,
                      const PhysicalConstants& c) {
  g.validate();
  c.validate();
  if (alpha_v_per_hz == 0.0) {
    throw NumericError("field_from_lia: alpha = 0, slope calibration missing");
  }
  return s_lia_v * c.planck_h /
         (c.electron_g * c.bohr_magneton * alpha_v_per_hz *
          std::cos(g.theta_rad));
}

namespace {

/// Mains phases are a deterministic function of the seed, drawn from a
/// stream separate from the white-noise samples.
std::vector<double> mains_phases(const NoiseModel& n) {
  GaussianRng rng(n.seed ^ 0x6d61696e73ULL);
  std::vector<double> phases;
  phases.reserve(n.mains.size());
  for (std::size_t i = 0; i < n.mains.size(); ++i) {
    phases.push_back(2.0 * kPi * rng.uniform());
  }
  return phases;
}

}  // namespace

lockin::TimeSeries synth_noise(const NoiseModel& n, double duration_s,
                               double rate_hz) {
  n.validate();
  if (!(duration_s > 0.0) || !(rate_hz > 0.0)) {
    throw ConfigError("synth_noise: duration and rate must be > 0");
  }
  for (const MainsLine& m : n.mains) {
    if (rate_hz <= 2.0 * m.freq_hz) {
      throw ConfigError("synth_noise: rate must exceed 2x the mains lines");
    }
  }
  const auto count =
      static_cast<std::size_t>(std::llround(duration_s * rate_hz));
  lockin::TimeSeries ts;
  ts.sample_rate_hz = rate_hz;
  ts.unit = lockin::SignalUnit::tesla;
  ts.values.assign(count, 0.0);

  const double sigma = n.white_floor_t() * std::sqrt(0.5 * rate_hz);
  if (sigma > 0.0) {
    GaussianRng rng(n.seed);
    for (double& v : ts.values) v = sigma * rng.normal();
  }
  const auto phases = mains_phases(n);
  std::vector<double> tone(ts.values.size());
  for (std::size_t j = 0; j < n.mains.size(); ++j) {
    if (n.mains[j].amplitude_t == 0.0) continue;
    const double dphase = 2.0 * kPi * n.mains[j].freq_hz / rate_hz;
    kernels::sine_series(phases[j], dphase, n.mains[j].amplitude_t, tone);
    for (std::size_t i = 0; i < ts.values.size(); ++i) ts.values[i] += tone[i];
  }
  return ts;
}

void LSDConfig::validate() const {
  if (!(segment_s > 0.0)) throw ConfigError("LSDConfig: segment_s must be > 0");
  if (n_segments < 1) throw ConfigError("LSDConfig: n_segments must be >= 1");
}

SensitivityReport lsd(const lockin::TimeSeries& ts, const LSDConfig& cfg) {
  ts.validate();
  cfg.validate();
  const auto seg_len =
      static_cast<std::size_t>(std::llround(cfg.segment_s * ts.sample_rate_hz));
  if (seg_len < 2) throw ConfigError("lsd: segment too short");
  const std::size_t needed = seg_len * static_cast<std::size_t>(cfg.n_segments);
  if (ts.values.size() < needed) {
    throw ConfigError("lsd: record too short for segment_s x n_segments");
  }

  std::vector<double> window(seg_len, 1.0);
  if (cfg.window == LSDConfig::Window::hann) {
    for (std::size_t i = 0; i < seg_len; ++i) {
      window[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) /
                                        static_cast<double>(seg_len - 1)));
    }
  }
  const double win_power = kernels::dot(window, window);

  const std::size_t n_bins = seg_len / 2 + 1;
  std::vector<double> mean_power(n_bins, 0.0);

  double* in = fftw_alloc_real(seg_len);
  fftw_complex* out = fftw_alloc_complex(n_bins);
  fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(seg_len), in, out,
                                        FFTW_ESTIMATE);
  if (plan == nullptr) {
    fftw_free(in);
    fftw_free(out);
    throw NumericError("lsd: FFT plan creation failed");
  }

  const double scale = 1.0 / (ts.sample_rate_hz * win_power);
  for (int s = 0; s < cfg.n_segments; ++s) {
    const double* seg = ts.values.data() + static_cast<std::size_t>(s) * seg_len;
    for (std::size_t i = 0; i < seg_len; ++i) in[i] = seg[i] * window[i];
    fftw_execute(plan);
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double re = out[k][0];
      const double im = out[k][1];
      double p = (re * re + im * im) * scale;
      const bool interior = k != 0 && !(seg_len % 2 == 0 && k == n_bins - 1);
      if (interior) p *= 2.0;
      mean_power[k] += p;
    }
  }
  fftw_destroy_plan(plan);
  fftw_free(in);
  fftw_free(out);

  SensitivityReport rep;
  rep.freq_hz.resize(n_bins);
  rep.lsd.resize(n_bins);
  const double df = 1.0 / cfg.segment_s;
  for (std::size_t k = 0; k < n_bins; ++k) {
    rep.freq_hz[k] = static_cast<double>(k) * df;
    rep.lsd[k] =
        std::sqrt(mean_power[k] / static_cast<double>(cfg.n_segments));
  }
  if (cfg.smoothing_bins > 1) {
    rep.lsd_smoothed = moving_median(rep.lsd, cfg.smoothing_bins);
  }
  rep.bandwidth_hz = 0.5 * ts.sample_rate_hz;
  return rep;
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) throw ConfigError("median: empty input");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid),
                   v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    std::nth_element(v.begin(),
                     v.begin() + static_cast<std::ptrdiff_t>(mid) - 1,
                     v.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (m + v[mid - 1]);
  }
  return m;
}

}  // namespace

double noise_floor(const SensitivityReport& report, double band_lo_hz,
                   double band_hi_hz) {
  if (!(band_hi_hz > band_lo_hz)) {
    throw ConfigError("noise_floor: empty band");
  }
  std::vector<double> in_band;
  for (std::size_t k = 0; k < report.freq_hz.size(); ++k) {
    if (report.freq_hz[k] >= band_lo_hz && report.freq_hz[k] <= band_hi_hz) {
      in_band.push_back(report.lsd[k]);
    }
  }
  if (in_band.empty()) {
    throw ConfigError("noise_floor: no bins inside the band");
  }
  return median_of(std::move(in_band));
}

std::vector<double> moving_median(const std::vector<double>& values,
                                  int window_bins) {
  if (window_bins <= 1) return values;
  const int half = window_bins / 2;
  const auto n = static_cast<int>(values.size());
  std::vector<double> out(values.size());
  std::vector<double> local;
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(n - 1, i + half);
    local.assign(values.begin() + lo, values.begin() + hi + 1);
    out[static_cast<std::size_t>(i)] = median_of(std::move(local));
  }
  return out;
}

double shot_noise_sensitivity(double photon_rate, double effective_contrast,
                              double fwhm_hz, const MagnetometerGeometry& g,
                              const PhysicalConstants& c, double cap_t) {
  g.validate();
  c.validate();
  if (!(photon_rate > 0.0) || !(effective_contrast > 0.0) ||
      !(fwhm_hz > 0.0)) {
    throw ConfigError("shot_noise_sensitivity: inputs must be > 0");
  }
  const double prefactor = 4.0 / (3.0 * std::sqrt(3.0));
  const double eta = prefactor * c.planck_h /
                     (c.electron_g * c.bohr_magneton * std::cos(g.theta_rad)) *
                     fwhm_hz / (effective_contrast * std::sqrt(photon_rate));
  if (eta > cap_t) {
    throw NumericError("shot_noise_sensitivity: result exceeds cap");
  }
  return eta;
}

double lowpass_cascade_gain(const lockin::DemodConfig& d,
                            double sample_rate_hz, double freq_hz) {
  const double tau = 1.0 / (2.0 * kPi * d.lowpass_cutoff_hz);
  const double a = 1.0 - std::exp(-1.0 / (sample_rate_hz * tau));
  const double w = 2.0 * kPi * freq_hz / sample_rate_hz;
  const double b = 1.0 - a;
  const double mag2 = a * a / (1.0 - 2.0 * b * std::cos(w) + b * b);
  return std::pow(std::sqrt(mag2), d.lowpass_order);
}

double calibrated_detector_noise_lsd(double target_floor_t,
                                     double alpha_v_per_hz,
                                     const MagnetometerGeometry& g,
                                     const PhysicalConstants& c,
                                     const lockin::DemodConfig& d,
                                     double sample_rate_hz, double band_lo_hz,
                                     double band_hi_hz, double bin_hz) {
  if (target_floor_t == 0.0) return 0.0;
  if (alpha_v_per_hz == 0.0) {
    throw NumericError("calibrated_detector_noise_lsd: alpha = 0");
  }
  // Median of the cascade gain over the analysis band bins.
  std::vector<double> gains;
  for (double f = std::ceil(band_lo_hz / bin_hz) * bin_hz; f <= band_hi_hz;
       f += bin_hz) {
    gains.push_back(lowpass_cascade_gain(d, sample_rate_hz, f));
  }
  if (gains.empty()) {
    throw ConfigError("calibrated_detector_noise_lsd: empty band");
  }
  const double median_gain = median_of(std::move(gains));
  const double volts_per_tesla = c.electron_g * c.bohr_magneton *
                                 std::abs(alpha_v_per_hz) *
                                 std::cos(g.theta_rad) / c.planck_h;
  // Mixer gain on white noise is sqrt(2) in LSD.
  return target_floor_t * volts_per_tesla / (std::sqrt(2.0) * median_gain);
}

namespace {

struct MagneticSignal {
  std::vector<MainsLine> lines;
  std::vector<double> phases;
};

/// Runs the full detector -> LIA -> field chain for one scenario and returns
/// the decimated field record.
lockin::TimeSeries run_scenario_chain(
    const lockin::SpectrumModel* model, double carrier_hz,
    const lockin::FMConfig& fm_in, const lockin::DemodConfig& d,
    double rate_hz, std::size_t n_samples, double detector_noise_lsd,
    std::uint64_t seed, const MagneticSignal& field, double shift_per_tesla,
    double tesla_per_volt, std::size_t decimate) {
  lockin::FMConfig fm = fm_in;
  fm.carrier_center_hz = carrier_hz;

  const double dphase_mod = 2.0 * kPi * fm.f_mod_hz / rate_hz;
  const double dphase_ref = 2.0 * kPi * d.reference_freq_hz / rate_hz;
  const double sigma = detector_noise_lsd * std::sqrt(0.5 * rate_hz);
  GaussianRng rng(seed);
  lockin::LowpassCascade filter(d.lowpass_cutoff_hz, d.lowpass_order, rate_hz);

  lockin::TimeSeries out;
  out.sample_rate_hz = rate_hz / static_cast<double>(decimate);
  out.unit = lockin::SignalUnit::tesla;
  out.values.reserve(n_samples / decimate + 1);

  constexpr std::size_t kBlock = 8192;
  std::vector<double> freq(kBlock);
  std::vector<double> resp(kBlock);
  std::vector<double> tone(kBlock);

  for (std::size_t i0 = 0; i0 < n_samples; i0 += kBlock) {
    const std::size_t m = std::min(kBlock, n_samples - i0);
    auto f = std::span<double>(freq).subspan(0, m);
    kernels::sine_series(static_cast<double>(i0) * dphase_mod, dphase_mod,
                         fm.f_dev_hz, f);
    for (double& v : f) v += fm.carrier_center_hz;
    // Ambient magnetic field shifts the resonance pattern; evaluating the
    // static spectrum at f - shift is the same as translating the lines.
    if (model != nullptr) {
      for (std::size_t j = 0; j < field.lines.size(); ++j) {
        const MainsLine& ln = field.lines[j];
        if (ln.amplitude_t == 0.0) continue;
        const double dp = 2.0 * kPi * ln.freq_hz / rate_hz;
        auto tn = std::span<double>(tone).subspan(0, m);
        kernels::sine_series(field.phases[j] + static_cast<double>(i0) * dp,
                             dp, shift_per_tesla * ln.amplitude_t, tn);
        for (std::size_t k = 0; k < m; ++k) f[k] -= tn[k];
      }
      model->eval(f, std::span<double>(resp).subspan(0, m));
    } else {
      std::fill_n(resp.begin(), m, 0.0);
    }
    if (sigma > 0.0) {
      for (std::size_t k = 0; k < m; ++k) resp[k] += sigma * rng.normal();
    }
    auto r = std::span<double>(resp).subspan(0, m);
    kernels::mix_sine(static_cast<double>(i0) * dphase_ref +
                          d.reference_phase_rad,
                      dphase_ref, 2.0, r);
    filter.process(r);
    for (std::size_t k = 0; k < m; ++k) {
      if ((i0 + k) % decimate == 0) {
        out.values.push_back(resp[k] * tesla_per_volt);
      }
    }
  }
  return out;
}

}  // namespace

ScenarioResult end_to_end_sensitivity(const SensitivityScenario& s) {
  s.constants.validate();
  s.geometry.validate();
  s.noise.validate();
  s.lsd_cfg.validate();
  if (!(s.depth_per_line > 0.0) || !(s.fwhm_hz > 0.0)) {
    throw ConfigError("end_to_end_sensitivity: need positive depth and fwhm");
  }
  if (!(s.decimate_to_hz > 2.0 * s.band_hi_hz)) {
    throw ConfigError(
        "end_to_end_sensitivity: decimated rate must exceed 2x band_hi");
  }

  const auto resonances = spin::all_resonances(s.bias_field_t, s.spin_params,
                                               s.constants, s.axis_weights);
  const auto lines = odmr::to_kernel_lines(
      odmr::scan_domain_lines(resonances, s.mw, s.fwhm_hz, s.depth_per_line));
  if (lines.empty()) {
    throw ConfigError("end_to_end_sensitivity: no driven resonance lines");
  }
  const lockin::LineListModel model(lines, s.probe_level_v);

  // Locate the strongest coincidence peak on a dense grid. In sg2-center
  // coordinates the lower-sideband mirror entries sit at negative scan
  // values; only the physical (positive) branch is a carrier candidate.
  double lo = 0.0, hi = 0.0;
  bool have_range = false;
  for (const auto& ln : lines) {
    if (ln.center <= 0.0) continue;
    if (!have_range || ln.center < lo) lo = ln.center;
    if (!have_range || ln.center > hi) hi = ln.center;
    have_range = true;
  }
  if (!have_range) {
    throw ConfigError("end_to_end_sensitivity: no usable resonance lines");
  }
  lo -= s.fwhm_hz;
  hi += s.fwhm_hz;
  const double step = s.fwhm_hz / 20.0;
  double best_f = lo, best_v = -1.0;
  for (double f = lo; f <= hi; f += step) {
    const double v = model(f);
    if (v > best_v) {
      best_v = v;
      best_f = f;
    }
  }

  // Dispersive calibration around the central peak.
  lockin::ScanTiming timing;
  timing.sample_rate_hz = s.synth_rate_hz;
  lockin::FMConfig fm = s.fm;
  fm.carrier_center_hz = best_f;
  lockin::DemodConfig d = s.lia;
  d.reference_freq_hz = s.fm.f_mod_hz;
  if (s.auto_phase) {
    d.reference_phase_rad =
        lockin::calibrate_phase(model, fm, d, s.fwhm_hz / 4.0, timing);
  }

  const lockin::CarrierSweep sweep{best_f - s.fwhm_hz, best_f + s.fwhm_hz, 81};
  const auto curve = lockin::dispersive_scan(model, fm, d, sweep, timing);
  const auto calib =
      lockin::fit_zero_crossing(curve, s.fwhm_hz / 8.0, best_f);

  ScenarioResult result;
  result.calibration = calib;
  result.reference_phase_rad = d.reference_phase_rad;

  const double tesla_per_volt =
      s.constants.planck_h /
      (s.constants.electron_g * s.constants.bohr_magneton *
       calib.alpha_v_per_hz * std::cos(s.geometry.theta_rad));
  const double shift_per_tesla = s.constants.gyromagnetic_hz_per_t() *
                                 std::cos(s.geometry.theta_rad);

  // Timing: settle the filter, then exactly n_segments x segment_s of data.
  const double rate = s.synth_rate_hz;
  const auto decim = static_cast<std::size_t>(
      std::max(1.0, std::round(rate / s.decimate_to_hz)));
  const double out_rate = rate / static_cast<double>(decim);
  const double settle_s =
      (12.0 + 3.0 * d.lowpass_order) / (2.0 * kPi * d.lowpass_cutoff_hz);
  const auto settle_out = static_cast<std::size_t>(
      std::ceil(settle_s * out_rate));
  const auto record_out =
      static_cast<std::size_t>(std::llround(s.lsd_cfg.segment_s * out_rate)) *
      static_cast<std::size_t>(s.lsd_cfg.n_segments);
  const std::size_t n_samples = (settle_out + record_out) * decim;

  MagneticSignal field;
  field.lines = s.noise.mains;
  {
    GaussianRng rng(s.noise.seed ^ 0x6d61696e73ULL);
    for (std::size_t i = 0; i < field.lines.size(); ++i) {
      field.phases.push_back(2.0 * kPi * rng.uniform());
    }
  }

  const double bin_hz = 1.0 / s.lsd_cfg.segment_s;
  auto run = [&](const lockin::SpectrumModel* mdl, double carrier,
                 double white_floor_t, std::uint64_t seed) {
    const double det_lsd = calibrated_detector_noise_lsd(
        white_floor_t, calib.alpha_v_per_hz, s.geometry, s.constants, d, rate,
        s.band_lo_hz, s.band_hi_hz, bin_hz);
    lockin::TimeSeries rec = run_scenario_chain(
        mdl, carrier, s.fm, d, rate, n_samples, det_lsd, seed, field,
        shift_per_tesla, tesla_per_volt, decim);
    rec.values.erase(rec.values.begin(),
                     rec.values.begin() +
                         static_cast<std::ptrdiff_t>(std::min(
                             static_cast<std::size_t>(settle_out),
                             rec.values.size())));
    SensitivityReport rep = lsd(rec, s.lsd_cfg);
    rep.band_lo_hz = s.band_lo_hz;
    rep.band_hi_hz = s.band_hi_hz;
    rep.bandwidth_hz = d.lowpass_cutoff_hz;
    rep.noise_floor = noise_floor(rep, s.band_lo_hz, s.band_hi_hz);
    return rep;
  };

  const double light_floor = std::sqrt(
      s.noise.technical_floor_t * s.noise.technical_floor_t +
      s.noise.shot_floor_t * s.noise.shot_floor_t +
      s.noise.electronic_floor_t * s.noise.electronic_floor_t);
  result.sensitive = run(&model, calib.f_res_hz, light_floor, s.noise.seed);
  result.insensitive =
      run(&model, calib.f_res_hz + s.insensitive_detuning_hz, light_floor,
          s.noise.seed + 1);
  result.electronic =
      run(nullptr, calib.f_res_hz, s.noise.electronic_floor_t,
          s.noise.seed + 2);
  return result;
}

}  // namespace nvmag::analysis
