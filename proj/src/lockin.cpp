#include "nvmag/lockin.hpp"

#include <algorithm>
#include <cmath>

#include "nvmag/rng.hpp"

namespace nvmag::lockin {

namespace {
constexpr std::size_t kBlock = 8192;
}

const char* unit_name(SignalUnit u) {
  switch (u) {
    case SignalUnit::volts: return "v";
    case SignalUnit::tesla: return "tesla";
    case SignalUnit::hertz: return "hz";
    default: return "dimensionless";
  }
}

void TimeSeries::validate() const {
  if (!(sample_rate_hz > 0.0)) {
    throw ConfigError("TimeSeries: sample_rate must be > 0");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw ConfigError("TimeSeries: non-finite value");
  }
}

void FMConfig::validate() const {
  if (!(f_mod_hz > 0.0)) throw ConfigError("FMConfig: f_mod must be > 0");
  if (!(f_dev_hz > 0.0)) throw ConfigError("FMConfig: f_dev must be > 0");
}

double fm_frequency(double t_s, const FMConfig& fm) {
  return fm.carrier_center_hz +
         fm.f_dev_hz * std::sin(2.0 * kPi * fm.f_mod_hz * t_s);
}

void DemodConfig::validate(double sample_rate_hz) const {
  if (!(reference_freq_hz > 0.0)) {
    throw ConfigError("DemodConfig: reference frequency must be > 0");
  }
  if (!(lowpass_cutoff_hz > 0.0) || lowpass_cutoff_hz >= reference_freq_hz) {
    throw ConfigError("DemodConfig: cutoff must satisfy 0 < cutoff < f_ref");
  }
  if (lowpass_order < 1) throw ConfigError("DemodConfig: order must be >= 1");
  if (sample_rate_hz > 0.0 && reference_freq_hz >= 0.5 * sample_rate_hz) {
    throw ConfigError("DemodConfig: reference frequency above Nyquist");
  }
}

LowpassCascade::LowpassCascade(double cutoff_hz, int order,
                               double sample_rate_hz) {
  if (!(cutoff_hz > 0.0) || order < 1 || !(sample_rate_hz > 0.0)) {
    throw ConfigError("LowpassCascade: bad parameters");
  }
  const double tau = 1.0 / (2.0 * kPi * cutoff_hz);
  alpha_ = 1.0 - std::exp(-1.0 / (sample_rate_hz * tau));
  state_.assign(static_cast<std::size_t>(order), 0.0);
}

void LowpassCascade::reset(double value) {
  std::fill(state_.begin(), state_.end(), value);
}

double LowpassCascade::step(double x) {
  for (double& s : state_) {
    s += alpha_ * (x - s);
    x = s;
  }
  return x;
}

void LowpassCascade::process(std::span<double> inout) {
  for (double& v : inout) v = step(v);
}

double SpectrumModel::operator()(double f_hz) const {
  double out = 0.0;
  eval(std::span<const double>(&f_hz, 1), std::span<double>(&out, 1));
  return out;
}

LineListModel::LineListModel(std::vector<kernels::LorentzLine> lines,
                             double scale)
    : lines_(std::move(lines)), scale_(scale) {
  if (scale != 1.0) {
    for (auto& ln : lines_) ln.amp *= scale;
  }
}

void LineListModel::eval(std::span<const double> f_hz,
                         std::span<double> out) const {
  kernels::lorentzian_sum(f_hz, lines_, out, false);
}

void FunctionModel::eval(std::span<const double> f_hz,
                         std::span<double> out) const {
  for (std::size_t i = 0; i < f_hz.size(); ++i) out[i] = fn_(f_hz[i]);
}

TimeSeries synth_fm_response(const SpectrumModel& model, const FMConfig& fm,
                             double duration_s, double rate_hz,
                             double noise_lsd, std::uint64_t seed) {
  fm.validate();
  if (!(rate_hz > 2.0 * fm.f_mod_hz)) {
    throw ConfigError("synth_fm_response: rate must exceed 2 f_mod");
  }
  if (!(duration_s > 0.0)) {
    throw ConfigError("synth_fm_response: duration must be > 0");
  }
  const auto n = static_cast<std::size_t>(std::llround(duration_s * rate_hz));
  TimeSeries ts;
  ts.sample_rate_hz = rate_hz;
  ts.unit = SignalUnit::dimensionless;
  ts.values.resize(n);

  const double dphase = 2.0 * kPi * fm.f_mod_hz / rate_hz;
  // White noise with one-sided LSD l has per-sample sigma = l sqrt(fs/2).
  const double sigma = noise_lsd * std::sqrt(0.5 * rate_hz);
  GaussianRng rng(seed);

  std::vector<double> freq(kBlock);
  for (std::size_t i0 = 0; i0 < n; i0 += kBlock) {
    const std::size_t m = std::min(kBlock, n - i0);
    auto f = std::span<double>(freq).subspan(0, m);
    kernels::sine_series(static_cast<double>(i0) * dphase, dphase, fm.f_dev_hz,
                         f);
    for (double& v : f) v += fm.carrier_center_hz;
    model.eval(f, std::span<double>(ts.values).subspan(i0, m));
    if (sigma > 0.0) {
      for (std::size_t k = 0; k < m; ++k) {
        ts.values[i0 + k] += sigma * rng.normal();
      }
    }
  }
  return ts;
}

TimeSeries demodulate(const TimeSeries& ts, const DemodConfig& d) {
  ts.validate();
  d.validate(ts.sample_rate_hz);

  TimeSeries out = ts;
  const double dphase = 2.0 * kPi * d.reference_freq_hz / ts.sample_rate_hz;
  const double phase0 =
      2.0 * kPi * d.reference_freq_hz * ts.start_time_s + d.reference_phase_rad;
  kernels::mix_sine(phase0, dphase, 2.0, out.values);
  LowpassCascade filter(d.lowpass_cutoff_hz, d.lowpass_order,
                        ts.sample_rate_hz);
  filter.process(out.values);
  return out;
}

namespace {

struct ResolvedTiming {
  std::size_t settle_n;
  std::size_t avg_n;
  double rate;
};

ResolvedTiming resolve_timing(const FMConfig& fm, const DemodConfig& d,
                              const ScanTiming& timing) {
  const double rate = timing.sample_rate_hz;
  if (!(rate > 2.0 * fm.f_mod_hz)) {
    throw ConfigError("ScanTiming: sample rate must exceed 2 f_mod");
  }
  const double tau = 1.0 / (2.0 * kPi * d.lowpass_cutoff_hz);
  double settle = timing.settle_s;
  if (settle <= 0.0) settle = (12.0 + 3.0 * d.lowpass_order) * tau;
  double avg = timing.average_s;
  if (avg <= 0.0) avg = std::max(10.0 / fm.f_mod_hz, 4.0 * tau);
  // Whole modulation periods keep the residual 2f ripple out of the mean.
  const double periods = std::max(1.0, std::ceil(avg * fm.f_mod_hz));
  const auto avg_n =
      static_cast<std::size_t>(std::llround(periods * rate / fm.f_mod_hz));
  const auto settle_n = static_cast<std::size_t>(std::ceil(settle * rate));
  return {settle_n, avg_n, rate};
}

}  // namespace

double demod_point(const SpectrumModel& model, const FMConfig& fm,
                   const DemodConfig& d, const ScanTiming& timing) {
  fm.validate();
  const ResolvedTiming rt = resolve_timing(fm, d, timing);
  d.validate(rt.rate);

  const std::size_t n = rt.settle_n + rt.avg_n;
  const double dphase_mod = 2.0 * kPi * fm.f_mod_hz / rt.rate;
  const double dphase_ref = 2.0 * kPi * d.reference_freq_hz / rt.rate;
  LowpassCascade filter(d.lowpass_cutoff_hz, d.lowpass_order, rt.rate);

  std::vector<double> buf(kBlock);
  std::vector<double> resp(kBlock);
  double acc = 0.0;
  for (std::size_t i0 = 0; i0 < n; i0 += kBlock) {
    const std::size_t m = std::min(kBlock, n - i0);
    auto f = std::span<double>(buf).subspan(0, m);
    kernels::sine_series(static_cast<double>(i0) * dphase_mod, dphase_mod,
                         fm.f_dev_hz, f);
    for (double& v : f) v += fm.carrier_center_hz;
    auto r = std::span<double>(resp).subspan(0, m);
    model.eval(f, r);
    kernels::mix_sine(static_cast<double>(i0) * dphase_ref +
                          d.reference_phase_rad,
                      dphase_ref, 2.0, r);
    filter.process(r);
    // Accumulate only the averaging tail.
    if (i0 + m > rt.settle_n) {
      const std::size_t lo = rt.settle_n > i0 ? rt.settle_n - i0 : 0;
      acc += kernels::sum(r.subspan(lo, m - lo));
    }
  }
  return acc / static_cast<double>(rt.avg_n);
}

odmr::Spectrum dispersive_scan(const SpectrumModel& model, const FMConfig& fm,
                               const DemodConfig& d, const CarrierSweep& sweep,
                               const ScanTiming& timing) {
  if (sweep.points < 2 || !(sweep.stop_hz != sweep.start_hz)) {
    throw ConfigError("dispersive_scan: bad carrier sweep");
  }
  odmr::Spectrum spec;
  const double lo = std::min(sweep.start_hz, sweep.stop_hz);
  const double hi = std::max(sweep.start_hz, sweep.stop_hz);
  const auto n = static_cast<std::size_t>(sweep.points);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  spec.freq_hz.resize(n);
  spec.value.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    spec.freq_hz[i] = lo + static_cast<double>(i) * step;
    FMConfig point = fm;
    point.carrier_center_hz = spec.freq_hz[i];
    spec.value[i] = demod_point(model, point, d, timing);
  }
  spec.axis_label = "carrier_hz";
  spec.validate();
  return spec;
}

DispersiveFit fit_zero_crossing(const odmr::Spectrum& curve, double window_hz,
                                double near_hz) {
  curve.validate();
  if (!(window_hz > 0.0)) {
    throw ConfigError("fit_zero_crossing: window must be > 0");
  }
  const auto& f = curve.freq_hz;
  const auto& v = curve.value;

  // Candidate crossings: sign changes between adjacent samples.
  double best_x = 0.0;
  double best_slope = 0.0;
  bool found = false;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (v[i] == 0.0 || v[i] * v[i + 1] < 0.0) {
      const double slope = (v[i + 1] - v[i]) / (f[i + 1] - f[i]);
      const double x =
          v[i] == 0.0 ? f[i] : f[i] - v[i] * (f[i + 1] - f[i]) / (v[i + 1] - v[i]);
      bool better;
      if (std::isnan(near_hz)) {
        better = !found || std::abs(slope) > std::abs(best_slope);
      } else {
        better = !found || std::abs(x - near_hz) < std::abs(best_x - near_hz);
      }
      if (better) {
        best_x = x;
        best_slope = slope;
        found = true;
      }
    }
  }
  if (!found) {
    throw NumericError("fit_zero_crossing: curve has no zero crossing");
  }

  // Least squares line over the window around the crossing.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double x = f[i] - best_x;
    if (std::abs(x) > window_hz) continue;
    sx += x;
    sy += v[i];
    sxx += x * x;
    sxy += x * v[i];
    ++count;
  }
  if (count < 2) {
    throw NumericError("fit_zero_crossing: fewer than 2 points in window");
  }
  const double denom = static_cast<double>(count) * sxx - sx * sx;
  if (denom == 0.0) {
    throw NumericError("fit_zero_crossing: degenerate abscissa");
  }
  const double a = (static_cast<double>(count) * sxy - sx * sy) / denom;
  const double b = (sy - a * sx) / static_cast<double>(count);
  if (a == 0.0) {
    throw NumericError("fit_zero_crossing: zero slope at crossing");
  }
  DispersiveFit fit;
  fit.alpha_v_per_hz = a;
  fit.f_res_hz = best_x - b / a;
  fit.linear_range_hz = window_hz;
  return fit;
}

double calibrate_phase(const SpectrumModel& model, const FMConfig& fm,
                       const DemodConfig& d, double probe_offset_hz,
                       const ScanTiming& timing) {
  if (!(probe_offset_hz > 0.0)) {
    throw ConfigError("calibrate_phase: probe offset must be > 0");
  }
  DemodConfig di = d;
  di.reference_phase_rad = 0.0;
  DemodConfig dq = d;
  dq.reference_phase_rad = 0.5 * kPi;

  auto at = [&](const DemodConfig& cfg, double offset) {
    FMConfig point = fm;
    point.carrier_center_hz = fm.carrier_center_hz + offset;
    return demod_point(model, point, cfg, timing);
  };
  const double slope_i =
      at(di, probe_offset_hz) - at(di, -probe_offset_hz);
  const double slope_q =
      at(dq, probe_offset_hz) - at(dq, -probe_offset_hz);
  if (slope_i == 0.0 && slope_q == 0.0) {
    throw NumericError("calibrate_phase: no slope at probe points");
  }
  return std::atan2(slope_q, slope_i);
}

}  // namespace nvmag::lockin
