#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "nvmag/common.hpp"
#include "nvmag/kernels.hpp"
#include "nvmag/odmr.hpp"

namespace nvmag::lockin {

enum class SignalUnit { dimensionless, volts, tesla, hertz };

const char* unit_name(SignalUnit u);

struct TimeSeries {
  double sample_rate_hz = 0.0;
  double start_time_s = 0.0;
  SignalUnit unit = SignalUnit::dimensionless;
  std::vector<double> values;

  double t(std::size_t i) const {
    return start_time_s + static_cast<double>(i) / sample_rate_hz;
  }
  double duration_s() const {
    return static_cast<double>(values.size()) / sample_rate_hz;
  }
  void validate() const;
};

/// Sinusoidal FM of the MW carrier: f(t) = center + f_dev sin(2 pi f_mod t).
struct FMConfig {
  double f_mod_hz = 5.6e3;
  double f_dev_hz = 330e3;
  double carrier_center_hz = 0.0;

  void validate() const;
};

double fm_frequency(double t_s, const FMConfig& fm);

/// LIA emulation: mix with 2 sin(2 pi f_ref t + phase), then a cascade of
/// identical first-order lowpass stages. cutoff is the -3 dB point of one
/// stage (time constant 1/(2 pi cutoff)); the cascade corner sits below it.
struct DemodConfig {
  double reference_freq_hz = 5.6e3;
  double reference_phase_rad = 0.0;
  double lowpass_cutoff_hz = 1e3;
  int lowpass_order = 4;

  void validate(double sample_rate_hz) const;
};

class LowpassCascade {
 public:
  LowpassCascade(double cutoff_hz, int order, double sample_rate_hz);
  void reset(double value = 0.0);
  double step(double x);
  void process(std::span<double> inout);

 private:
  double alpha_ = 1.0;
  std::vector<double> state_;
};

/// Frequency-domain response sampled by the FM chain. LineListModel is the
/// fast path (kernel-evaluated sum of Lorentzians); FunctionModel wraps any
/// callable.
class SpectrumModel {
 public:
  virtual ~SpectrumModel() = default;
  virtual void eval(std::span<const double> f_hz, std::span<double> out) const = 0;
  double operator()(double f_hz) const;
};

class LineListModel final : public SpectrumModel {
 public:
  LineListModel(std::vector<kernels::LorentzLine> lines, double scale = 1.0);
  void eval(std::span<const double> f_hz, std::span<double> out) const override;
  const std::vector<kernels::LorentzLine>& lines() const { return lines_; }
  double scale() const { return scale_; }

 private:
  std::vector<kernels::LorentzLine> lines_;
  double scale_;
};

class FunctionModel final : public SpectrumModel {
 public:
  explicit FunctionModel(std::function<double(double)> fn)
      : fn_(std::move(fn)) {}
  void eval(std::span<const double> f_hz, std::span<double> out) const override;

 private:
  std::function<double(double)> fn_;
};

/// Samples model(fm_frequency(t)) at the given rate, adding white Gaussian
/// noise of one-sided spectral density noise_lsd (signal units / sqrt(Hz)).
/// Deterministic for a fixed seed.
TimeSeries synth_fm_response(const SpectrumModel& model, const FMConfig& fm,
                             double duration_s, double rate_hz,
                             double noise_lsd = 0.0, std::uint64_t seed = 0);

/// output = lowpass(2 * input * sin(2 pi f_ref t + phase)).
TimeSeries demodulate(const TimeSeries& ts, const DemodConfig& d);

struct CarrierSweep {
  double start_hz = 0.0;
  double stop_hz = 0.0;
  int points = 2;
};

struct ScanTiming {
  double sample_rate_hz = 1e6;
  double settle_s = 0.0;  // 0 = auto from the filter time constant
  double average_s = 0.0; // 0 = auto, whole modulation periods
};

/// Settled demodulator output at one carrier value.
double demod_point(const SpectrumModel& model, const FMConfig& fm,
                   const DemodConfig& d, const ScanTiming& timing = {});

/// Dispersive curve: settled LIA output versus carrier. Odd-symmetric about
/// each isolated line center, zero at the center.
odmr::Spectrum dispersive_scan(const SpectrumModel& model, const FMConfig& fm,
                               const DemodConfig& d, const CarrierSweep& sweep,
                               const ScanTiming& timing = {});

struct DispersiveFit {
  double alpha_v_per_hz = 0.0;  // zero-crossing slope
  double f_res_hz = 0.0;        // zero-crossing location
  double linear_range_hz = 0.0; // half-width of the fitted window
};

/// Least-squares line through the points within +-window_hz of the steepest
/// zero crossing (or the one nearest near_hz if given).
DispersiveFit fit_zero_crossing(const odmr::Spectrum& curve, double window_hz,
                                double near_hz =
                                    std::numeric_limits<double>::quiet_NaN());

/// Reference phase that maximizes the dispersive slope at the carrier
/// center, from the I/Q slopes at +-probe_offset_hz. Emulates the LIA phase
/// adjustment step.
double calibrate_phase(const SpectrumModel& model, const FMConfig& fm,
                       const DemodConfig& d, double probe_offset_hz,
                       const ScanTiming& timing = {});

}  // namespace nvmag::lockin
