#pragma once

#include <string>
#include <vector>

#include "nvmag/kernels.hpp"
#include "nvmag/spin_model.hpp"

namespace nvmag::odmr {

/// Two-generator MW drive: SG1 carrier (fixed at the ZFS in the mixed
/// scheme), SG2 a three-tone waveform mixed onto it, producing carrier +-
/// tone components. The scan sweeps either SG1 directly or the SG2 tone-set
/// center.
struct MWConfig {
  enum class ScanTarget { sg1, sg2_center };

  double f_sg1_hz = 2.870e9;
  std::vector<double> f_sg2_tones_hz;  // absolute tone frequencies
  bool mixing_enabled = false;
  struct Scan {
    double start_hz = 0.0;
    double stop_hz = 0.0;
    int points = 2;
  } scan;
  ScanTarget scan_target = ScanTarget::sg1;

  void validate() const;
  /// Mean of the SG2 tones; the scanned variable in sg2_center mode.
  double sg2_center() const;
};

struct LineShape {
  double center_hz = 0.0;
  double fwhm_hz = 0.0;
  double depth = 0.0;

  void validate() const;
};

/// MW components applied to the sample: {f_sg1 +- tone} when mixing,
/// otherwise just f_sg1.
std::vector<double> mw_tones(const MWConfig& m);

/// depth * (w/2)^2 / ((f-c)^2 + (w/2)^2); value at center = depth.
double lorentzian(double f_hz, const LineShape& line);

struct Spectrum {
  std::vector<double> freq_hz;  // strictly increasing
  std::vector<double> value;
  std::string axis_label = "frequency_hz";

  void validate() const;
};

/// Resonance lines mapped into the scan coordinate: for each (MW component,
/// hyperfine line) pair, the scan value at which they coincide, carrying the
/// axis weight and per-line relative amplitude.
std::vector<LineShape> scan_domain_lines(const spin::ResonanceSet& resonances,
                                         const MWConfig& m, double fwhm_hz,
                                         double depth_per_line);

/// CW absorption-ODMR spectrum in effective-contrast units (positive peaks:
/// magnitude of the on-resonance transmission dip). Dips from overlapping
/// (component, line) pairs add linearly, valid at the few-percent contrast
/// scale of this instrument.
Spectrum synth_cw_spectrum(const spin::ResonanceSet& resonances,
                           const MWConfig& m, double fwhm_hz,
                           double depth_per_line);

/// Evaluates a prepared line list on an arbitrary frequency grid.
void eval_lines(const std::vector<kernels::LorentzLine>& lines,
                std::span<const double> f, std::span<double> out);

std::vector<kernels::LorentzLine> to_kernel_lines(
    const std::vector<LineShape>& lines);

}  // namespace nvmag::odmr
