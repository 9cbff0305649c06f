#include "nvmag/odmr.hpp"

#include <algorithm>
#include <cmath>

namespace nvmag::odmr {

void MWConfig::validate() const {
  if (mixing_enabled) {
    if (f_sg2_tones_hz.empty()) {
      throw ConfigError("MWConfig: mixing enabled but tone list is empty");
    }
    for (double t : f_sg2_tones_hz) {
      if (!(t > 0.0)) throw ConfigError("MWConfig: tones must be > 0");
    }
    auto sorted = f_sg2_tones_hz;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ConfigError("MWConfig: tones must be distinct");
    }
  }
  if (scan.points < 2) throw ConfigError("MWConfig: scan.points must be >= 2");
  if (!(scan.stop_hz != scan.start_hz)) {
    throw ConfigError("MWConfig: scan range is empty");
  }
  if (scan_target == ScanTarget::sg2_center && !mixing_enabled) {
    throw ConfigError("MWConfig: sg2_center scan requires mixing_enabled");
  }
}

double MWConfig::sg2_center() const {
  if (f_sg2_tones_hz.empty()) {
    throw ConfigError("MWConfig: no SG2 tones configured");
  }
  double acc = 0.0;
  for (double t : f_sg2_tones_hz) acc += t;
  return acc / static_cast<double>(f_sg2_tones_hz.size());
}

void LineShape::validate() const {
  if (!(fwhm_hz > 0.0)) throw ConfigError("LineShape: fwhm must be > 0");
  if (!(depth >= 0.0 && depth < 1.0)) {
    throw ConfigError("LineShape: depth must be in [0,1)");
  }
}

std::vector<double> mw_tones(const MWConfig& m) {
  if (!m.mixing_enabled) return {m.f_sg1_hz};
  if (m.f_sg2_tones_hz.empty()) {
    throw ConfigError("mw_tones: empty tone list");
  }
  std::vector<double> out;
  out.reserve(2 * m.f_sg2_tones_hz.size());
  for (double t : m.f_sg2_tones_hz) {
    out.push_back(m.f_sg1_hz - t);
    out.push_back(m.f_sg1_hz + t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double lorentzian(double f_hz, const LineShape& line) {
  line.validate();
  const double hw = 0.5 * line.fwhm_hz;
  const double d = f_hz - line.center_hz;
  return line.depth * hw * hw / (d * d + hw * hw);
}

void Spectrum::validate() const {
  if (freq_hz.size() != value.size() || freq_hz.size() < 2) {
    throw ConfigError("Spectrum: axis/value size mismatch or too short");
  }
  for (std::size_t i = 1; i < freq_hz.size(); ++i) {
    if (!(freq_hz[i] > freq_hz[i - 1])) {
      throw ConfigError("Spectrum: axis must be strictly increasing");
    }
  }
  for (double v : value) {
    if (!std::isfinite(v)) throw ConfigError("Spectrum: non-finite value");
  }
}

std::vector<LineShape> scan_domain_lines(const spin::ResonanceSet& resonances,
                                         const MWConfig& m, double fwhm_hz,
                                         double depth_per_line) {
  if (!(fwhm_hz > 0.0)) throw ConfigError("scan_domain_lines: fwhm must be > 0");

  // Collect the physical resonance lines with their weights.
  struct Line {
    double f_hz;
    double amp;
  };
  std::vector<Line> phys;
  for (const auto& ax : resonances.axes) {
    if (ax.weight == 0.0) continue;
    for (const auto* tr : {&ax.minus, &ax.plus}) {
      for (double f : tr->lines_hz) {
        phys.push_back({f, ax.weight * tr->amplitude_each});
      }
    }
  }

  std::vector<LineShape> out;
  if (!m.mixing_enabled) {
    // Single generator: the swept SG1 tone itself crosses each line.
    for (const Line& ln : phys) {
      out.push_back({ln.f_hz, fwhm_hz, depth_per_line * ln.amp});
    }
  } else if (m.scan_target == MWConfig::ScanTarget::sg2_center) {
    // Components sit at f_sg1 +- (c + rel_k); coincidence with a line L gives
    // a peak at c = +-(L - f_sg1) - rel_k.
    const double center = m.sg2_center();
    for (double tone : m.f_sg2_tones_hz) {
      const double rel = tone - center;
      for (const Line& ln : phys) {
        out.push_back(
            {(ln.f_hz - m.f_sg1_hz) - rel, fwhm_hz, depth_per_line * ln.amp});
        out.push_back(
            {(m.f_sg1_hz - ln.f_hz) - rel, fwhm_hz, depth_per_line * ln.amp});
      }
    }
  } else {
    // SG1 swept with the mixer in line: both sidebands of every tone sweep.
    for (double tone : m.f_sg2_tones_hz) {
      for (const Line& ln : phys) {
        out.push_back({ln.f_hz - tone, fwhm_hz, depth_per_line * ln.amp});
        out.push_back({ln.f_hz + tone, fwhm_hz, depth_per_line * ln.amp});
      }
    }
  }
  return out;
}

std::vector<kernels::LorentzLine> to_kernel_lines(
    const std::vector<LineShape>& lines) {
  std::vector<kernels::LorentzLine> out;
  out.reserve(lines.size());
  for (const LineShape& ln : lines) {
    out.push_back(kernels::make_line(ln.center_hz, ln.fwhm_hz, ln.depth));
  }
  return out;
}

void eval_lines(const std::vector<kernels::LorentzLine>& lines,
                std::span<const double> f, std::span<double> out) {
  kernels::lorentzian_sum(f, lines, out, false);
}

Spectrum synth_cw_spectrum(const spin::ResonanceSet& resonances,
                           const MWConfig& m, double fwhm_hz,
                           double depth_per_line) {
  m.validate();
  const auto lines =
      to_kernel_lines(scan_domain_lines(resonances, m, fwhm_hz, depth_per_line));

  Spectrum spec;
  const double lo = std::min(m.scan.start_hz, m.scan.stop_hz);
  const double hi = std::max(m.scan.start_hz, m.scan.stop_hz);
  const auto n = static_cast<std::size_t>(m.scan.points);
  spec.freq_hz.resize(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    spec.freq_hz[i] = lo + static_cast<double>(i) * step;
  }
  spec.value.resize(n);
  eval_lines(lines, spec.freq_hz, spec.value);
  spec.axis_label = (m.mixing_enabled &&
                     m.scan_target == MWConfig::ScanTarget::sg2_center)
                        ? "sg2_center_hz"
                        : "frequency_hz";
  spec.validate();
  return spec;
}

}  // namespace nvmag::odmr
