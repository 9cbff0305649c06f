#pragma once

#include <optional>
#include <vector>

#include "nvmag/odmr.hpp"

namespace nvmag::fit {

struct FitOptions {
  int max_iterations = 200;
  double tol_residual_change = 1e-10;  // relative SSR change
  double tol_gradient = 1e-8;
  bool shared_fwhm = false;  // one linewidth across all lines

  void validate() const;
};

struct FittedLine {
  double center_hz = 0.0;
  double fwhm_hz = 0.0;
  double depth = 0.0;
  double stderr_center = 0.0;
  double stderr_fwhm = 0.0;
  double stderr_depth = 0.0;
};

struct FitResult {
  std::vector<FittedLine> lines;  // sorted by center frequency
  double baseline = 0.0;
  double baseline_stderr = 0.0;
  double residual_rms = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct InitGuess {
  std::vector<odmr::LineShape> lines;
  double baseline = 0.0;
};

/// Peak picking on a lightly smoothed copy: local maxima ranked by height,
/// widths from half-depth crossings. If fewer extrema than n_peaks are found
/// the tallest ones are split symmetrically into two seeds; zero extrema is
/// an error reporting the count.
InitGuess auto_init(const odmr::Spectrum& spec, int n_peaks);

/// Damped least squares (Levenberg-Marquardt) over a sum of Lorentzians plus
/// a constant baseline. Width and depth positivity is enforced by fitting
/// their logarithms. Non-convergence returns best-so-far with converged =
/// false.
FitResult fit_lorentzians(const odmr::Spectrum& spec, int n_peaks,
                          const std::optional<InitGuess>& init = {},
                          const FitOptions& options = {});

namespace detail {

// Parameter vector layout: [baseline, center_0.., log_fwhm (1 or n), log_depth_0..]
int param_count(int n_lines, bool shared_fwhm);
void eval_model(const std::vector<double>& params, int n_lines,
                bool shared_fwhm, std::span<const double> x,
                std::span<double> out);
/// Row-major Jacobian, one row per sample.
void eval_jacobian(const std::vector<double>& params, int n_lines,
                   bool shared_fwhm, std::span<const double> x,
                   std::vector<double>& jac);

}  // namespace detail

}  // namespace nvmag::fit
