#include "nvmag/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "nvmag/kernels.hpp"

namespace nvmag::fit {

void FitOptions::validate() const {
  if (max_iterations < 1) throw ConfigError("FitOptions: max_iterations >= 1");
  if (!(tol_residual_change > 0.0) || !(tol_gradient > 0.0)) {
    throw ConfigError("FitOptions: tolerances must be > 0");
  }
}

namespace detail {

int param_count(int n_lines, bool shared_fwhm) {
  return 1 + n_lines + (shared_fwhm ? 1 : n_lines) + n_lines;
}

namespace {

struct Layout {
  int n;
  bool shared;
  int baseline() const { return 0; }
  int center(int j) const { return 1 + j; }
  int log_fwhm(int j) const { return 1 + n + (shared ? 0 : j); }
  int log_depth(int j) const { return 1 + n + (shared ? 1 : n) + j; }
};

}  // namespace

void eval_model(const std::vector<double>& params, int n_lines,
                bool shared_fwhm, std::span<const double> x,
                std::span<double> out) {
  const Layout lay{n_lines, shared_fwhm};
  std::vector<kernels::LorentzLine> lines;
  lines.reserve(static_cast<std::size_t>(n_lines));
  for (int j = 0; j < n_lines; ++j) {
    lines.push_back(kernels::make_line(
        params[static_cast<std::size_t>(lay.center(j))],
        std::exp(params[static_cast<std::size_t>(lay.log_fwhm(j))]),
        std::exp(params[static_cast<std::size_t>(lay.log_depth(j))])));
  }
  kernels::lorentzian_sum(x, lines, out, false);
  const double b0 = params[static_cast<std::size_t>(lay.baseline())];
  for (double& v : out) v += b0;
}

void eval_jacobian(const std::vector<double>& params, int n_lines,
                   bool shared_fwhm, std::span<const double> x,
                   std::vector<double>& jac) {
  const Layout lay{n_lines, shared_fwhm};
  const int np = param_count(n_lines, shared_fwhm);
  jac.assign(x.size() * static_cast<std::size_t>(np), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double* row = jac.data() + i * static_cast<std::size_t>(np);
    row[lay.baseline()] = 1.0;
    for (int j = 0; j < n_lines; ++j) {
      const double c = params[static_cast<std::size_t>(lay.center(j))];
      const double w = std::exp(params[static_cast<std::size_t>(lay.log_fwhm(j))]);
      const double depth =
          std::exp(params[static_cast<std::size_t>(lay.log_depth(j))]);
      const double h = 0.5 * w;
      const double d = x[i] - c;
      const double denom = d * d + h * h;
      const double lor = h * h / denom;
      // d/dc, d/d(log w) via dh/d(log w) = h, d/d(log depth) = depth * L.
      row[lay.center(j)] += depth * 2.0 * d * h * h / (denom * denom);
      row[lay.log_fwhm(j)] += depth * 2.0 * h * h * d * d / (denom * denom);
      row[lay.log_depth(j)] += depth * lor;
    }
  }
}

}  // namespace detail

namespace {

/// Cholesky solve of (A + lambda diag(A)) x = b; A symmetric positive
/// semi-definite, sizes <= ~20.
bool solve_damped(std::vector<double> a, std::vector<double> b, int n,
                  double lambda, std::vector<double>& x) {
  for (int i = 0; i < n; ++i) {
    a[static_cast<std::size_t>(i * n + i)] *= 1.0 + lambda;
    // Tiny absolute floor keeps all-zero columns (dead parameters) solvable.
    a[static_cast<std::size_t>(i * n + i)] += 1e-300;
  }
  // In-place Cholesky.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[static_cast<std::size_t>(i * n + j)];
      for (int k = 0; k < j; ++k) {
        s -= a[static_cast<std::size_t>(i * n + k)] *
             a[static_cast<std::size_t>(j * n + k)];
      }
      if (i == j) {
        if (!(s > 0.0)) return false;
        a[static_cast<std::size_t>(i * n + i)] = std::sqrt(s);
      } else {
        a[static_cast<std::size_t>(i * n + j)] =
            s / a[static_cast<std::size_t>(j * n + j)];
      }
    }
  }
  // Forward/backward substitution.
  for (int i = 0; i < n; ++i) {
    double s = b[static_cast<std::size_t>(i)];
    for (int k = 0; k < i; ++k) {
      s -= a[static_cast<std::size_t>(i * n + k)] * b[static_cast<std::size_t>(k)];
    }
    b[static_cast<std::size_t>(i)] = s / a[static_cast<std::size_t>(i * n + i)];
  }
  x.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double s = b[static_cast<std::size_t>(i)];
    for (int k = i + 1; k < n; ++k) {
      s -= a[static_cast<std::size_t>(k * n + i)] * x[static_cast<std::size_t>(k)];
    }
    x[static_cast<std::size_t>(i)] = s / a[static_cast<std::size_t>(i * n + i)];
  }
  return true;
}

double ssr_of(const std::vector<double>& r) {
  return kernels::dot(r, r);
}

std::vector<double> residuals(const std::vector<double>& params, int n_lines,
                              bool shared, const odmr::Spectrum& spec) {
  std::vector<double> model(spec.freq_hz.size());
  detail::eval_model(params, n_lines, shared, spec.freq_hz, model);
  for (std::size_t i = 0; i < model.size(); ++i) model[i] -= spec.value[i];
  return model;
}

}  // namespace

InitGuess auto_init(const odmr::Spectrum& spec, int n_peaks) {
  spec.validate();
  if (n_peaks < 1) throw ConfigError("auto_init: n_peaks must be >= 1");
  const auto& y = spec.value;
  const auto& x = spec.freq_hz;
  const std::size_t n = y.size();

  // Light moving-average smoothing before peak picking.
  const std::size_t half = std::max<std::size_t>(1, n / 200);
  std::vector<double> smooth(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i > half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    double acc = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) acc += y[k];
    smooth[i] = acc / static_cast<double>(hi - lo + 1);
  }

  const double base = *std::min_element(smooth.begin(), smooth.end());
  const double top = *std::max_element(smooth.begin(), smooth.end());
  const double prominence = 0.05 * (top - base);

  struct Peak {
    std::size_t idx;
    double height;
  };
  std::vector<Peak> peaks;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (smooth[i] > smooth[i - 1] && smooth[i] >= smooth[i + 1] &&
        smooth[i] - base > prominence) {
      peaks.push_back({i, smooth[i]});
    }
  }
  if (peaks.empty()) {
    std::ostringstream os;
    os << "auto_init: found 0 peaks, need " << n_peaks;
    throw NumericError(os.str());
  }
  std::sort(peaks.begin(), peaks.end(),
            [](const Peak& a, const Peak& b) { return a.height > b.height; });
  if (peaks.size() > static_cast<std::size_t>(n_peaks)) {
    peaks.resize(static_cast<std::size_t>(n_peaks));
  }

  auto width_at = [&](std::size_t idx) {
    const double halfdepth = base + 0.5 * (smooth[idx] - base);
    std::size_t l = idx, r = idx;
    while (l > 0 && smooth[l] > halfdepth) --l;
    while (r + 1 < n && smooth[r] > halfdepth) ++r;
    const double w = x[r] - x[l];
    const double dx = x[1] - x[0];
    return std::max(w, 2.0 * dx);
  };

  InitGuess guess;
  guess.baseline = base;
  for (const Peak& p : peaks) {
    guess.lines.push_back(
        {x[p.idx], width_at(p.idx), std::max(smooth[p.idx] - base, 1e-12)});
  }
  // Merged-peak fallback: split the tallest seeds symmetrically until the
  // requested count is reached.
  std::size_t next_split = 0;
  while (guess.lines.size() < static_cast<std::size_t>(n_peaks)) {
    const auto src = guess.lines[next_split % guess.lines.size()];
    odmr::LineShape a = src, b = src;
    a.center_hz -= 0.25 * src.fwhm_hz;
    b.center_hz += 0.25 * src.fwhm_hz;
    a.depth = b.depth = 0.5 * src.depth;
    guess.lines[next_split % guess.lines.size()] = a;
    guess.lines.push_back(b);
    ++next_split;
  }
  std::sort(guess.lines.begin(), guess.lines.end(),
            [](const odmr::LineShape& a, const odmr::LineShape& b) {
              return a.center_hz < b.center_hz;
            });
  return guess;
}

FitResult fit_lorentzians(const odmr::Spectrum& spec, int n_peaks,
                          const std::optional<InitGuess>& init,
                          const FitOptions& options) {
  spec.validate();
  options.validate();
  if (n_peaks < 1) throw ConfigError("fit_lorentzians: n_peaks must be >= 1");
  const auto n = spec.freq_hz.size();
  if (n < static_cast<std::size_t>(3 * n_peaks + 1)) {
    throw ConfigError("fit_lorentzians: need at least 3*n_peaks + 1 samples");
  }

  const InitGuess guess = init ? *init : auto_init(spec, n_peaks);
  if (guess.lines.size() != static_cast<std::size_t>(n_peaks)) {
    throw ConfigError("fit_lorentzians: init size != n_peaks");
  }

  const bool shared = options.shared_fwhm;
  const int np = detail::param_count(n_peaks, shared);
  std::vector<double> params(static_cast<std::size_t>(np), 0.0);
  // Layout mirror (see detail::eval_model).
  auto idx_center = [&](int j) { return 1 + j; };
  auto idx_logw = [&](int j) { return 1 + n_peaks + (shared ? 0 : j); };
  auto idx_logd = [&](int j) {
    return 1 + n_peaks + (shared ? 1 : n_peaks) + j;
  };
  params[0] = guess.baseline;
  double mean_w = 0.0;
  for (int j = 0; j < n_peaks; ++j) {
    const auto& ln = guess.lines[static_cast<std::size_t>(j)];
    params[static_cast<std::size_t>(idx_center(j))] = ln.center_hz;
    mean_w += ln.fwhm_hz;
    if (!shared) {
      params[static_cast<std::size_t>(idx_logw(j))] = std::log(ln.fwhm_hz);
    }
    params[static_cast<std::size_t>(idx_logd(j))] =
        std::log(std::max(ln.depth, 1e-12));
  }
  if (shared) {
    params[static_cast<std::size_t>(idx_logw(0))] =
        std::log(mean_w / n_peaks);
  }

  std::vector<double> r = residuals(params, n_peaks, shared, spec);
  double ssr = ssr_of(r);
  double lambda = 1e-3;
  std::vector<double> jac;
  std::vector<double> jtj(static_cast<std::size_t>(np * np));
  std::vector<double> jtr(static_cast<std::size_t>(np));
  std::vector<double> delta;

  FitResult result;
  int iter = 0;
  double grad_norm = 0.0;
  bool converged = false;
  for (; iter < options.max_iterations; ++iter) {
    detail::eval_jacobian(params, n_peaks, shared, spec.freq_hz, jac);
    std::fill(jtj.begin(), jtj.end(), 0.0);
    std::fill(jtr.begin(), jtr.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = jac.data() + i * static_cast<std::size_t>(np);
      for (int a = 0; a < np; ++a) {
        jtr[static_cast<std::size_t>(a)] += row[a] * r[i];
        for (int b = a; b < np; ++b) {
          jtj[static_cast<std::size_t>(a * np + b)] += row[a] * row[b];
        }
      }
    }
    for (int a = 0; a < np; ++a) {
      for (int b = 0; b < a; ++b) {
        jtj[static_cast<std::size_t>(a * np + b)] =
            jtj[static_cast<std::size_t>(b * np + a)];
      }
    }
    grad_norm = 0.0;
    for (double g : jtr) grad_norm = std::max(grad_norm, std::abs(g));
    if (grad_norm < options.tol_gradient) {
      converged = true;
      break;
    }

    bool stepped = false;
    for (int attempt = 0; attempt < 32; ++attempt) {
      std::vector<double> neg_jtr(jtr.size());
      for (std::size_t k = 0; k < jtr.size(); ++k) neg_jtr[k] = -jtr[k];
      if (!solve_damped(jtj, neg_jtr, np, lambda, delta)) {
        lambda *= 10.0;
        continue;
      }
      std::vector<double> trial = params;
      for (int k = 0; k < np; ++k) {
        trial[static_cast<std::size_t>(k)] += delta[static_cast<std::size_t>(k)];
      }
      // Keep log parameters in a sane range to avoid overflow.
      for (int j = 0; j < n_peaks; ++j) {
        auto clamp_log = [](double& v) { v = std::clamp(v, -700.0, 700.0); };
        clamp_log(trial[static_cast<std::size_t>(idx_logw(j))]);
        clamp_log(trial[static_cast<std::size_t>(idx_logd(j))]);
      }
      std::vector<double> r_trial = residuals(trial, n_peaks, shared, spec);
      const double ssr_trial = ssr_of(r_trial);
      if (ssr_trial < ssr) {
        const double rel_change = (ssr - ssr_trial) / std::max(ssr, 1e-300);
        params = std::move(trial);
        r = std::move(r_trial);
        ssr = ssr_trial;
        lambda = std::max(lambda * 0.25, 1e-14);
        stepped = true;
        if (rel_change < options.tol_residual_change) converged = true;
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e14) break;
    }
    if (converged || !stepped) {
      if (!stepped && grad_norm < 1e3 * options.tol_gradient) converged = true;
      break;
    }
  }

  // Covariance from the undamped normal matrix at the solution.
  std::vector<double> stderr_p(static_cast<std::size_t>(np), 0.0);
  {
    detail::eval_jacobian(params, n_peaks, shared, spec.freq_hz, jac);
    std::fill(jtj.begin(), jtj.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = jac.data() + i * static_cast<std::size_t>(np);
      for (int a = 0; a < np; ++a) {
        for (int b = a; b < np; ++b) {
          jtj[static_cast<std::size_t>(a * np + b)] += row[a] * row[b];
        }
      }
    }
    for (int a = 0; a < np; ++a) {
      for (int b = 0; b < a; ++b) {
        jtj[static_cast<std::size_t>(a * np + b)] =
            jtj[static_cast<std::size_t>(b * np + a)];
      }
    }
    const double dof =
        std::max(1.0, static_cast<double>(n) - static_cast<double>(np));
    const double sigma2 = ssr / dof;
    // Invert via np solves against unit vectors.
    for (int k = 0; k < np; ++k) {
      std::vector<double> e(static_cast<std::size_t>(np), 0.0);
      e[static_cast<std::size_t>(k)] = 1.0;
      std::vector<double> col;
      if (solve_damped(jtj, e, np, 0.0, col)) {
        const double var = sigma2 * col[static_cast<std::size_t>(k)];
        stderr_p[static_cast<std::size_t>(k)] = var > 0.0 ? std::sqrt(var) : 0.0;
      }
    }
  }

  result.baseline = params[0];
  result.baseline_stderr = stderr_p[0];
  for (int j = 0; j < n_peaks; ++j) {
    FittedLine ln;
    ln.center_hz = params[static_cast<std::size_t>(idx_center(j))];
    ln.fwhm_hz = std::exp(params[static_cast<std::size_t>(idx_logw(j))]);
    ln.depth = std::exp(params[static_cast<std::size_t>(idx_logd(j))]);
    ln.stderr_center = stderr_p[static_cast<std::size_t>(idx_center(j))];
    ln.stderr_fwhm =
        ln.fwhm_hz * stderr_p[static_cast<std::size_t>(idx_logw(j))];
    ln.stderr_depth =
        ln.depth * stderr_p[static_cast<std::size_t>(idx_logd(j))];
    result.lines.push_back(ln);
  }
  std::sort(result.lines.begin(), result.lines.end(),
            [](const FittedLine& a, const FittedLine& b) {
              return a.center_hz < b.center_hz;
            });
  result.residual_rms = std::sqrt(ssr / static_cast<double>(n));
  result.gradient_norm = grad_norm;
  result.converged = converged;
  result.iterations = iter;
  return result;
}

}  // namespace nvmag::fit
