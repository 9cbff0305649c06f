// nvmag: digital twin of an IR-absorption NV magnetometer.
//
// Subcommands map to the stages of the instrument: odmr (CW spectra + fits),
// transient (pulsed-pump contrast), demod (dispersive scan / external
// demodulation), sensitivity (three-scenario LSD pipeline), fit, shotnoise.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "nvmag/analysis.hpp"
#include "nvmag/config.hpp"
#include "nvmag/csv.hpp"
#include "nvmag/fitting.hpp"
#include "nvmag/kernels.hpp"

namespace fs = std::filesystem;
using nvmag::ConfigError;
using nvmag::NumericError;
using nlohmann::json;

namespace {

struct Context {
  nvmag::config::Config cfg;
  std::string hash;
  fs::path out_dir;
};

std::vector<std::string> csv_header(const Context& ctx,
                                    const std::string& columns) {
  return {std::string("nvmag ") + nvmag::kVersion,
          "config fnv1a64=" + ctx.hash, "columns: " + columns};
}

json json_header(const Context& ctx) {
  return json{{"tool_version", nvmag::kVersion}, {"config_hash", ctx.hash}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path.string());
  out << j.dump(2) << "\n";
}

Context make_context(const std::string& config_path,
                     const std::optional<std::uint64_t>& seed,
                     const std::string& out_dir) {
  Context ctx;
  ctx.cfg = config_path.empty() ? nvmag::config::Config{}
                                : nvmag::config::load_file(config_path);
  if (seed) ctx.cfg.seed = *seed;
  if (!out_dir.empty()) ctx.cfg.output_dir = out_dir;
  ctx.hash = nvmag::config::config_hash(ctx.cfg);
  ctx.out_dir = ctx.cfg.output_dir;
  fs::create_directories(ctx.out_dir);
  return ctx;
}

nvmag::lockin::LineListModel build_model(const nvmag::config::Config& cfg) {
  const auto resonances = nvmag::spin::all_resonances(
      nvmag::config::bias_field_of(cfg), nvmag::config::spin_params_of(cfg),
      nvmag::config::constants_of(cfg), cfg.spin.axis_weights);
  const auto lines = nvmag::odmr::scan_domain_lines(
      resonances, nvmag::config::mw_config_of(cfg), cfg.lineshape.fwhm_hz,
      cfg.lineshape.depth_per_line);
  if (lines.empty()) throw NumericError("no driven resonance lines");
  return {nvmag::odmr::to_kernel_lines(lines), cfg.optics.probe_level_v};
}

json fit_to_json(const Context& ctx, const nvmag::fit::FitResult& fit) {
  json j = json_header(ctx);
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["residual_rms"] = fit.residual_rms;
  j["baseline"] = fit.baseline;
  j["baseline_stderr"] = fit.baseline_stderr;
  j["lines"] = json::array();
  for (const auto& ln : fit.lines) {
    j["lines"].push_back({{"center_hz", ln.center_hz},
                          {"fwhm_hz", ln.fwhm_hz},
                          {"depth", ln.depth},
                          {"stderr_center_hz", ln.stderr_center},
                          {"stderr_fwhm_hz", ln.stderr_fwhm},
                          {"stderr_depth", ln.stderr_depth}});
  }
  return j;
}

void write_fit_outputs(const Context& ctx, const nvmag::odmr::Spectrum& spec,
                       const nvmag::fit::FitResult& fit,
                       const std::string& fit_name,
                       const std::string& residuals_name) {
  write_json(ctx.out_dir / fit_name, fit_to_json(ctx, fit));

  std::vector<double> model(spec.freq_hz.size());
  std::vector<double> params;
  // Rebuild the model values from the fitted lines.
  std::vector<nvmag::kernels::LorentzLine> klines;
  for (const auto& ln : fit.lines) {
    klines.push_back(
        nvmag::kernels::make_line(ln.center_hz, ln.fwhm_hz, ln.depth));
  }
  nvmag::kernels::lorentzian_sum(spec.freq_hz, klines, model, false);
  for (double& v : model) v += fit.baseline;
  std::vector<double> residual(model.size());
  for (std::size_t i = 0; i < model.size(); ++i) {
    residual[i] = spec.value[i] - model[i];
  }
  nvmag::io::CsvDoc doc;
  doc.comments = csv_header(ctx, spec.axis_label + ",value,model,residual");
  doc.columns = {spec.axis_label, "value", "model", "residual"};
  doc.data = {spec.freq_hz, spec.value, std::move(model), std::move(residual)};
  nvmag::io::write_csv(ctx.out_dir / residuals_name, doc);
}

int cmd_odmr(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto resonances = nvmag::spin::all_resonances(
      nvmag::config::bias_field_of(cfg), nvmag::config::spin_params_of(cfg),
      nvmag::config::constants_of(cfg), cfg.spin.axis_weights);
  const auto mw = nvmag::config::mw_config_of(cfg);
  const auto spec = nvmag::odmr::synth_cw_spectrum(
      resonances, mw, cfg.lineshape.fwhm_hz, cfg.lineshape.depth_per_line);

  nvmag::io::CsvDoc doc;
  doc.comments = csv_header(ctx, spec.axis_label + ",value");
  doc.columns = {spec.axis_label, "value"};
  doc.data = {spec.freq_hz, spec.value};
  nvmag::io::write_csv(ctx.out_dir / "spectrum.csv", doc);

  const auto fit = nvmag::fit::fit_lorentzians(
      spec, cfg.fit.n_peaks, {}, nvmag::config::fit_options_of(cfg));
  write_fit_outputs(ctx, spec, fit, "fit.json", "residuals.csv");
  return 0;
}

int cmd_transient(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto optics = nvmag::config::optics_of(cfg);
  const auto pump = nvmag::config::pump_spec_of(cfg);
  const double power = cfg.rates.pump_rate_explicit
                           ? cfg.rates.pump_rate_hz / cfg.rates.pump_rate_per_watt_hz
                           : cfg.rates.pump_power_w;

  for (const bool mw_on : {false, true}) {
    const auto rates = nvmag::config::rates_of(cfg, mw_on);
    const auto trace = nvmag::photo::transient(rates, pump,
                                               cfg.transient.duration_s,
                                               cfg.transient.dt_s);
    const auto trans =
        nvmag::photo::transmission_trace(trace, optics, power, pump);
    nvmag::io::CsvDoc doc;
    doc.comments =
        csv_header(ctx, "t_s,g0,g1,e0,e1,s_upper,s_meta,transmission");
    doc.columns = {"t_s", "g0",      "g1",     "e0",
                   "e1",  "s_upper", "s_meta", "transmission"};
    doc.data.assign(8, {});
    for (std::size_t i = 0; i < trace.pops.size(); ++i) {
      const auto& p = trace.pops[i];
      doc.data[0].push_back(trace.t_s[i]);
      doc.data[1].push_back(p.g0);
      doc.data[2].push_back(p.g1);
      doc.data[3].push_back(p.e0);
      doc.data[4].push_back(p.e1);
      doc.data[5].push_back(p.s_upper);
      doc.data[6].push_back(p.s_meta);
      doc.data[7].push_back(trans[i]);
    }
    nvmag::io::write_csv(
        ctx.out_dir / (mw_on ? "transient_mw_on.csv" : "transient_mw_off.csv"),
        doc);
  }

  const auto report = nvmag::photo::contrasts(
      nvmag::config::rates_of(cfg, true), nvmag::config::rates_of(cfg, false),
      optics, pump, cfg.transient.settle_periods);
  json j = json_header(ctx);
  j["c_no_mw"] = report.c_no_mw;
  j["c_mw"] = report.c_mw;
  j["spin_contrast"] = report.spin_contrast;
  j["effective_spin_contrast"] = report.effective_spin_contrast;
  write_json(ctx.out_dir / "contrast_report.json", j);

  if (!cfg.transient.power_sweep_w.empty()) {
    nvmag::io::CsvDoc doc;
    doc.comments =
        csv_header(ctx, "pump_power_w,c_no_mw,c_mw,spin,effective");
    doc.columns = {"pump_power_w", "c_no_mw", "c_mw", "spin", "effective"};
    doc.data.assign(5, {});
    for (double p : cfg.transient.power_sweep_w) {
      auto on = nvmag::config::rates_of(cfg, true);
      auto off = nvmag::config::rates_of(cfg, false);
      on.pump_rate = off.pump_rate = p * cfg.rates.pump_rate_per_watt_hz;
      const auto rep = nvmag::photo::contrasts(on, off, optics, pump,
                                               cfg.transient.settle_periods);
      doc.data[0].push_back(p);
      doc.data[1].push_back(rep.c_no_mw);
      doc.data[2].push_back(rep.c_mw);
      doc.data[3].push_back(rep.spin_contrast);
      doc.data[4].push_back(rep.effective_spin_contrast);
    }
    nvmag::io::write_csv(ctx.out_dir / "contrast_vs_power.csv", doc);
  }
  return 0;
}

int cmd_demod(const Context& ctx, const std::string& input) {
  const auto& cfg = ctx.cfg;
  if (!input.empty()) {
    // Demodulate an externally recorded time series.
    const auto ts = nvmag::io::read_timeseries_csv(input);
    const auto d = nvmag::config::demod_config_of(cfg);
    const auto out = nvmag::lockin::demodulate(ts, d);
    nvmag::io::CsvDoc doc;
    doc.comments = csv_header(ctx, "t_s,value");
    doc.columns = {"t_s", "value"};
    doc.data.assign(2, {});
    for (std::size_t i = 0; i < out.values.size(); ++i) {
      doc.data[0].push_back(out.t(i));
      doc.data[1].push_back(out.values[i]);
    }
    nvmag::io::write_csv(ctx.out_dir / "demodulated.csv", doc);
    return 0;
  }

  const auto model = build_model(cfg);
  const auto timing = nvmag::config::scan_timing_of(cfg);
  auto fm = nvmag::config::fm_config_of(cfg);
  auto d = nvmag::config::demod_config_of(cfg);

  // Carrier sweep: honor explicit bounds, otherwise cover the line list.
  double lo, hi;
  if (cfg.demod_scan.start_hz && cfg.demod_scan.stop_hz) {
    lo = *cfg.demod_scan.start_hz;
    hi = *cfg.demod_scan.stop_hz;
  } else {
    // Cover the physical (positive-frequency) part of the line list.
    bool have = false;
    lo = hi = 0.0;
    for (const auto& ln : model.lines()) {
      if (ln.center <= 0.0) continue;
      if (!have || ln.center < lo) lo = ln.center;
      if (!have || ln.center > hi) hi = ln.center;
      have = true;
    }
    if (!have) throw NumericError("demod: no positive-frequency lines");
    lo -= 3.0 * cfg.lineshape.fwhm_hz;
    hi += 3.0 * cfg.lineshape.fwhm_hz;
  }

  if (!cfg.lia.reference_phase_rad) {
    // Calibrate the phase on the strongest peak inside the sweep.
    double best_f = 0.5 * (lo + hi), best_v = -1.0;
    for (int i = 0; i <= 400; ++i) {
      const double f = lo + (hi - lo) * i / 400.0;
      const double v = model(f);
      if (v > best_v) {
        best_v = v;
        best_f = f;
      }
    }
    fm.carrier_center_hz = best_f;
    d.reference_phase_rad = nvmag::lockin::calibrate_phase(
        model, fm, d, cfg.lineshape.fwhm_hz / 4.0, timing);
  }

  const nvmag::lockin::CarrierSweep sweep{lo, hi, cfg.demod_scan.points};
  const auto curve =
      nvmag::lockin::dispersive_scan(model, fm, d, sweep, timing);

  nvmag::io::CsvDoc doc;
  doc.comments = csv_header(ctx, "carrier_hz,value");
  doc.columns = {"carrier_hz", "value"};
  doc.data = {curve.freq_hz, curve.value};
  nvmag::io::write_csv(ctx.out_dir / "dispersive.csv", doc);

  const double window =
      cfg.demod_scan.fit_window_hz.value_or(cfg.lineshape.fwhm_hz / 8.0);
  const auto fit = nvmag::lockin::fit_zero_crossing(curve, window);
  json j = json_header(ctx);
  j["alpha_v_per_hz"] = fit.alpha_v_per_hz;
  j["f_res_hz"] = fit.f_res_hz;
  j["linear_range_hz"] = fit.linear_range_hz;
  j["reference_phase_rad"] = d.reference_phase_rad;
  write_json(ctx.out_dir / "dispersive_fit.json", j);
  return 0;
}

int cmd_sensitivity(const Context& ctx) {
  const auto scenario = nvmag::config::scenario_of(ctx.cfg);
  const auto result = nvmag::analysis::end_to_end_sensitivity(scenario);

  auto write_report = [&](const nvmag::analysis::SensitivityReport& rep,
                          const std::string& name) {
    nvmag::io::CsvDoc doc;
    const bool smoothed = !rep.lsd_smoothed.empty();
    const std::string cols = smoothed
                                 ? "freq_hz,lsd_tesla_per_sqrthz,lsd_smoothed"
                                 : "freq_hz,lsd_tesla_per_sqrthz";
    doc.comments = csv_header(ctx, cols);
    doc.columns = {"freq_hz", "lsd_tesla_per_sqrthz"};
    doc.data = {rep.freq_hz, rep.lsd};
    if (smoothed) {
      doc.columns.push_back("lsd_smoothed");
      doc.data.push_back(rep.lsd_smoothed);
    }
    nvmag::io::write_csv(ctx.out_dir / name, doc);
  };
  write_report(result.sensitive, "lsd_sensitive.csv");
  write_report(result.insensitive, "lsd_insensitive.csv");
  write_report(result.electronic, "lsd_electronic.csv");

  json j = json_header(ctx);
  j["alpha_v_per_hz"] = result.calibration.alpha_v_per_hz;
  j["f_res_hz"] = result.calibration.f_res_hz;
  j["reference_phase_rad"] = result.reference_phase_rad;
  j["band_hz"] = {scenario.band_lo_hz, scenario.band_hi_hz};
  j["bandwidth_hz"] = result.sensitive.bandwidth_hz;
  j["floor_sensitive_tesla_per_sqrthz"] = result.sensitive.noise_floor;
  j["floor_insensitive_tesla_per_sqrthz"] = result.insensitive.noise_floor;
  j["floor_electronic_tesla_per_sqrthz"] = result.electronic.noise_floor;
  write_json(ctx.out_dir / "sensitivity_summary.json", j);
  return 0;
}

int cmd_fit(const Context& ctx, const std::string& input) {
  if (input.empty()) throw ConfigError("fit: --input spectrum CSV required");
  auto [f, v] = nvmag::io::read_two_column_csv(input);
  nvmag::odmr::Spectrum spec;
  spec.freq_hz = std::move(f);
  spec.value = std::move(v);
  spec.validate();
  const auto fit = nvmag::fit::fit_lorentzians(
      spec, ctx.cfg.fit.n_peaks, {}, nvmag::config::fit_options_of(ctx.cfg));
  write_fit_outputs(ctx, spec, fit, "fit.json", "residuals.csv");
  return 0;
}

int cmd_shotnoise(const Context& ctx) {
  const auto& sn = ctx.cfg.shotnoise;
  const auto geom = nvmag::config::geometry_of(ctx.cfg);
  const auto constants = nvmag::config::constants_of(ctx.cfg);
  const double eta = nvmag::analysis::shot_noise_sensitivity(
      sn.photon_rate_hz, sn.effective_contrast, sn.fwhm_hz, geom, constants,
      sn.cap_tesla);
  json j = json_header(ctx);
  j["inputs"] = {{"photon_rate_hz", sn.photon_rate_hz},
                 {"effective_contrast", sn.effective_contrast},
                 {"fwhm_hz", sn.fwhm_hz},
                 {"theta_deg", ctx.cfg.sensitivity.theta_deg},
                 {"lineshape_prefactor", 4.0 / (3.0 * std::sqrt(3.0))},
                 {"cap_tesla", sn.cap_tesla}};
  j["shot_noise_tesla_per_sqrthz"] = eta;
  write_json(ctx.out_dir / "shotnoise.json", j);
  std::cout << "shot-noise sensitivity: " << eta << " T/sqrt(Hz)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nvmag: NV-diamond IR-absorption magnetometer digital twin"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string input_path;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Override the config RNG seed");
  app.add_option("--out", out_dir, "Output directory");

  auto* odmr = app.add_subcommand("odmr", "CW ODMR spectrum + Lorentzian fit");
  auto* transient =
      app.add_subcommand("transient", "Pulsed-pump dT/T traces and contrasts");
  auto* sensitivity = app.add_subcommand(
      "sensitivity", "Three-scenario LSD sensitivity pipeline");
  auto* demod = app.add_subcommand(
      "demod", "Dispersive FM scan, or demodulate --input CSV");
  demod->add_option("--input", input_path, "Time-series CSV (t_s,value)");
  auto* fitcmd = app.add_subcommand("fit", "Multi-Lorentzian fit of --input");
  fitcmd->add_option("--input", input_path, "Spectrum CSV (freq_hz,value)");
  auto* shot = app.add_subcommand("shotnoise", "CW shot-noise sensitivity");
  for (auto* sub : {odmr, transient, sensitivity, demod, fitcmd, shot}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    const Context ctx = make_context(config_path, seed, out_dir);
    if (odmr->parsed()) return cmd_odmr(ctx);
    if (transient->parsed()) return cmd_transient(ctx);
    if (sensitivity->parsed()) return cmd_sensitivity(ctx);
    if (demod->parsed()) return cmd_demod(ctx, input_path);
    if (fitcmd->parsed()) return cmd_fit(ctx, input_path);
    if (shot->parsed()) return cmd_shotnoise(ctx);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
