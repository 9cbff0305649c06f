#include "nvmag/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "nvmag/csv.hpp"

namespace nvmag::config {

using nlohmann::json;

namespace {

/// Wraps a JSON object and tracks key consumption; leftover keys are
/// reported with their full path.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw ConfigError("config: " + path_ + " must be an object");
    }
  }

  bool has(const std::string& key) {
    return j_.contains(key);
  }

  const json* take(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    used_.insert(key);
    return &j_.at(key);
  }

  double number(const std::string& key, double fallback) {
    const json* v = take(key);
    if (v == nullptr) return fallback;
    if (!v->is_number()) throw bad_type(key, "a number");
    return v->get<double>();
  }

  std::optional<double> number_opt(const std::string& key) {
    const json* v = take(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_number()) throw bad_type(key, "a number");
    return v->get<double>();
  }

  int integer(const std::string& key, int fallback) {
    const json* v = take(key);
    if (v == nullptr) return fallback;
    if (!v->is_number_integer()) throw bad_type(key, "an integer");
    return v->get<int>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = take(key);
    if (v == nullptr) return fallback;
    if (!v->is_boolean()) throw bad_type(key, "a boolean");
    return v->get<bool>();
  }

  std::string text(const std::string& key, std::string fallback) {
    const json* v = take(key);
    if (v == nullptr) return fallback;
    if (!v->is_string()) throw bad_type(key, "a string");
    return v->get<std::string>();
  }

  std::vector<double> numbers(const std::string& key,
                              std::vector<double> fallback) {
    const json* v = take(key);
    if (v == nullptr) return fallback;
    if (!v->is_array()) throw bad_type(key, "an array of numbers");
    std::vector<double> out;
    for (const auto& e : *v) {
      if (!e.is_number()) throw bad_type(key, "an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::optional<Section> object(const std::string& key) {
    const json* v = take(key);
    if (v == nullptr) return std::nullopt;
    return Section(*v, path_ + key + ".");
  }

  void finish() {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) {
        throw ConfigError("config: unknown key '" + path_ + it.key() + "'");
      }
    }
  }

  const std::string& path() const { return path_; }

 private:
  ConfigError bad_type(const std::string& key, const char* what) {
    return ConfigError("config: '" + path_ + key + "' must be " + what);
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

double rate_or_lifetime(Section& s, const std::string& stem, double fallback) {
  const std::string rate_key = stem + "_rate_hz";
  const std::string life_key = stem + "_lifetime_s";
  const bool has_rate = s.has(rate_key);
  const bool has_life = s.has(life_key);
  if (has_rate && has_life) {
    throw ConfigError("config: '" + s.path() + stem +
                      "': give _rate_hz or _lifetime_s, not both");
  }
  if (has_life) {
    const double life = s.number(life_key, 0.0);
    if (!(life > 0.0)) {
      throw ConfigError("config: '" + s.path() + life_key + "' must be > 0");
    }
    return 1.0 / life;
  }
  return s.number(rate_key, fallback);
}

}  // namespace

Config parse(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }
  Config c;
  Section root(j, "");

  if (const json* v = root.take("seed")) {
    if (!v->is_number_unsigned() && !v->is_number_integer()) {
      throw ConfigError("config: 'seed' must be an integer");
    }
    c.seed = v->get<std::uint64_t>();
  }
  c.output_dir = root.text("output_dir", c.output_dir);

  if (auto s = root.object("spin")) {
    c.spin.zfs_hz = s->number("zfs_hz", c.spin.zfs_hz);
    c.spin.hyperfine_hz = s->number("hyperfine_hz", c.spin.hyperfine_hz);
    c.spin.n_hyperfine = s->integer("n_hyperfine", c.spin.n_hyperfine);
    c.spin.g_factor = s->number("g_factor", c.spin.g_factor);
    c.spin.bias_field_tesla =
        s->number("bias_field_tesla", c.spin.bias_field_tesla);
    auto dir = s->numbers("bias_direction_miller",
                          {c.spin.bias_direction_miller.begin(),
                           c.spin.bias_direction_miller.end()});
    if (dir.size() != 3) {
      throw ConfigError("config: 'spin.bias_direction_miller' needs 3 entries");
    }
    std::copy(dir.begin(), dir.end(), c.spin.bias_direction_miller.begin());
    auto w = s->numbers("axis_weights", {c.spin.axis_weights.begin(),
                                         c.spin.axis_weights.end()});
    if (w.size() != 4) {
      throw ConfigError("config: 'spin.axis_weights' needs 4 entries");
    }
    std::copy(w.begin(), w.end(), c.spin.axis_weights.begin());
    s->finish();
  }

  if (auto s = root.object("rates")) {
    if (s->has("pump_rate_hz") && s->has("pump_power_w")) {
      throw ConfigError(
          "config: 'rates': give pump_rate_hz or pump_power_w, not both");
    }
    if (s->has("pump_rate_hz")) {
      c.rates.pump_rate_hz = s->number("pump_rate_hz", c.rates.pump_rate_hz);
      c.rates.pump_rate_explicit = true;
    }
    c.rates.pump_power_w = s->number("pump_power_w", c.rates.pump_power_w);
    c.rates.pump_rate_per_watt_hz =
        s->number("pump_rate_per_watt_hz", c.rates.pump_rate_per_watt_hz);
    c.rates.radiative_rate_hz =
        rate_or_lifetime(*s, "radiative", c.rates.radiative_rate_hz);
    c.rates.isc0_rate_hz = rate_or_lifetime(*s, "isc0", c.rates.isc0_rate_hz);
    c.rates.isc1_rate_hz = rate_or_lifetime(*s, "isc1", c.rates.isc1_rate_hz);
    c.rates.singlet_relax_rate_hz =
        rate_or_lifetime(*s, "singlet_relax", c.rates.singlet_relax_rate_hz);
    c.rates.metastable_rate_hz =
        rate_or_lifetime(*s, "metastable", c.rates.metastable_rate_hz);
    c.rates.mw_mixing_rate_hz =
        s->number("mw_mixing_rate_hz", c.rates.mw_mixing_rate_hz);
    s->finish();
  }

  if (auto s = root.object("optics")) {
    c.optics.nv_areal_absorbance =
        s->number("nv_areal_absorbance", c.optics.nv_areal_absorbance);
    c.optics.background_bleach_depth =
        s->number("background_bleach_depth", c.optics.background_bleach_depth);
    c.optics.background_bleach_sat_power_w = s->number(
        "background_bleach_sat_power_w", c.optics.background_bleach_sat_power_w);
    c.optics.background_time_const_s =
        s->number("background_time_const_s", c.optics.background_time_const_s);
    c.optics.probe_level_v = s->number("probe_level_v", c.optics.probe_level_v);
    s->finish();
  }

  if (auto s = root.object("transient")) {
    c.transient.frequency_hz = s->number("frequency_hz", c.transient.frequency_hz);
    c.transient.duty = s->number("duty", c.transient.duty);
    c.transient.duration_s = s->number("duration_s", c.transient.duration_s);
    c.transient.dt_s = s->number("dt_s", c.transient.dt_s);
    c.transient.settle_periods =
        s->integer("settle_periods", c.transient.settle_periods);
    c.transient.power_sweep_w = s->numbers("power_sweep_w", {});
    s->finish();
  }

  if (auto s = root.object("mw")) {
    c.mw.f_sg1_hz = s->number("f_sg1_hz", c.mw.f_sg1_hz);
    c.mw.sg2_tones_hz = s->numbers("sg2_tones_hz", c.mw.sg2_tones_hz);
    c.mw.mixing_enabled = s->boolean("mixing_enabled", c.mw.mixing_enabled);
    c.mw.scan_target = s->text("scan_target", c.mw.scan_target);
    if (c.mw.scan_target != "sg1" && c.mw.scan_target != "sg2_center") {
      throw ConfigError("config: 'mw.scan_target' must be sg1 or sg2_center");
    }
    if (auto scan = s->object("scan")) {
      c.mw.scan_start_hz = scan->number("start_hz", c.mw.scan_start_hz);
      c.mw.scan_stop_hz = scan->number("stop_hz", c.mw.scan_stop_hz);
      c.mw.scan_points = scan->integer("points", c.mw.scan_points);
      scan->finish();
    }
    s->finish();
  }

  if (auto s = root.object("lineshape")) {
    c.lineshape.fwhm_hz = s->number("fwhm_hz", c.lineshape.fwhm_hz);
    c.lineshape.depth_per_line =
        s->number("depth_per_line", c.lineshape.depth_per_line);
    s->finish();
  }

  if (auto s = root.object("fm")) {
    c.fm.f_mod_hz = s->number("f_mod_hz", c.fm.f_mod_hz);
    c.fm.f_dev_hz = s->number("f_dev_hz", c.fm.f_dev_hz);
    c.fm.carrier_center_hz = s->number_opt("carrier_center_hz");
    s->finish();
  }

  if (auto s = root.object("lia")) {
    if (s->has("reference_phase_rad")) {
      const json* v = s->take("reference_phase_rad");
      if (v->is_string()) {
        if (v->get<std::string>() != "auto") {
          throw ConfigError(
              "config: 'lia.reference_phase_rad' must be a number or \"auto\"");
        }
      } else if (v->is_number()) {
        c.lia.reference_phase_rad = v->get<double>();
      } else {
        throw ConfigError(
            "config: 'lia.reference_phase_rad' must be a number or \"auto\"");
      }
    }
    c.lia.lowpass_cutoff_hz =
        s->number("lowpass_cutoff_hz", c.lia.lowpass_cutoff_hz);
    c.lia.lowpass_order = s->integer("lowpass_order", c.lia.lowpass_order);
    c.lia.sample_rate_hz = s->number("sample_rate_hz", c.lia.sample_rate_hz);
    c.lia.settle_s = s->number("settle_s", c.lia.settle_s);
    c.lia.average_s = s->number("average_s", c.lia.average_s);
    s->finish();
  }

  if (auto s = root.object("demod_scan")) {
    c.demod_scan.start_hz = s->number_opt("start_hz");
    c.demod_scan.stop_hz = s->number_opt("stop_hz");
    c.demod_scan.points = s->integer("points", c.demod_scan.points);
    c.demod_scan.fit_window_hz = s->number_opt("fit_window_hz");
    s->finish();
  }

  if (auto s = root.object("noise")) {
    c.noise.electronic_floor_tesla =
        s->number("electronic_floor_tesla", c.noise.electronic_floor_tesla);
    c.noise.technical_floor_tesla =
        s->number("technical_floor_tesla", c.noise.technical_floor_tesla);
    c.noise.shot_floor_tesla =
        s->number("shot_floor_tesla", c.noise.shot_floor_tesla);
    c.noise.shot_photon_rate_hz =
        s->number("shot_photon_rate_hz", c.noise.shot_photon_rate_hz);
    c.noise.mains_fundamental_hz =
        s->number("mains_fundamental_hz", c.noise.mains_fundamental_hz);
    c.noise.mains_amplitude_tesla =
        s->number("mains_amplitude_tesla", c.noise.mains_amplitude_tesla);
    c.noise.mains_harmonics =
        s->integer("mains_harmonics", c.noise.mains_harmonics);
    c.noise.mains_rolloff_exponent =
        s->number("mains_rolloff_exponent", c.noise.mains_rolloff_exponent);
    if (const json* v = s->take("mains_lines")) {
      if (!v->is_array()) {
        throw ConfigError("config: 'noise.mains_lines' must be an array");
      }
      for (const auto& e : *v) {
        if (!e.is_array() || e.size() != 2) {
          throw ConfigError(
              "config: 'noise.mains_lines' entries must be [freq_hz, tesla]");
        }
        c.noise.mains_lines.push_back(
            {e.at(0).get<double>(), e.at(1).get<double>()});
      }
    }
    if (auto tf = s->object("test_field")) {
      analysis::MainsLine line;
      line.freq_hz = tf->number("freq_hz", 0.0);
      line.amplitude_t = tf->number("amplitude_tesla", 0.0);
      tf->finish();
      c.noise.test_field = line;
    }
    s->finish();
  }

  if (auto s = root.object("lsd")) {
    c.lsd.segment_s = s->number("segment_s", c.lsd.segment_s);
    c.lsd.n_segments = s->integer("n_segments", c.lsd.n_segments);
    c.lsd.window = s->text("window", c.lsd.window);
    if (c.lsd.window != "rectangular" && c.lsd.window != "hann") {
      throw ConfigError("config: 'lsd.window' must be rectangular or hann");
    }
    c.lsd.smoothing_bins = s->integer("smoothing_bins", c.lsd.smoothing_bins);
    c.lsd.band_lo_hz = s->number("band_lo_hz", c.lsd.band_lo_hz);
    c.lsd.band_hi_hz = s->number("band_hi_hz", c.lsd.band_hi_hz);
    c.lsd.decimate_to_hz = s->number("decimate_to_hz", c.lsd.decimate_to_hz);
    s->finish();
  }

  if (auto s = root.object("sensitivity")) {
    c.sensitivity.synth_rate_hz =
        s->number("synth_rate_hz", c.sensitivity.synth_rate_hz);
    c.sensitivity.insensitive_detuning_hz = s->number(
        "insensitive_detuning_hz", c.sensitivity.insensitive_detuning_hz);
    c.sensitivity.theta_deg = s->number("theta_deg", c.sensitivity.theta_deg);
    s->finish();
  }

  if (auto s = root.object("fit")) {
    c.fit.n_peaks = s->integer("n_peaks", c.fit.n_peaks);
    c.fit.shared_fwhm = s->boolean("shared_fwhm", c.fit.shared_fwhm);
    c.fit.max_iterations = s->integer("max_iterations", c.fit.max_iterations);
    s->finish();
  }

  if (auto s = root.object("shotnoise")) {
    c.shotnoise.photon_rate_hz =
        s->number("photon_rate_hz", c.shotnoise.photon_rate_hz);
    c.shotnoise.effective_contrast =
        s->number("effective_contrast", c.shotnoise.effective_contrast);
    c.shotnoise.fwhm_hz = s->number("fwhm_hz", c.shotnoise.fwhm_hz);
    c.shotnoise.cap_tesla = s->number("cap_tesla", c.shotnoise.cap_tesla);
    s->finish();
  }

  root.finish();
  return c;
}

Config load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string serialize(const Config& c) {
  json j;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["spin"] = {
      {"zfs_hz", c.spin.zfs_hz},
      {"hyperfine_hz", c.spin.hyperfine_hz},
      {"n_hyperfine", c.spin.n_hyperfine},
      {"g_factor", c.spin.g_factor},
      {"bias_field_tesla", c.spin.bias_field_tesla},
      {"bias_direction_miller", c.spin.bias_direction_miller},
      {"axis_weights", c.spin.axis_weights},
  };
  j["rates"] = {
      {"pump_power_w", c.rates.pump_power_w},
      {"pump_rate_per_watt_hz", c.rates.pump_rate_per_watt_hz},
      {"radiative_rate_hz", c.rates.radiative_rate_hz},
      {"isc0_rate_hz", c.rates.isc0_rate_hz},
      {"isc1_rate_hz", c.rates.isc1_rate_hz},
      {"singlet_relax_rate_hz", c.rates.singlet_relax_rate_hz},
      {"metastable_rate_hz", c.rates.metastable_rate_hz},
      {"mw_mixing_rate_hz", c.rates.mw_mixing_rate_hz},
  };
  if (c.rates.pump_rate_explicit) {
    j["rates"]["pump_rate_hz"] = c.rates.pump_rate_hz;
    j["rates"].erase("pump_power_w");
  }
  j["optics"] = {
      {"nv_areal_absorbance", c.optics.nv_areal_absorbance},
      {"background_bleach_depth", c.optics.background_bleach_depth},
      {"background_bleach_sat_power_w", c.optics.background_bleach_sat_power_w},
      {"background_time_const_s", c.optics.background_time_const_s},
      {"probe_level_v", c.optics.probe_level_v},
  };
  j["transient"] = {
      {"frequency_hz", c.transient.frequency_hz},
      {"duty", c.transient.duty},
      {"duration_s", c.transient.duration_s},
      {"dt_s", c.transient.dt_s},
      {"settle_periods", c.transient.settle_periods},
      {"power_sweep_w", c.transient.power_sweep_w},
  };
  j["mw"] = {
      {"f_sg1_hz", c.mw.f_sg1_hz},
      {"sg2_tones_hz", c.mw.sg2_tones_hz},
      {"mixing_enabled", c.mw.mixing_enabled},
      {"scan_target", c.mw.scan_target},
      {"scan",
       {{"start_hz", c.mw.scan_start_hz},
        {"stop_hz", c.mw.scan_stop_hz},
        {"points", c.mw.scan_points}}},
  };
  j["lineshape"] = {
      {"fwhm_hz", c.lineshape.fwhm_hz},
      {"depth_per_line", c.lineshape.depth_per_line},
  };
  j["fm"] = {
      {"f_mod_hz", c.fm.f_mod_hz},
      {"f_dev_hz", c.fm.f_dev_hz},
  };
  if (c.fm.carrier_center_hz) {
    j["fm"]["carrier_center_hz"] = *c.fm.carrier_center_hz;
  }
  j["lia"] = {
      {"lowpass_cutoff_hz", c.lia.lowpass_cutoff_hz},
      {"lowpass_order", c.lia.lowpass_order},
      {"sample_rate_hz", c.lia.sample_rate_hz},
      {"settle_s", c.lia.settle_s},
      {"average_s", c.lia.average_s},
  };
  if (c.lia.reference_phase_rad) {
    j["lia"]["reference_phase_rad"] = *c.lia.reference_phase_rad;
  } else {
    j["lia"]["reference_phase_rad"] = "auto";
  }
  j["demod_scan"] = {{"points", c.demod_scan.points}};
  if (c.demod_scan.start_hz) j["demod_scan"]["start_hz"] = *c.demod_scan.start_hz;
  if (c.demod_scan.stop_hz) j["demod_scan"]["stop_hz"] = *c.demod_scan.stop_hz;
  if (c.demod_scan.fit_window_hz) {
    j["demod_scan"]["fit_window_hz"] = *c.demod_scan.fit_window_hz;
  }
  j["noise"] = {
      {"electronic_floor_tesla", c.noise.electronic_floor_tesla},
      {"technical_floor_tesla", c.noise.technical_floor_tesla},
      {"shot_floor_tesla", c.noise.shot_floor_tesla},
      {"shot_photon_rate_hz", c.noise.shot_photon_rate_hz},
      {"mains_fundamental_hz", c.noise.mains_fundamental_hz},
      {"mains_amplitude_tesla", c.noise.mains_amplitude_tesla},
      {"mains_harmonics", c.noise.mains_harmonics},
      {"mains_rolloff_exponent", c.noise.mains_rolloff_exponent},
  };
  if (!c.noise.mains_lines.empty()) {
    json lines = json::array();
    for (const auto& m : c.noise.mains_lines) {
      lines.push_back({m.freq_hz, m.amplitude_t});
    }
    j["noise"]["mains_lines"] = lines;
  }
  if (c.noise.test_field) {
    j["noise"]["test_field"] = {{"freq_hz", c.noise.test_field->freq_hz},
                                {"amplitude_tesla",
                                 c.noise.test_field->amplitude_t}};
  }
  j["lsd"] = {
      {"segment_s", c.lsd.segment_s},
      {"n_segments", c.lsd.n_segments},
      {"window", c.lsd.window},
      {"smoothing_bins", c.lsd.smoothing_bins},
      {"band_lo_hz", c.lsd.band_lo_hz},
      {"band_hi_hz", c.lsd.band_hi_hz},
      {"decimate_to_hz", c.lsd.decimate_to_hz},
  };
  j["sensitivity"] = {
      {"synth_rate_hz", c.sensitivity.synth_rate_hz},
      {"insensitive_detuning_hz", c.sensitivity.insensitive_detuning_hz},
      {"theta_deg", c.sensitivity.theta_deg},
  };
  j["fit"] = {
      {"n_peaks", c.fit.n_peaks},
      {"shared_fwhm", c.fit.shared_fwhm},
      {"max_iterations", c.fit.max_iterations},
  };
  j["shotnoise"] = {
      {"photon_rate_hz", c.shotnoise.photon_rate_hz},
      {"effective_contrast", c.shotnoise.effective_contrast},
      {"fwhm_hz", c.shotnoise.fwhm_hz},
      {"cap_tesla", c.shotnoise.cap_tesla},
  };
  return j.dump(2);
}

std::string config_hash(const Config& c) {
  // The hash identifies the scenario, not where its files land.
  Config keyed = c;
  keyed.output_dir.clear();
  return io::hex64(io::fnv1a64(serialize(keyed)));
}

PhysicalConstants constants_of(const Config& c) {
  PhysicalConstants pc;
  pc.electron_g = c.spin.g_factor;
  pc.validate();
  return pc;
}

spin::SpinParams spin_params_of(const Config& c) {
  spin::SpinParams p;
  p.zfs_hz = c.spin.zfs_hz;
  p.hyperfine_hz = c.spin.hyperfine_hz;
  p.n_hyperfine = c.spin.n_hyperfine;
  p.validate();
  return p;
}

Vec3 bias_field_of(const Config& c) {
  const auto& m = c.spin.bias_direction_miller;
  const Vec3 dir{m[0], m[1], m[2]};
  return dir.normalized() * c.spin.bias_field_tesla;
}

photo::RateConfig rates_of(const Config& c, bool mw_on) {
  photo::RateConfig r;
  r.pump_rate = c.rates.pump_rate_explicit
                    ? c.rates.pump_rate_hz
                    : c.rates.pump_power_w * c.rates.pump_rate_per_watt_hz;
  r.k_radiative = c.rates.radiative_rate_hz;
  r.k_isc0 = c.rates.isc0_rate_hz;
  r.k_isc1 = c.rates.isc1_rate_hz;
  r.k_singlet_relax = c.rates.singlet_relax_rate_hz;
  r.k_metastable = c.rates.metastable_rate_hz;
  r.mw_mixing_rate = mw_on ? c.rates.mw_mixing_rate_hz : 0.0;
  r.validate();
  return r;
}

photo::OpticalConfig optics_of(const Config& c) {
  photo::OpticalConfig o;
  o.nv_areal_absorbance = c.optics.nv_areal_absorbance;
  o.background_bleach_depth = c.optics.background_bleach_depth;
  o.background_bleach_sat_power_w = c.optics.background_bleach_sat_power_w;
  o.background_time_const_s = c.optics.background_time_const_s;
  o.validate();
  return o;
}

photo::PulsedPumpSpec pump_spec_of(const Config& c) {
  return {c.transient.frequency_hz, c.transient.duty};
}

odmr::MWConfig mw_config_of(const Config& c) {
  odmr::MWConfig m;
  m.f_sg1_hz = c.mw.f_sg1_hz;
  m.f_sg2_tones_hz = c.mw.sg2_tones_hz;
  m.mixing_enabled = c.mw.mixing_enabled;
  m.scan_target = c.mw.scan_target == "sg2_center"
                      ? odmr::MWConfig::ScanTarget::sg2_center
                      : odmr::MWConfig::ScanTarget::sg1;
  m.scan.start_hz = c.mw.scan_start_hz;
  m.scan.stop_hz = c.mw.scan_stop_hz;
  m.scan.points = c.mw.scan_points;
  m.validate();
  return m;
}

lockin::FMConfig fm_config_of(const Config& c) {
  lockin::FMConfig fm;
  fm.f_mod_hz = c.fm.f_mod_hz;
  fm.f_dev_hz = c.fm.f_dev_hz;
  fm.carrier_center_hz = c.fm.carrier_center_hz.value_or(0.0);
  fm.validate();
  return fm;
}

lockin::DemodConfig demod_config_of(const Config& c) {
  lockin::DemodConfig d;
  d.reference_freq_hz = c.fm.f_mod_hz;
  d.reference_phase_rad = c.lia.reference_phase_rad.value_or(0.0);
  d.lowpass_cutoff_hz = c.lia.lowpass_cutoff_hz;
  d.lowpass_order = c.lia.lowpass_order;
  return d;
}

lockin::ScanTiming scan_timing_of(const Config& c) {
  lockin::ScanTiming t;
  t.sample_rate_hz = c.lia.sample_rate_hz;
  t.settle_s = c.lia.settle_s;
  t.average_s = c.lia.average_s;
  return t;
}

analysis::NoiseModel noise_model_of(const Config& c) {
  analysis::NoiseModel n;
  n.electronic_floor_t = c.noise.electronic_floor_tesla;
  n.technical_floor_t = c.noise.technical_floor_tesla;
  n.shot_floor_t = c.noise.shot_floor_tesla;
  n.seed = c.seed;
  if (!c.noise.mains_lines.empty()) {
    n.mains = c.noise.mains_lines;
  } else if (c.noise.mains_amplitude_tesla > 0.0) {
    n.mains = analysis::mains_harmonics(
        c.noise.mains_fundamental_hz, c.noise.mains_amplitude_tesla,
        c.noise.mains_harmonics, c.noise.mains_rolloff_exponent);
  }
  if (c.noise.test_field && c.noise.test_field->amplitude_t > 0.0) {
    n.mains.push_back(*c.noise.test_field);
  }
  n.validate();
  return n;
}

analysis::LSDConfig lsd_config_of(const Config& c) {
  analysis::LSDConfig l;
  l.segment_s = c.lsd.segment_s;
  l.n_segments = c.lsd.n_segments;
  l.window = c.lsd.window == "hann" ? analysis::LSDConfig::Window::hann
                                    : analysis::LSDConfig::Window::rectangular;
  l.smoothing_bins = c.lsd.smoothing_bins;
  l.validate();
  return l;
}

analysis::MagnetometerGeometry geometry_of(const Config& c) {
  analysis::MagnetometerGeometry g;
  g.theta_rad = c.sensitivity.theta_deg * kPi / 180.0;
  g.validate();
  return g;
}

fit::FitOptions fit_options_of(const Config& c) {
  fit::FitOptions o;
  o.shared_fwhm = c.fit.shared_fwhm;
  o.max_iterations = c.fit.max_iterations;
  o.validate();
  return o;
}

analysis::SensitivityScenario scenario_of(const Config& c) {
  analysis::SensitivityScenario s;
  s.spin_params = spin_params_of(c);
  s.constants = constants_of(c);
  s.bias_field_t = bias_field_of(c);
  s.axis_weights = c.spin.axis_weights;
  s.mw = mw_config_of(c);
  s.fwhm_hz = c.lineshape.fwhm_hz;
  s.depth_per_line = c.lineshape.depth_per_line;
  s.probe_level_v = c.optics.probe_level_v;
  s.fm = fm_config_of(c);
  s.lia = demod_config_of(c);
  s.auto_phase = !c.lia.reference_phase_rad.has_value();
  s.synth_rate_hz = c.sensitivity.synth_rate_hz;
  s.decimate_to_hz = c.lsd.decimate_to_hz;
  s.insensitive_detuning_hz = c.sensitivity.insensitive_detuning_hz;
  s.geometry = geometry_of(c);
  s.noise = noise_model_of(c);
  if (c.noise.shot_photon_rate_hz > 0.0) {
    s.noise.shot_floor_t = analysis::shot_noise_sensitivity(
        c.noise.shot_photon_rate_hz, c.shotnoise.effective_contrast,
        c.lineshape.fwhm_hz, s.geometry, s.constants);
  }
  s.lsd_cfg = lsd_config_of(c);
  s.band_lo_hz = c.lsd.band_lo_hz;
  s.band_hi_hz = c.lsd.band_hi_hz;
  return s;
}

}  // namespace nvmag::config
