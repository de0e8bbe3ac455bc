#include "dualgem/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "json.hpp"

#include "dualgem/atomic.hpp"
#include "dualgem/errors.hpp"
#include "dualgem/metrics.hpp"

namespace dualgem {
namespace {

using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& message) {
  throw ConfigError("config: " + message);
}

int edit_distance(const std::string& a, const std::string& b) {
  std::vector<int> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    int diag = row[0];
    row[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int up = row[j];
      const int cost = a[i - 1] == b[j - 1] ? 0 : 1;
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + cost});
      diag = up;
    }
  }
  return row[b.size()];
}

// Distance to the candidate or to a similar-length prefix of it, so a
// truncated key ("gama0") still points at "gamma0_per_us".
int key_score(const std::string& key, const std::string& candidate) {
  int best = edit_distance(key, candidate);
  const std::size_t lo = key.size() > 2 ? key.size() - 2 : 1;
  const std::size_t hi = std::min(candidate.size(), key.size() + 2);
  for (std::size_t n = lo; n <= hi; ++n) {
    best = std::min(best, edit_distance(key, candidate.substr(0, n)));
  }
  return best;
}

void reject_unknown_keys(const ordered_json& obj, const std::string& section,
                         const std::vector<std::string>& known) {
  for (const auto& item : obj.items()) {
    if (std::find(known.begin(), known.end(), item.key()) != known.end()) {
      continue;
    }
    std::string best;
    int best_score = 3;  // only suggest close matches
    for (const auto& cand : known) {
      const int score = key_score(item.key(), cand);
      if (score < best_score) {
        best_score = score;
        best = cand;
      }
    }
    std::string message =
        "unknown key \"" + item.key() + "\" in " + section;
    if (!best.empty()) message += " (did you mean \"" + best + "\"?)";
    fail(message);
  }
}

const ordered_json* get_section(const ordered_json& root, const char* name) {
  if (!root.contains(name)) return nullptr;
  const ordered_json& section = root.at(name);
  if (!section.is_object()) {
    fail(std::string(name) + ": expected an object");
  }
  return &section;
}

double get_number(const ordered_json& obj, const std::string& section,
                  const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const ordered_json& v = obj.at(key);
  if (!v.is_number()) fail(section + "." + key + ": expected a number");
  return v.get<double>();
}

int get_integer(const ordered_json& obj, const std::string& section,
                const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const ordered_json& v = obj.at(key);
  if (!v.is_number_integer()) {
    fail(section + "." + key + ": expected an integer");
  }
  return v.get<int>();
}

bool get_flag(const ordered_json& obj, const std::string& section,
              const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const ordered_json& v = obj.at(key);
  if (!v.is_boolean()) fail(section + "." + key + ": expected true/false");
  return v.get<bool>();
}

std::string get_text(const ordered_json& obj, const std::string& section,
                     const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const ordered_json& v = obj.at(key);
  if (!v.is_string()) fail(section + "." + key + ": expected a string");
  return v.get<std::string>();
}

void require(bool ok, const std::string& message) {
  if (!ok) fail(message);
}

void parse_atoms(const ordered_json& obj, ScenarioConfig& config) {
  reject_unknown_keys(obj, "atoms", {"detuning_MHz", "gamma0_per_us"});
  config.atoms.detuning_MHz =
      get_number(obj, "atoms", "detuning_MHz", config.atoms.detuning_MHz);
  config.atoms.gamma0_per_us =
      get_number(obj, "atoms", "gamma0_per_us", config.atoms.gamma0_per_us);
  require(std::abs(config.atoms.detuning_MHz) >= 2.0,
          "atoms.detuning_MHz: Raman model needs |detuning_MHz| >= 2");
  require(config.atoms.gamma0_per_us >= 0.0,
          "atoms.gamma0_per_us: must satisfy gamma0_per_us >= 0");
}

void parse_noise(const ordered_json& obj, ScenarioConfig::Noise& noise) {
  reject_unknown_keys(obj, "magnetics.noise",
                      {"sigma_B_gauss", "mains_amp_gauss", "mains_freq_Hz",
                       "mains_triggered"});
  noise.sigma_B_gauss = get_number(obj, "magnetics.noise", "sigma_B_gauss",
                                   noise.sigma_B_gauss);
  noise.mains_amp_gauss = get_number(obj, "magnetics.noise", "mains_amp_gauss",
                                     noise.mains_amp_gauss);
  noise.mains_freq_Hz = get_number(obj, "magnetics.noise", "mains_freq_Hz",
                                   noise.mains_freq_Hz);
  noise.mains_triggered = get_flag(obj, "magnetics.noise", "mains_triggered",
                                   noise.mains_triggered);
  require(noise.sigma_B_gauss >= 0.0,
          "magnetics.noise.sigma_B_gauss: must satisfy sigma_B_gauss >= 0");
  require(noise.mains_amp_gauss >= 0.0,
          "magnetics.noise.mains_amp_gauss: must satisfy mains_amp_gauss >= 0");
  require(noise.mains_freq_Hz > 0.0,
          "magnetics.noise.mains_freq_Hz: must satisfy mains_freq_Hz > 0");
}

void parse_magnetics(const ordered_json& obj, ScenarioConfig& config) {
  reject_unknown_keys(
      obj, "magnetics",
      {"B0_gauss", "beta", "beta_per_rail", "calibrate_rail1_efficiency",
       "rail2_efficiency_target", "gradient_MHz_per_L", "flip_time_us",
       "offset_MHz", "noise"});
  auto& m = config.magnetics;
  m.B0_gauss = get_number(obj, "magnetics", "B0_gauss", m.B0_gauss);
  require(m.B0_gauss > 0.0, "magnetics.B0_gauss: must satisfy B0_gauss > 0");

  int strength_keys = 0;
  if (obj.contains("beta")) {
    ++strength_keys;
    m.beta = get_number(obj, "magnetics", "beta", 0.0);
    require(*m.beta > 0.0, "magnetics.beta: must satisfy beta > 0");
  }
  if (obj.contains("beta_per_rail")) {
    ++strength_keys;
    const ordered_json& v = obj.at("beta_per_rail");
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
        !v[1].is_number()) {
      fail("magnetics.beta_per_rail: expected an array of two numbers");
    }
    m.beta_per_rail = {v[0].get<double>(), v[1].get<double>()};
    require((*m.beta_per_rail)[0] > 0.0 && (*m.beta_per_rail)[1] > 0.0,
            "magnetics.beta_per_rail: each entry must satisfy beta > 0");
  }
  if (obj.contains("calibrate_rail1_efficiency")) {
    ++strength_keys;
    m.calibrate_rail1_efficiency =
        get_number(obj, "magnetics", "calibrate_rail1_efficiency", 0.0);
    require(*m.calibrate_rail1_efficiency > 0.0 &&
                *m.calibrate_rail1_efficiency < 1.0,
            "magnetics.calibrate_rail1_efficiency: target must lie in (0, 1)");
  }
  require(strength_keys <= 1,
          "magnetics: give exactly one of beta, beta_per_rail, "
          "calibrate_rail1_efficiency");

  if (obj.contains("rail2_efficiency_target")) {
    m.rail2_efficiency_target =
        get_number(obj, "magnetics", "rail2_efficiency_target", 0.0);
    require(*m.rail2_efficiency_target > 0.0 &&
                *m.rail2_efficiency_target < 1.0,
            "magnetics.rail2_efficiency_target: target must lie in (0, 1)");
  }

  m.gradient_MHz_per_L =
      get_number(obj, "magnetics", "gradient_MHz_per_L", m.gradient_MHz_per_L);
  require(m.gradient_MHz_per_L != 0.0,
          "magnetics.gradient_MHz_per_L: the gradient must be nonzero");
  m.flip_time_us = get_number(obj, "magnetics", "flip_time_us", m.flip_time_us);
  require(m.flip_time_us > 0.0,
          "magnetics.flip_time_us: must satisfy flip_time_us > 0");
  m.offset_MHz = get_number(obj, "magnetics", "offset_MHz", m.offset_MHz);

  if (obj.contains("noise")) {
    const ordered_json& noise = obj.at("noise");
    if (!noise.is_object()) fail("magnetics.noise: expected an object");
    parse_noise(noise, m.noise);
  }
}

void parse_signals(const ordered_json& obj, ScenarioConfig& config) {
  reject_unknown_keys(obj, "signals",
                      {"shape", "width_us", "centre_us", "amplitude",
                       "polarisation", "rail2_centre_offset_us"});
  auto& s = config.signals;
  s.shape = get_text(obj, "signals", "shape", s.shape);
  require(s.shape == "gaussian",
          "signals.shape: only \"gaussian\" is supported");
  s.width_us = get_number(obj, "signals", "width_us", s.width_us);
  require(s.width_us > 0.0, "signals.width_us: must satisfy width_us > 0");
  s.centre_us = get_number(obj, "signals", "centre_us", s.centre_us);
  require(s.centre_us > 0.0, "signals.centre_us: must satisfy centre_us > 0");
  s.amplitude = get_number(obj, "signals", "amplitude", s.amplitude);
  require(s.amplitude > 0.0, "signals.amplitude: must satisfy amplitude > 0");
  s.polarisation = get_text(obj, "signals", "polarisation", s.polarisation);
  parse_polarisation(s.polarisation);
  s.rail2_centre_offset_us = get_number(obj, "signals",
                                        "rail2_centre_offset_us",
                                        s.rail2_centre_offset_us);
}

void parse_control(const ordered_json& obj, ScenarioConfig& config) {
  reject_unknown_keys(obj, "control", {"polarisation", "mode"});
  auto& c = config.control;
  c.polarisation = get_text(obj, "control", "polarisation", c.polarisation);
  parse_polarisation(c.polarisation);
  c.mode = get_text(obj, "control", "mode", c.mode);
  require(c.mode == "linear" || c.mode == "circular",
          "control.mode: expected \"linear\" or \"circular\"");
}

void parse_grid(const ordered_json& obj, ScenarioConfig& config) {
  reject_unknown_keys(obj, "grid", {"Nz", "dt_us", "t_end_us"});
  auto& g = config.grid;
  g.Nz = get_integer(obj, "grid", "Nz", g.Nz);
  require(g.Nz >= 16, "grid.Nz: must satisfy Nz >= 16");
  g.dt_us = get_number(obj, "grid", "dt_us", g.dt_us);
  require(g.dt_us >= 0.0, "grid.dt_us: must satisfy dt_us >= 0 (0 = auto)");
  g.t_end_us = get_number(obj, "grid", "t_end_us", g.t_end_us);
  require(g.t_end_us > 0.0, "grid.t_end_us: must satisfy t_end_us > 0");
}

void parse_run(const ordered_json& obj, ScenarioConfig& config) {
  reject_unknown_keys(obj, "run", {"seed", "trials"});
  auto& r = config.run;
  if (obj.contains("seed")) {
    const ordered_json& v = obj.at("seed");
    if (!v.is_number_integer() ||
        (v.is_number_integer() && !v.is_number_unsigned() &&
         v.get<long long>() < 0)) {
      fail("run.seed: expected a non-negative integer");
    }
    r.seed = v.get<std::uint64_t>();
  }
  r.trials = get_integer(obj, "run", "trials", r.trials);
  require(r.trials >= 1, "run.trials: must satisfy trials >= 1");
}

void parse_spectrum(const ordered_json& obj, ScenarioConfig& config) {
  reject_unknown_keys(obj, "spectrum",
                      {"od0", "gamma_MHz", "points", "span_MHz"});
  auto& s = config.spectrum;
  s.od0 = get_number(obj, "spectrum", "od0", s.od0);
  require(s.od0 > 0.0, "spectrum.od0: must satisfy od0 > 0");
  s.gamma_MHz = get_number(obj, "spectrum", "gamma_MHz", s.gamma_MHz);
  require(s.gamma_MHz > 0.0,
          "spectrum.gamma_MHz: must satisfy gamma_MHz > 0");
  s.points = get_integer(obj, "spectrum", "points", s.points);
  require(s.points >= 100,
          "spectrum.points: need at least 100 probe points");
  s.span_MHz = get_number(obj, "spectrum", "span_MHz", s.span_MHz);
  require(s.span_MHz >= 0.0,
          "spectrum.span_MHz: must satisfy span_MHz >= 0 (0 = auto)");
}

void parse_sweep(const ordered_json& obj, ScenarioConfig& config) {
  reject_unknown_keys(obj, "sweep", {"param", "values"});
  auto& s = config.sweep;
  s.param = get_text(obj, "sweep", "param", s.param);
  require(s.param == "beta" || s.param == "delta",
          "sweep.param: expected \"beta\" or \"delta\"");
  if (obj.contains("values")) {
    const ordered_json& v = obj.at("values");
    if (!v.is_array()) fail("sweep.values: expected an array of numbers");
    s.values.clear();
    for (const auto& entry : v) {
      if (!entry.is_number()) fail("sweep.values: expected numbers");
      s.values.push_back(entry.get<double>());
    }
    for (const double value : s.values) {
      if (s.param == "beta") {
        require(value > 0.0, "sweep.values: beta values must be > 0");
      } else {
        require(std::abs(value) >= 2.0,
                "sweep.values: |detuning_MHz| >= 2 required");
      }
    }
  }
}

void cross_validate(const ScenarioConfig& config) {
  const double flip = config.magnetics.flip_time_us;
  require(flip < config.grid.t_end_us,
          "magnetics.flip_time_us: flip must precede grid.t_end_us");
  require(config.signals.centre_us < flip,
          "signals.centre_us: the input pulse must precede the flip");
  require(config.signals.centre_us + config.signals.rail2_centre_offset_us <
                  flip &&
              config.signals.centre_us +
                      config.signals.rail2_centre_offset_us >
                  0.0,
          "signals.rail2_centre_offset_us: rail-2 pulse centre must stay in "
          "(0, flip_time_us)");
  if (config.control.mode == "circular") {
    require(config.control.polarisation == "R",
            "control.mode: circular mode drives sigma+ on both rails; set "
            "control.polarisation = \"R\"");
  }
}

ScenarioConfig parse_root(const ordered_json& root) {
  if (!root.is_object()) fail("top level: expected an object");
  reject_unknown_keys(root, "top level",
                      {"atoms", "magnetics", "signals", "control", "grid",
                       "run", "spectrum", "sweep"});
  ScenarioConfig config;
  if (const auto* s = get_section(root, "atoms")) parse_atoms(*s, config);
  if (const auto* s = get_section(root, "magnetics")) {
    parse_magnetics(*s, config);
  }
  if (const auto* s = get_section(root, "signals")) parse_signals(*s, config);
  if (const auto* s = get_section(root, "control")) parse_control(*s, config);
  if (const auto* s = get_section(root, "grid")) parse_grid(*s, config);
  if (const auto* s = get_section(root, "run")) parse_run(*s, config);
  if (const auto* s = get_section(root, "spectrum")) {
    parse_spectrum(*s, config);
  }
  if (const auto* s = get_section(root, "sweep")) parse_sweep(*s, config);
  cross_validate(config);
  return config;
}

}  // namespace

ScenarioConfig parse_config_text(const std::string& text) {
  ordered_json root;
  try {
    root = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(std::string("not valid JSON: ") + e.what());
  }
  return parse_root(root);
}

ScenarioConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

std::string effective_config_json(const ScenarioConfig& config) {
  ordered_json root;
  root["atoms"] = {{"detuning_MHz", config.atoms.detuning_MHz},
                   {"gamma0_per_us", config.atoms.gamma0_per_us}};

  ordered_json magnetics;
  magnetics["B0_gauss"] = config.magnetics.B0_gauss;
  if (config.magnetics.beta_per_rail) {
    magnetics["beta_per_rail"] = *config.magnetics.beta_per_rail;
  } else if (config.magnetics.calibrate_rail1_efficiency) {
    magnetics["calibrate_rail1_efficiency"] =
        *config.magnetics.calibrate_rail1_efficiency;
  } else {
    magnetics["beta"] = config.magnetics.beta.value_or(0.2);
  }
  if (config.magnetics.rail2_efficiency_target) {
    magnetics["rail2_efficiency_target"] =
        *config.magnetics.rail2_efficiency_target;
  }
  magnetics["gradient_MHz_per_L"] = config.magnetics.gradient_MHz_per_L;
  magnetics["flip_time_us"] = config.magnetics.flip_time_us;
  magnetics["offset_MHz"] = config.magnetics.offset_MHz;
  magnetics["noise"] = {
      {"sigma_B_gauss", config.magnetics.noise.sigma_B_gauss},
      {"mains_amp_gauss", config.magnetics.noise.mains_amp_gauss},
      {"mains_freq_Hz", config.magnetics.noise.mains_freq_Hz},
      {"mains_triggered", config.magnetics.noise.mains_triggered}};
  root["magnetics"] = magnetics;

  root["signals"] = {
      {"shape", config.signals.shape},
      {"width_us", config.signals.width_us},
      {"centre_us", config.signals.centre_us},
      {"amplitude", config.signals.amplitude},
      {"polarisation", config.signals.polarisation},
      {"rail2_centre_offset_us", config.signals.rail2_centre_offset_us}};
  root["control"] = {{"polarisation", config.control.polarisation},
                     {"mode", config.control.mode}};
  root["grid"] = {{"Nz", config.grid.Nz},
                  {"dt_us", config.grid.dt_us},
                  {"t_end_us", config.grid.t_end_us}};
  root["run"] = {{"seed", config.run.seed}, {"trials", config.run.trials}};
  root["spectrum"] = {{"od0", config.spectrum.od0},
                      {"gamma_MHz", config.spectrum.gamma_MHz},
                      {"points", config.spectrum.points},
                      {"span_MHz", config.spectrum.span_MHz}};
  root["sweep"] = {{"param", config.sweep.param},
                   {"values", config.sweep.values}};
  return root.dump(2) + "\n";
}

std::string config_digest(const ScenarioConfig& config) {
  return fnv1a64_hex(effective_config_json(config));
}

PolarisationState parse_polarisation(const std::string& token) {
  std::string key;
  for (const char c : token) {
    key.push_back(static_cast<char>(std::tolower(
        static_cast<unsigned char>(c))));
  }
  if (key == "h") return PolarisationState::H();
  if (key == "v") return PolarisationState::V();
  if (key == "l") return PolarisationState::L();
  if (key == "r") return PolarisationState::R();
  throw ConfigError("config: polarisation \"" + token +
                    "\": expected one of H, V, L, R");
}

DualRailConfig build_dual_rail(const ScenarioConfig& config) {
  DualRailConfig d;
  d.B0_gauss = config.magnetics.B0_gauss;
  d.delta_MHz = config.atoms.detuning_MHz;
  d.mode = config.control.mode == "circular" ? DualMode::circular
                                             : DualMode::linear;
  d.input_pol = parse_polarisation(config.signals.polarisation);
  d.control_pol = parse_polarisation(config.control.polarisation);
  d.coupling_options.B0_gauss = config.magnetics.B0_gauss;

  d.program.eta_MHz_per_L = config.magnetics.gradient_MHz_per_L;
  d.program.flip_time_us = config.magnetics.flip_time_us;
  d.program.offset_MHz = config.magnetics.offset_MHz;
  d.program.bias_MHz = 0.0;  // set per rail by the runner

  double beta1 = config.magnetics.beta.value_or(0.2);
  double beta2 = beta1;
  if (config.magnetics.beta_per_rail) {
    beta1 = (*config.magnetics.beta_per_rail)[0];
    beta2 = (*config.magnetics.beta_per_rail)[1];
  } else if (d.mode == DualMode::circular) {
    beta2 = beta1 * circular_beta_ratio(d.delta_MHz, d.coupling_options);
  }
  for (int i = 0; i < 2; ++i) {
    GemParams& p = d.rail_params[i];
    p.beta = i == 0 ? beta1 : beta2;
    p.gamma0_per_us = config.atoms.gamma0_per_us;
    p.n_z = config.grid.Nz;
    p.dt_us = config.grid.dt_us;
    p.t_end_us = config.grid.t_end_us;
    p.rail_offset_MHz = 0.0;
  }

  const auto& s = config.signals;
  d.inputs[0] = PulseEnvelope::gaussian(s.width_us, s.centre_us, s.amplitude);
  d.inputs[1] = PulseEnvelope::gaussian(
      s.width_us, s.centre_us + s.rail2_centre_offset_us, s.amplitude);

  const auto lines = raman_line_positions(config.magnetics.B0_gauss);
  d.rail_carrier_MHz = {lines[2], lines[0]};
  d.rail2_energy_trim = 1.0;
  return d;
}

DualRailConfig resolve_dual_rail(const ScenarioConfig& config) {
  DualRailConfig d = build_dual_rail(config);
  if (config.magnetics.calibrate_rail1_efficiency) {
    const double beta1 =
        calibrate_beta(d, *config.magnetics.calibrate_rail1_efficiency);
    const double ratio = d.mode == DualMode::circular
                             ? circular_beta_ratio(d.delta_MHz,
                                                   d.coupling_options)
                             : 1.0;
    d.rail_params[0].beta = beta1;
    d.rail_params[1].beta = beta1 * ratio;
  }
  if (config.magnetics.rail2_efficiency_target) {
    const EchoRecord probe = run_dual_rail(d, NoiseModel{}, 0);
    const double eta2 = probe.metrics.eta2;
    const double target = *config.magnetics.rail2_efficiency_target;
    if (eta2 <= 0.0 || target > eta2 * (1.0 + 1e-9)) {
      fail("magnetics.rail2_efficiency_target: target " +
           std::to_string(target) + " exceeds the untrimmed rail-2 value " +
           std::to_string(eta2) + "; the trim can only lower it");
    }
    d.rail2_energy_trim = std::min(1.0, target / eta2);
  }
  return d;
}

NoiseModel build_noise(const ScenarioConfig& config) {
  NoiseModel noise;
  noise.sigma_B_gauss = config.magnetics.noise.sigma_B_gauss;
  noise.mains_amp_gauss = config.magnetics.noise.mains_amp_gauss;
  noise.mains_freq_Hz = config.magnetics.noise.mains_freq_Hz;
  noise.mains_triggered = config.magnetics.noise.mains_triggered;
  return noise;
}

}  // namespace dualgem
