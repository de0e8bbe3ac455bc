#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dualgem/atomic.hpp"
#include "dualgem/config.hpp"
#include "dualgem/dual_rail.hpp"
#include "dualgem/errors.hpp"
#include "dualgem/gem.hpp"
#include "dualgem/metrics.hpp"
#include "dualgem/polarisation.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace dualgem;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string format = "csv";
};

ScenarioConfig load_config(const CommonOptions& opts) {
  ScenarioConfig config = opts.config_path.empty()
                              ? ScenarioConfig{}
                              : parse_config_file(opts.config_path);
  if (opts.seed) config.run.seed = *opts.seed;
  if (opts.trials) {
    if (*opts.trials < 1) throw ConfigError("--trials: must be >= 1");
    config.run.trials = *opts.trials;
  }
  return config;
}

// All artifacts live under --out; anything already written is removed when
// the command fails so partial outputs never survive.
struct ArtifactWriter {
  fs::path dir;
  std::string format;
  std::vector<std::string> names;
  std::vector<fs::path> paths;

  void emit(const std::string& name, const std::string& content) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
      throw ConfigError("cannot create output directory: " + dir.string());
    }
    const fs::path path = dir / name;
    write_text_file(path.string(), content);
    names.push_back(name);
    paths.push_back(path);
  }

  void emit_trace(const std::string& base, const std::vector<double>& t_us,
                  const std::vector<std::complex<double>>& trace) {
    if (format == "json") {
      // ordered_json insertion invalidates references to earlier members;
      // build the arrays before assembling the document.
      std::vector<double> re(trace.size()), im(trace.size()), intensity(trace.size());
      for (std::size_t i = 0; i < trace.size(); ++i) {
        re[i] = trace[i].real();
        im[i] = trace[i].imag();
        intensity[i] = std::norm(trace[i]);
      }
      ordered_json doc;
      doc["t_us"] = t_us;
      doc["re"] = re;
      doc["im"] = im;
      doc["intensity"] = intensity;
      emit(base + ".json", doc.dump(2) + "\n");
    } else {
      emit(base + ".csv", trace_csv(t_us, trace));
    }
  }

  void emit_table(const std::string& base,
                  const std::vector<std::string>& headers,
                  const std::vector<std::vector<double>>& rows) {
    if (format == "json") {
      ordered_json doc;
      doc["headers"] = headers;
      doc["rows"] = rows;
      emit(base + ".json", doc.dump(2) + "\n");
    } else {
      emit(base + ".csv", table_csv(headers, rows));
    }
  }

  void discard() {
    for (const auto& path : paths) {
      std::error_code ec;
      fs::remove(path, ec);
    }
  }
};

ordered_json complex_json(std::complex<double> z) {
  return ordered_json::array({z.real(), z.imag()});
}

ordered_json ledger_json(const EnergyLedger& ledger) {
  return {{"input", ledger.input},
          {"transmitted", ledger.transmitted},
          {"echo", ledger.echo},
          {"residual", ledger.residual},
          {"decayed", ledger.decayed},
          {"closure_residual", ledger.closure_residual},
          {"closed", ledger.closed}};
}

void finish(ArtifactWriter& writer, const std::string& command,
            const ScenarioConfig& config, const ordered_json& metrics,
            const std::vector<std::string>& warnings = {}) {
  const std::string doc = metrics_document(command, config, config.run.seed,
                                           metrics.dump(), warnings,
                                           writer.names);
  writer.emit("metrics.json", doc);
  std::cout << doc;
}

int run_spectrum(const CommonOptions& opts) {
  const ScenarioConfig config = load_config(opts);
  ArtifactWriter writer{opts.out_dir, opts.format, {}, {}};
  try {
    const double delta0 =
        raman_line_positions(config.magnetics.B0_gauss)[2];
    const double eta = config.magnetics.gradient_MHz_per_L;
    const double span = config.spectrum.span_MHz > 0.0
                            ? config.spectrum.span_MHz
                            : delta0 + 0.75 * std::abs(eta) + 2.0;
    const int points = config.spectrum.points;
    std::vector<double> probe(points);
    for (int k = 0; k < points; ++k) {
      probe[k] = -span + 2.0 * span * k / (points - 1);
    }
    SpectrumParams params;
    params.od0 = config.spectrum.od0;
    params.gamma_MHz = config.spectrum.gamma_MHz;
    const std::vector<double> transmission =
        absorption_spectrum(config.magnetics.B0_gauss, eta, params, probe);

    std::vector<std::vector<double>> rows(probe.size());
    double t_min = 1.0;
    for (std::size_t k = 0; k < probe.size(); ++k) {
      const double od = transmission[k] > 0.0 ? -std::log(transmission[k])
                                              : std::numeric_limits<double>::infinity();
      rows[k] = {probe[k], transmission[k], od};
      t_min = std::min(t_min, transmission[k]);
    }
    writer.emit_table("spectrum", {"detuning_MHz", "transmission", "od"},
                      rows);

    const std::vector<double> at_lines_probe = {-delta0, 0.0, delta0};
    const std::vector<double> at_lines = absorption_spectrum(
        config.magnetics.B0_gauss, eta, params, at_lines_probe);

    ordered_json metrics;
    metrics["delta0_MHz"] = delta0;
    metrics["line_positions_MHz"] = at_lines_probe;
    metrics["transmission_at_lines"] = at_lines;
    metrics["min_transmission"] = t_min;
    metrics["span_MHz"] = span;
    metrics["points"] = points;
    finish(writer, "spectrum", config, metrics);
  } catch (...) {
    writer.discard();
    throw;
  }
  return 0;
}

int run_store(const CommonOptions& opts) {
  const ScenarioConfig config = load_config(opts);
  ArtifactWriter writer{opts.out_dir, opts.format, {}, {}};
  try {
    const DualRailConfig d = resolve_dual_rail(config);
    GemParams params = d.rail_params[0];
    GradientProgram program = d.program;  // bias 0: single line at centre
    const StorageResult sr =
        run_storage_recall(params, program, d.inputs[0]);
    const EnergyLedger ledger = energy_ledger(sr);

    writer.emit_trace("input", sr.run.t_us, sr.run.input_trace);
    writer.emit_trace("output", sr.run.t_us, sr.run.output_trace);

    const double two_pi_beta = 2.0 * std::numbers::pi * params.beta;
    ordered_json metrics;
    metrics["beta"] = params.beta;
    metrics["dt_us"] = sr.run.dt_us;
    metrics["n_z"] = sr.run.n_z;
    metrics["input_energy"] = sr.input_energy;
    metrics["transmitted_fraction"] = sr.transmitted_fraction;
    metrics["echo_fraction"] = sr.echo_fraction;
    metrics["echo_centroid_us"] = sr.echo_centroid_us;
    metrics["expected_echo_centroid_us"] =
        2.0 * program.flip_time_us - config.signals.centre_us;
    metrics["cw_transmission"] = std::exp(-two_pi_beta);
    metrics["forward_recall_bound"] =
        std::pow(1.0 - std::exp(-two_pi_beta), 2);
    metrics["max_flux_residual"] = sr.run.max_flux_residual;
    metrics["ledger"] = ledger_json(ledger);
    std::vector<std::string> warnings;
    if (sr.run.bandwidth_warning) {
      warnings.push_back(
          "input bandwidth exceeds the gradient-broadened line");
    }
    finish(writer, "store", config, metrics, warnings);
  } catch (...) {
    writer.discard();
    throw;
  }
  return 0;
}

ordered_json dual_metrics_json(const EchoRecord& record) {
  const DualRailMetrics& m = record.metrics;
  ordered_json metrics;
  metrics["delta0_MHz"] = record.delta0_MHz;
  metrics["beta1"] = m.beta1;
  metrics["beta2"] = m.beta2;
  metrics["eta1"] = m.eta1;
  metrics["eta2"] = m.eta2;
  metrics["eta_combined"] = m.eta_combined;
  metrics["v_measured"] = m.v_measured;
  metrics["v_predicted"] = m.v_predicted;
  metrics["mode_overlap"] = m.mode_overlap;
  metrics["temporal_match"] = m.temporal_match;
  metrics["delta_phi_deg"] = m.delta_phi_deg;
  metrics["delta_B_gauss"] = m.delta_B_gauss;
  metrics["window_us"] =
      ordered_json::array({record.window_lo_us, record.window_hi_us});
  metrics["reference_phase_deg"] = record.reference_phase_deg;
  ordered_json rails = ordered_json::array();
  for (const RailOutput& rail : record.rails) {
    rails.push_back(
        {{"echo_fraction", rail.storage.echo_fraction},
         {"transmitted_fraction", rail.storage.transmitted_fraction},
         {"echo_centroid_us", rail.storage.echo_centroid_us},
         {"storage_time_us", rail.storage_time_us},
         {"input_projection", complex_json(rail.input_projection)},
         {"ledger", ledger_json(rail.ledger)}});
  }
  metrics["rails"] = rails;
  return metrics;
}

int run_dual(const CommonOptions& opts) {
  const ScenarioConfig config = load_config(opts);
  ArtifactWriter writer{opts.out_dir, opts.format, {}, {}};
  try {
    const DualRailConfig d = resolve_dual_rail(config);
    const NoiseModel noise = build_noise(config);
    const EchoRecord record = run_dual_rail(d, noise, config.run.seed);

    writer.emit_trace("rail1", record.t_us, record.envelopes[0]);
    writer.emit_trace("rail2", record.t_us, record.envelopes[1]);
    writer.emit_trace("beat_demod", record.t_us, record.beat_demod);
    std::vector<std::vector<double>> rows(record.t_us.size());
    for (std::size_t k = 0; k < record.t_us.size(); ++k) {
      rows[k] = {record.t_us[k], record.beat_intensity[k],
                 record.beat_envelope[k]};
    }
    writer.emit_table("combined", {"t_us", "intensity", "envelope"}, rows);

    ordered_json metrics = dual_metrics_json(record);
    metrics["rail2_energy_trim"] = d.rail2_energy_trim;
    finish(writer, "dual", config, metrics);
  } catch (...) {
    writer.discard();
    throw;
  }
  return 0;
}

int run_sweep(const CommonOptions& opts) {
  const ScenarioConfig config = load_config(opts);
  ArtifactWriter writer{opts.out_dir, opts.format, {}, {}};
  try {
    std::vector<double> values = config.sweep.values;
    if (values.empty()) {
      values = config.sweep.param == "beta"
                   ? std::vector<double>{0.05, 0.1, 0.2, 0.4, 0.8}
                   : std::vector<double>{50.0, 100.0, 200.0, 400.0, 800.0};
    }
    const bool sweep_beta = config.sweep.param == "beta";
    std::vector<std::vector<double>> rows;
    ordered_json row_objects = ordered_json::array();
    for (const double value : values) {
      ScenarioConfig point = config;
      // Scan the untrimmed rail physics: a fixed rail-2 target would pin
      // eta2 (or become unreachable) across the ladder.
      point.magnetics.rail2_efficiency_target.reset();
      if (sweep_beta) {
        point.magnetics.beta = value;
        point.magnetics.beta_per_rail.reset();
        point.magnetics.calibrate_rail1_efficiency.reset();
      } else {
        point.atoms.detuning_MHz = value;
      }
      const DualRailConfig d = resolve_dual_rail(point);
      const EchoRecord record = run_dual_rail(d, NoiseModel{}, config.run.seed);
      const DualRailMetrics& m = record.metrics;
      const double bound =
          std::pow(1.0 - std::exp(-2.0 * std::numbers::pi * m.beta1), 2);
      rows.push_back({value, m.beta1, m.beta2, m.eta1, m.eta2, m.eta_combined,
                      bound, m.v_measured});
      row_objects.push_back({{sweep_beta ? "beta" : "detuning_MHz", value},
                             {"beta1", m.beta1},
                             {"beta2", m.beta2},
                             {"eta1", m.eta1},
                             {"eta2", m.eta2},
                             {"eta_combined", m.eta_combined},
                             {"forward_recall_bound", bound},
                             {"v_measured", m.v_measured}});
    }
    writer.emit_table("sweep",
                      {sweep_beta ? "beta" : "detuning_MHz", "beta1", "beta2",
                       "eta1", "eta2", "eta_combined", "forward_recall_bound",
                       "v_measured"},
                      rows);
    ordered_json metrics;
    metrics["param"] = config.sweep.param;
    metrics["rows"] = row_objects;
    finish(writer, "sweep", config, metrics);
  } catch (...) {
    writer.discard();
    throw;
  }
  return 0;
}

int run_mc_phase(const CommonOptions& opts) {
  const ScenarioConfig config = load_config(opts);
  ArtifactWriter writer{opts.out_dir, opts.format, {}, {}};
  try {
    const DualRailConfig d = resolve_dual_rail(config);
    const NoiseModel noise = build_noise(config);
    const McPhaseResult result =
        phase_noise_mc(d, noise, config.run.trials, config.run.seed);

    std::vector<std::vector<double>> rows(result.samples_deg.size());
    for (std::size_t k = 0; k < result.samples_deg.size(); ++k) {
      rows[k] = {static_cast<double>(k), result.delta_B_gauss[k],
                 result.samples_deg[k]};
    }
    writer.emit_table("samples", {"trial", "delta_B_gauss", "delta_phi_deg"},
                      rows);

    ordered_json metrics;
    metrics["trials"] = config.run.trials;
    metrics["mean_deg"] = result.mean_deg;
    metrics["std_deg"] = result.std_deg;
    metrics["closed_form_std_deg"] = result.closed_form_std_deg;
    metrics["sigma_B_gauss"] = noise.sigma_B_gauss;
    metrics["mains_amp_gauss"] = noise.mains_amp_gauss;
    metrics["mains_triggered"] = noise.mains_triggered;
    finish(writer, "mc-phase", config, metrics);
  } catch (...) {
    writer.discard();
    throw;
  }
  return 0;
}

int run_polarisation(const CommonOptions& opts) {
  const ScenarioConfig config = load_config(opts);
  ArtifactWriter writer{opts.out_dir, opts.format, {}, {}};
  try {
    const PolarisationState input =
        parse_polarisation(config.signals.polarisation);
    const PolarisationState control =
        parse_polarisation(config.control.polarisation);
    CouplingOptions options;
    options.B0_gauss = config.magnetics.B0_gauss;
    const double delta = config.atoms.detuning_MHz;

    ordered_json rails = ordered_json::array();
    std::array<CoupledMode, 2> modes;
    for (int rail = 1; rail <= 2; ++rail) {
      const CouplingPair pair =
          effective_couplings(rail, control, delta, options);
      const CoupledMode mode = coupled_mode(pair);
      modes[rail - 1] = mode;
      const auto axes = ellipse_axes(mode.pol);
      rails.push_back({{"g_minus", complex_json(pair.g_minus)},
                       {"g_plus", complex_json(pair.g_plus)},
                       {"g_cp", mode.g_cp},
                       {"mode_aL", complex_json(mode.pol.aL)},
                       {"mode_aR", complex_json(mode.pol.aR)},
                       {"stored_fraction", stored_fraction(mode.pol, input)},
                       {"ellipse_axes", ordered_json::array(
                                            {axes[0], axes[1]})}});
    }
    const NeglectedLambdaReport report =
        neglected_lambda_report(delta, options);

    ordered_json metrics;
    metrics["detuning_MHz"] = delta;
    metrics["rails"] = rails;
    metrics["mode_overlap"] = overlap(modes[0].pol, modes[1].pol);
    metrics["od_suppression"] = {
        {"storage_cycle", report.storage_cycle_ratio},
        {"linear_two_path", report.linear_ratio_two_path},
        {"linear_single_path", report.linear_ratio_single_path}};
    metrics["circular_beta_ratio"] = circular_beta_ratio(delta, options);
    finish(writer, "polarisation", config, metrics);
  } catch (...) {
    writer.discard();
    throw;
  }
  return 0;
}

void add_common(CLI::App* sub, CommonOptions& opts) {
  sub->add_option("--config", opts.config_path,
                  "Scenario file (JSON); defaults apply when omitted");
  sub->add_option("--out", opts.out_dir, "Output directory for artifacts")
      ->capture_default_str();
  sub->add_option("--seed", opts.seed, "Override run.seed");
  sub->add_option("--trials", opts.trials, "Override run.trials");
  sub->add_option("--format", opts.format, "Artifact format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dual-rail gradient echo memory simulator"};
  app.require_subcommand(1);

  CommonOptions opts;
  int (*entry)(const CommonOptions&) = nullptr;
  struct Command {
    const char* name;
    const char* help;
    int (*fn)(const CommonOptions&);
  };
  const std::vector<Command> commands = {
      {"spectrum", "Broadened absorption spectrum across the gradient", run_spectrum},
      {"store", "Single-rail storage/recall traces and efficiency", run_store},
      {"dual", "Two-rail storage, combined echo, beat demodulation", run_dual},
      {"sweep", "Echo efficiency versus a swept parameter", run_sweep},
      {"mc-phase", "Monte Carlo relative-phase spread under field noise", run_mc_phase},
      {"polarisation", "Coupled polarisation modes and mode overlaps", run_polarisation},
  };
  for (const auto& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    add_common(sub, opts);
    sub->callback([&entry, fn = cmd.fn] { entry = fn; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return entry(opts);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
