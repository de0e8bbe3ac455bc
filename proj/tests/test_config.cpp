#include <cmath>
#include <string>

#include "doctest.h"
#include "dualgem/atomic.hpp"
#include "dualgem/config.hpp"
#include "dualgem/errors.hpp"

using namespace dualgem;

namespace {

std::string parse_error(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

bool mentions(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("empty document yields the documented defaults") {
  auto cfg = parse_config_text("{}");
  CHECK(cfg.atoms.detuning_MHz == 200.0);
  CHECK(cfg.atoms.gamma0_per_us == 0.0);
  CHECK(cfg.magnetics.B0_gauss == 1.0);
  CHECK_FALSE(cfg.magnetics.beta.has_value());
  CHECK_FALSE(cfg.magnetics.beta_per_rail.has_value());
  CHECK_FALSE(cfg.magnetics.calibrate_rail1_efficiency.has_value());
  CHECK_FALSE(cfg.magnetics.rail2_efficiency_target.has_value());
  CHECK(cfg.magnetics.gradient_MHz_per_L == 1.0);
  CHECK(cfg.magnetics.flip_time_us == 22.0);
  CHECK(cfg.magnetics.noise.sigma_B_gauss == 0.0);
  CHECK(cfg.magnetics.noise.mains_freq_Hz == 50.0);
  CHECK_FALSE(cfg.magnetics.noise.mains_triggered);
  CHECK(cfg.signals.shape == "gaussian");
  CHECK(cfg.signals.width_us == 10.0);
  CHECK(cfg.signals.centre_us == 10.0);
  CHECK(cfg.signals.polarisation == "H");
  CHECK(cfg.control.polarisation == "V");
  CHECK(cfg.control.mode == "linear");
  CHECK(cfg.grid.Nz == 256);
  CHECK(cfg.grid.dt_us == 0.0);
  CHECK(cfg.grid.t_end_us == 60.0);
  CHECK(cfg.run.seed == 12345);
  CHECK(cfg.run.trials == 1000);
  CHECK(cfg.spectrum.od0 == 10.0);
  CHECK(cfg.spectrum.points == 401);
  CHECK(cfg.sweep.param == "beta");
  CHECK(cfg.sweep.values.empty());
}

TEST_CASE("canonical form round-trips byte for byte") {
  auto cfg = parse_config_text("{}");
  const std::string canon = effective_config_json(cfg);
  auto reparsed = parse_config_text(canon);
  CHECK(effective_config_json(reparsed) == canon);
  CHECK(config_digest(reparsed) == config_digest(cfg));
  CHECK(config_digest(ScenarioConfig{}) == config_digest(cfg));
  CHECK(config_digest(cfg).size() == 16);

  // A fully decorated scenario keeps optional keys through the round trip.
  const char* text = R"({
    "atoms": {"detuning_MHz": 200.0, "gamma0_per_us": 0.01},
    "magnetics": {
      "B0_gauss": 1.0,
      "calibrate_rail1_efficiency": 0.39,
      "rail2_efficiency_target": 0.32,
      "flip_time_us": 22.0,
      "noise": {"sigma_B_gauss": 3e-4, "mains_triggered": true}
    },
    "signals": {"rail2_centre_offset_us": 2.0},
    "control": {"polarisation": "V"},
    "run": {"seed": 7, "trials": 250}
  })";
  auto full = parse_config_text(text);
  const std::string canon_full = effective_config_json(full);
  auto full2 = parse_config_text(canon_full);
  CHECK(effective_config_json(full2) == canon_full);
  CHECK(full2.magnetics.calibrate_rail1_efficiency.has_value());
  CHECK(*full2.magnetics.rail2_efficiency_target == 0.32);
  CHECK(full2.magnetics.noise.mains_triggered);
  CHECK(full2.run.seed == 7);
  CHECK(config_digest(full2) == config_digest(full));
  CHECK(config_digest(full) != config_digest(cfg));
}

TEST_CASE("unknown keys are rejected with a suggestion") {
  const auto e1 = parse_error(R"({"atoms": {"gama0": 0.1}})");
  CHECK(mentions(e1, "unknown key"));
  CHECK(mentions(e1, "gama0"));
  CHECK(mentions(e1, "gamma0_per_us"));

  const auto e2 = parse_error(R"({"atmos": {}})");
  CHECK(mentions(e2, "unknown key"));
  CHECK(mentions(e2, "atoms"));

  // Nothing close: no suggestion offered.
  const auto e3 = parse_error(R"({"grid": {"banana": 1}})");
  CHECK(mentions(e3, "unknown key"));
  CHECK_FALSE(mentions(e3, "did you mean"));
}

TEST_CASE("validation names the key and the constraint") {
  CHECK(mentions(parse_error(R"({"atoms": {"gamma0_per_us": -0.1}})"),
                 "gamma0_per_us >= 0"));
  CHECK(mentions(parse_error(R"({"atoms": {"detuning_MHz": 0.5}})"),
                 "detuning_MHz"));
  CHECK(mentions(parse_error(R"({"magnetics": {"B0_gauss": 0.0}})"),
                 "B0_gauss > 0"));
  CHECK(mentions(parse_error(R"({"magnetics": {"gradient_MHz_per_L": 0.0}})"),
                 "nonzero"));
  CHECK(mentions(parse_error(R"({"grid": {"Nz": 8}})"), "Nz >= 16"));
  CHECK(mentions(parse_error(R"({"run": {"trials": 0}})"), "trials >= 1"));
  CHECK(mentions(parse_error(R"({"run": {"seed": -4}})"), "seed"));
  CHECK(mentions(parse_error(R"({"spectrum": {"points": 12}})"),
                 "at least 100"));
  CHECK(mentions(parse_error(R"({"signals": {"shape": "square"}})"),
                 "gaussian"));
  CHECK(mentions(parse_error(R"({"sweep": {"param": "width"}})"), "sweep"));
  CHECK(mentions(parse_error(R"({"sweep": {"values": [0.1, -0.2]}})"),
                 "beta values"));
  CHECK(mentions(parse_error("[1, 2]"), "expected an object"));
  CHECK(mentions(parse_error("{nope"), "not valid JSON"));
}

TEST_CASE("strength keys are mutually exclusive") {
  const auto err = parse_error(
      R"({"magnetics": {"beta": 0.2, "calibrate_rail1_efficiency": 0.39}})");
  CHECK(mentions(err, "exactly one"));

  CHECK(mentions(parse_error(R"({"magnetics": {"beta": -0.1}})"),
                 "beta > 0"));
  CHECK(mentions(parse_error(R"({"magnetics": {"beta_per_rail": [0.2]}})"),
                 "two numbers"));
  CHECK(mentions(
      parse_error(R"({"magnetics": {"beta_per_rail": [0.2, 0.0]}})"),
      "beta > 0"));
  CHECK(mentions(
      parse_error(R"({"magnetics": {"calibrate_rail1_efficiency": 1.2}})"),
      "(0, 1)"));

  auto two = parse_config_text(
      R"({"magnetics": {"beta_per_rail": [0.2, 0.15]}})");
  auto d = build_dual_rail(two);
  CHECK(d.rail_params[0].beta == 0.2);
  CHECK(d.rail_params[1].beta == 0.15);
}

TEST_CASE("timeline cross-validation") {
  CHECK(mentions(parse_error(
                     R"({"magnetics": {"flip_time_us": 70.0}})"),
                 "precede"));
  CHECK(mentions(parse_error(
                     R"({"signals": {"centre_us": 30.0}})"),
                 "precede the flip"));
  CHECK(mentions(parse_error(
                     R"({"signals": {"rail2_centre_offset_us": 15.0}})"),
                 "rail2_centre_offset_us"));
  CHECK(mentions(parse_error(
                     R"({"signals": {"rail2_centre_offset_us": -11.0}})"),
                 "rail2_centre_offset_us"));
  CHECK(mentions(parse_error(R"({"control": {"mode": "circular"}})"),
                 "control.polarisation"));
  CHECK_NOTHROW(parse_config_text(
      R"({"control": {"mode": "circular", "polarisation": "R"}})"));
}

TEST_CASE("polarisation tokens") {
  CHECK(overlap(parse_polarisation("h"), PolarisationState::H()) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(overlap(parse_polarisation("V"), PolarisationState::V()) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(overlap(parse_polarisation("l"), PolarisationState::L()) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(overlap(parse_polarisation("R"), PolarisationState::R()) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(parse_polarisation("Q"), ConfigError);
  CHECK_THROWS_AS(parse_polarisation(""), ConfigError);
}

TEST_CASE("structural translation") {
  auto cfg = parse_config_text(R"({
    "magnetics": {"B0_gauss": 2.0, "beta": 0.3, "flip_time_us": 25.0},
    "signals": {"width_us": 8.0, "centre_us": 9.0,
                 "rail2_centre_offset_us": 1.5},
    "grid": {"Nz": 128, "t_end_us": 70.0}
  })");
  auto d = build_dual_rail(cfg);

  CHECK(d.B0_gauss == 2.0);
  CHECK(d.rail_params[0].beta == 0.3);
  CHECK(d.rail_params[1].beta == 0.3);
  CHECK(d.rail_params[0].n_z == 128);
  CHECK(d.rail_params[0].t_end_us == 70.0);
  CHECK(d.program.flip_time_us == 25.0);
  CHECK(d.program.bias_MHz == 0.0);
  CHECK(d.inputs[0].centre_us == 9.0);
  CHECK(d.inputs[1].centre_us == doctest::Approx(10.5).epsilon(1e-14));
  CHECK(d.rail2_energy_trim == 1.0);

  const auto lines = raman_line_positions(2.0);
  CHECK(d.rail_carrier_MHz[0] == lines[2]);
  CHECK(d.rail_carrier_MHz[1] == lines[0]);
  CHECK(d.rail_carrier_MHz[0] == doctest::Approx(2.799248).epsilon(1e-12));

  // Circular mode splits the rail strengths by the coupling ratio.
  auto circ = parse_config_text(R"({
    "magnetics": {"beta": 0.3},
    "control": {"mode": "circular", "polarisation": "R"}
  })");
  auto dc = build_dual_rail(circ);
  CHECK(dc.mode == DualMode::circular);
  CHECK(dc.rail_params[0].beta == 0.3);
  CHECK(dc.rail_params[1].beta ==
        doctest::Approx(0.3 * circular_beta_ratio(200.0)).epsilon(1e-14));

  auto noise_cfg = parse_config_text(R"({
    "magnetics": {"noise": {"sigma_B_gauss": 2e-4, "mains_amp_gauss": 1e-4,
                             "mains_freq_Hz": 60.0, "mains_triggered": true}}
  })");
  auto noise = build_noise(noise_cfg);
  CHECK(noise.sigma_B_gauss == 2e-4);
  CHECK(noise.mains_amp_gauss == 1e-4);
  CHECK(noise.mains_freq_Hz == 60.0);
  CHECK(noise.mains_triggered);
}

TEST_CASE("resolution honours calibration and trim targets") {
  auto cfg = parse_config_text(R"({
    "magnetics": {"calibrate_rail1_efficiency": 0.25,
                   "rail2_efficiency_target": 0.2},
    "grid": {"Nz": 128}
  })");
  auto d = resolve_dual_rail(cfg);
  CHECK(d.rail_params[0].beta > 0.0);
  CHECK(d.rail2_energy_trim > 0.0);
  CHECK(d.rail2_energy_trim <= 1.0);

  auto rec = run_dual_rail(d, NoiseModel{}, cfg.run.seed);
  CHECK(rec.metrics.eta1 == doctest::Approx(0.25).epsilon(2e-3));
  CHECK(rec.metrics.eta2 == doctest::Approx(0.2).epsilon(1e-6));

  // Trim can only lower the rail-2 efficiency.
  auto impossible = parse_config_text(R"({
    "magnetics": {"beta": 0.05, "rail2_efficiency_target": 0.9},
    "grid": {"Nz": 64}
  })");
  CHECK_THROWS_AS(resolve_dual_rail(impossible), ConfigError);
}
