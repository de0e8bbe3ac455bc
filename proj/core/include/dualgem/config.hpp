#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "dualgem/dual_rail.hpp"

namespace dualgem {

// Scenario file schema (JSON). Every key is optional; defaults below are
// the documented ones. Unknown keys are rejected with a nearest-key
// suggestion. See README for the full grammar.
struct ScenarioConfig {
  struct Atoms {
    double detuning_MHz = 200.0;
    double gamma0_per_us = 0.0;
  } atoms;

  struct Noise {
    double sigma_B_gauss = 0.0;
    double mains_amp_gauss = 0.0;
    double mains_freq_Hz = 50.0;
    bool mains_triggered = false;
  };

  struct Magnetics {
    double B0_gauss = 1.0;
    // Strength: exactly one of beta / beta_per_rail /
    // calibrate_rail1_efficiency may be given (default beta = 0.2).
    std::optional<double> beta;
    std::optional<std::array<double, 2>> beta_per_rail;
    std::optional<double> calibrate_rail1_efficiency;
    // Optional measured rail-2 efficiency to trim to (e.g. 0.32).
    std::optional<double> rail2_efficiency_target;
    double gradient_MHz_per_L = 1.0;
    double flip_time_us = 22.0;
    double offset_MHz = 0.0;
    Noise noise;
  } magnetics;

  struct Signals {
    std::string shape = "gaussian";
    double width_us = 10.0;   // intensity FWHM
    double centre_us = 10.0;
    double amplitude = 1.0;
    std::string polarisation = "H";
    // Rail-2 pulse centre offset (temporal-match control).
    double rail2_centre_offset_us = 0.0;
  } signals;

  struct Control {
    std::string polarisation = "V";
    std::string mode = "linear";  // linear | circular
  } control;

  struct Grid {
    int Nz = 256;
    double dt_us = 0.0;  // 0 = auto from the stability bound
    double t_end_us = 60.0;
  } grid;

  struct Run {
    std::uint64_t seed = 12345;
    int trials = 1000;
  } run;

  struct Spectrum {
    double od0 = 10.0;
    double gamma_MHz = 0.05;
    int points = 401;
    double span_MHz = 0.0;  // 0 = auto: delta0 + gradient + wings
  } spectrum;

  struct Sweep {
    std::string param = "beta";  // beta | delta
    std::vector<double> values;  // empty = documented default ladder
  } sweep;
};

// Parse + validate. Errors are ConfigError naming the offending key and the
// violated constraint; unknown keys get a nearest-key suggestion.
ScenarioConfig parse_config_file(const std::string& path);
ScenarioConfig parse_config_text(const std::string& text);

// Canonical serialized form with every default materialized. Reparsing this
// text yields an identical config, and it is what metrics records embed.
std::string effective_config_json(const ScenarioConfig& config);

// FNV-1a 64-bit digest of the canonical form, as 16 hex digits.
std::string config_digest(const ScenarioConfig& config);

// "H" | "V" | "L" | "R" (case-insensitive).
PolarisationState parse_polarisation(const std::string& token);

// Structural translation (no simulation): polarisations, program, rail
// params, envelopes, carriers. Strength comes from beta/beta_per_rail when
// given; a pending calibration target leaves beta at the default.
DualRailConfig build_dual_rail(const ScenarioConfig& config);

// Full resolution: runs the beta calibration and rail-2 trim when the
// config requests them. The returned config reproduces the targets.
DualRailConfig resolve_dual_rail(const ScenarioConfig& config);

NoiseModel build_noise(const ScenarioConfig& config);

}  // namespace dualgem
