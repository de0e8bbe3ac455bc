#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "dualgem/gem.hpp"
#include "dualgem/polarisation.hpp"

namespace dualgem {

// Shot-to-shot bias-field noise: quasi-static Gaussian deviation plus an
// optional mains harmonic sampled at a random phase per shot (the 50 Hz
// period is ~1000x the storage time, so the harmonic is frozen within a
// shot). Mains triggering locks the phase instead.
struct NoiseModel {
  double sigma_B_gauss = 0.0;
  double mains_amp_gauss = 0.0;
  double mains_freq_Hz = 50.0;
  bool mains_triggered = false;
  double trigger_phase_rad = 0.0;
};

enum class DualMode { linear, circular };

struct DualRailConfig {
  double B0_gauss = 1.0;
  double delta_MHz = 200.0;
  DualMode mode = DualMode::linear;
  PolarisationState input_pol = PolarisationState::H();
  PolarisationState control_pol = PolarisationState::V();
  // Shared gradient program; bias is set per rail to +-delta0 internally.
  GradientProgram program;
  std::array<GemParams, 2> rail_params;
  std::array<PulseEnvelope, 2> inputs;
  // Rail carriers; must equal {+delta0, -delta0} (rail 1 is the m_F = +1
  // coherence, combined with the e^{-i 2 pi delta0 t} factor).
  std::array<double, 2> rail_carrier_MHz = {0.0, 0.0};
  // Phenomenological echo-energy trim on rail 2 in (0, 1]; models the
  // control-polarisation tuning that balances measured efficiencies.
  double rail2_energy_trim = 1.0;
  CouplingOptions coupling_options;
};

struct DualRailMetrics {
  double eta1 = 0.0;
  double eta2 = 0.0;
  double eta_combined = 0.0;
  double v_measured = 0.0;
  double v_predicted = 0.0;
  double mode_overlap = 0.0;
  double temporal_match = 0.0;
  double delta_phi_deg = 0.0;
  double delta_B_gauss = 0.0;  // noise draw applied to this shot
  double beta1 = 0.0;
  double beta2 = 0.0;
};

struct RailOutput {
  StorageResult storage;
  EnergyLedger ledger;          // pre-trim bookkeeping
  CoupledMode mode;
  std::complex<double> input_projection;  // <P_i | p_in>
  double input_energy_pre_projection = 0.0;
  double storage_time_us = 0.0;  // 2 (t_s - input centroid)
};

struct EchoRecord {
  std::vector<double> t_us;
  std::array<RailOutput, 2> rails;
  // Rail envelopes entering the combination (projection, trim, and noise
  // phases applied; echo window only for phases/trim).
  std::array<std::vector<std::complex<double>>, 2> envelopes;
  // Combined two-component field sampled on the clock.
  std::vector<double> beat_intensity;
  std::vector<double> beat_envelope;  // |A1|^2 + |A2|^2
  std::vector<std::complex<double>> beat_demod;  // conj(A1) A2 <P1|P2>
  double delta0_MHz = 0.0;
  double window_lo_us = 0.0;  // visibility/phase analysis window
  double window_hi_us = 0.0;
  double reference_phase_deg = 0.0;
  DualRailMetrics metrics;
};

// Fringe-visibility prediction 2 sqrt(eta1 eta2)/(eta1+eta2) * overlap *
// temporal_match.
double predicted_visibility(double eta1, double eta2, double overlap,
                            double temporal_match);

// Recall efficiency: echo-window energy over input energy. Throws
// ConfigError on zero input energy.
double efficiency(const std::vector<double>& t_us,
                  const std::vector<std::complex<double>>& input_trace,
                  const std::vector<std::complex<double>>& output_trace,
                  double flip_time_us);

struct BeatSeries {
  std::vector<double> t_us;
  std::vector<std::complex<double>> demod;  // complex beat at +2 delta0
  double window_lo_us = 0.0;
  double window_hi_us = 0.0;
};

// Phase of the echo beat minus phase of the reference beat, degrees wrapped
// to (-180, 180]. Throws NumericalError when either fringe integral is
// unresolvable (|Z| ~ 0).
double relative_phase(const BeatSeries& echo, const BeatSeries& reference);

// Full two-rail storage/recall shot. Differential storage phases from the
// noise draw (seeded) are applied to the echo windows before combination.
EchoRecord run_dual_rail(const DualRailConfig& config, const NoiseModel& noise,
                         std::uint64_t seed);

struct McPhaseResult {
  double mean_deg = 0.0;
  double std_deg = 0.0;
  double closed_form_std_deg = 0.0;  // 360 * 2 * (mu_B/h) * sigma_B * T
  std::vector<double> samples_deg;
  std::vector<double> delta_B_gauss;
};

// Monte-Carlo distribution of relative_phase across shots. The noiseless
// dynamics are integrated once; each trial applies its analytic storage
// phases and re-runs the estimator. Trial i draws from an independent
// seeded stream, so aggregation order never changes results.
McPhaseResult phase_noise_mc(const DualRailConfig& config,
                             const NoiseModel& noise, int trials,
                             std::uint64_t seed);

struct AsymmetryRow {
  double beta = 0.0;
  double eta1 = 0.0;
  double eta2 = 0.0;
  double asymmetry = 0.0;  // |eta1 - eta2| / (eta1 + eta2)
};

// Circular configuration: each rail stores a single sigma+ path, so the
// rail couplings (hence betas) are unequal; the efficiency asymmetry decays
// to zero as beta grows.
std::vector<AsymmetryRow> circular_mode_asymmetry(
    const DualRailConfig& base, const std::vector<double>& beta_ladder);

// Squared rail-2/rail-1 coupling ratio in the circular configuration.
double circular_beta_ratio(double delta_MHz,
                           const CouplingOptions& options = {});

// Bisection on beta so the measured rail-1 efficiency (projection included)
// hits the target. Throws ConfigError when the target is unreachable.
double calibrate_beta(const DualRailConfig& base, double target_eta1,
                      double tol = 1e-4, int max_iter = 60);

}  // namespace dualgem
