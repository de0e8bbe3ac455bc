#include "dualgem/dual_rail.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "dualgem/atomic.hpp"
#include "dualgem/errors.hpp"

namespace dualgem {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::complex<double> kI{0.0, 1.0};

using cvec = std::vector<std::complex<double>>;

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform in (0, 1]; avoids log(0) in Box-Muller.
double uniform01(std::mt19937_64& rng) {
  return 1.0 - (rng() >> 11) * 0x1.0p-53;
}

// Explicit Box-Muller: std::normal_distribution's sample sequence is
// implementation-defined, which would break bit-identical outputs.
double gauss(std::mt19937_64& rng) {
  const double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double sample_delta_B(const NoiseModel& noise, std::mt19937_64& rng) {
  const double g = gauss(rng);
  const double u = uniform01(rng);
  double dB = noise.sigma_B_gauss * g;
  if (noise.mains_amp_gauss > 0.0) {
    const double phase =
        noise.mains_triggered ? noise.trigger_phase_rad : kTwoPi * u;
    dB += noise.mains_amp_gauss * std::sin(phase);
  }
  return dB;
}

double wrap_deg(double phi) {
  phi = std::fmod(phi + 180.0, 360.0);
  if (phi <= 0.0) phi += 360.0;
  return phi - 180.0;
}

std::complex<double> window_sum(const std::vector<double>& t, const cvec& v,
                                double lo, double hi, double dt) {
  std::complex<double> z = 0.0;
  for (size_t k = 0; k < t.size(); ++k) {
    if (t[k] > lo && t[k] <= hi) z += v[k] * dt;
  }
  return z;
}

}  // namespace

double predicted_visibility(double eta1, double eta2, double overlap,
                            double temporal_match) {
  if (eta1 < 0.0 || eta2 < 0.0 || eta1 + eta2 <= 0.0) {
    throw ConfigError("predicted_visibility: efficiencies must be >= 0 and not both zero");
  }
  return 2.0 * std::sqrt(eta1 * eta2) / (eta1 + eta2) * overlap *
         temporal_match;
}

double efficiency(const std::vector<double>& t_us, const cvec& input_trace,
                  const cvec& output_trace, double flip_time_us) {
  const double e_in = trace_energy(t_us, input_trace, 0.0, t_us.back());
  if (e_in <= 0.0) throw ConfigError("efficiency: zero input energy");
  return trace_energy(t_us, output_trace, flip_time_us, t_us.back()) / e_in;
}

double relative_phase(const BeatSeries& echo, const BeatSeries& reference) {
  auto integral = [](const BeatSeries& b) {
    std::complex<double> z = 0.0;
    double scale = 0.0;
    for (size_t k = 0; k < b.t_us.size(); ++k) {
      if (b.t_us[k] > b.window_lo_us && b.t_us[k] <= b.window_hi_us) {
        z += b.demod[k];
        scale += std::abs(b.demod[k]);
      }
    }
    if (std::abs(z) <= 1e-12 * std::max(scale, 1e-300)) {
      throw NumericalError("relative_phase: unresolvable fringe");
    }
    return z;
  };
  const double phi =
      std::arg(integral(echo)) - std::arg(integral(reference));
  return wrap_deg(phi * 180.0 / std::numbers::pi);
}

double circular_beta_ratio(double delta_MHz, const CouplingOptions& options) {
  const PolarisationState sig = PolarisationState::R();
  const CouplingPair p1 = effective_couplings(1, sig, delta_MHz, options);
  const CouplingPair p2 = effective_couplings(2, sig, delta_MHz, options);
  return std::norm(p2.g_plus) / std::norm(p1.g_plus);
}

namespace {

struct RailPlan {
  CoupledMode mode;
  std::complex<double> projection;  // <P_i|p_in>
  GemParams params;
  GradientProgram program;
};

// Coupled modes, projections, and a shared clock for both rails.
std::array<RailPlan, 2> plan_rails(const DualRailConfig& config,
                                   double delta0) {
  std::array<RailPlan, 2> plans;
  const PolarisationState input = config.input_pol.normalized();
  for (int i = 0; i < 2; ++i) {
    RailPlan& plan = plans[i];
    if (config.mode == DualMode::linear) {
      plan.mode = coupled_mode(effective_couplings(
          i + 1, config.control_pol, config.delta_MHz,
          config.coupling_options));
    } else {
      // Circular configuration: both rails store the sigma+ component; the
      // coupling imbalance lives in the per-rail betas.
      plan.mode = {PolarisationState::R(),
                   std::abs(effective_couplings(i + 1, PolarisationState::R(),
                                                config.delta_MHz,
                                                config.coupling_options)
                                .g_plus)};
    }
    plan.projection = inner(plan.mode.pol, input);
    plan.params = config.rail_params[i];
    plan.program = config.program;
    plan.program.bias_MHz = i == 0 ? delta0 : -delta0;
  }

  double dt = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double rail_dt =
        plans[i].params.dt_us > 0.0
            ? plans[i].params.dt_us
            : stable_dt(plans[i].params, plans[i].program, config.inputs[i]);
    dt = i == 0 ? rail_dt : std::min(dt, rail_dt);
  }
  plans[0].params.dt_us = dt;
  plans[1].params.dt_us = dt;
  if (plans[0].params.t_end_us != plans[1].params.t_end_us) {
    throw ConfigError("run_dual_rail: rails must share t_end_us");
  }
  return plans;
}

}  // namespace

EchoRecord run_dual_rail(const DualRailConfig& config, const NoiseModel& noise,
                         std::uint64_t seed) {
  const double delta0 = raman_line_positions(config.B0_gauss)[2];
  if (delta0 <= 0.0) {
    throw ConfigError("run_dual_rail: B0 must split the rails (delta0 > 0), "
                      "the beat is degenerate otherwise");
  }
  if (std::abs(config.rail_carrier_MHz[0] - delta0) > 1e-9 ||
      std::abs(config.rail_carrier_MHz[1] + delta0) > 1e-9) {
    throw ConfigError(
        "run_dual_rail: rail carriers must be {+delta0, -delta0} = {" +
        std::to_string(delta0) + ", " + std::to_string(-delta0) + "} MHz");
  }
  if (config.rail2_energy_trim <= 0.0 || config.rail2_energy_trim > 1.0) {
    throw ConfigError("run_dual_rail: rail2_energy_trim must be in (0, 1]");
  }

  auto plans = plan_rails(config, delta0);

  EchoRecord rec;
  rec.delta0_MHz = delta0;
  const double t_flip = config.program.flip_time_us;

  // Independent single-rail storage/recall runs (the model has no
  // cross-rail coupling; delta0 only enters the combination below).
  for (int i = 0; i < 2; ++i) {
    RailOutput& rail = rec.rails[i];
    rail.mode = plans[i].mode;
    rail.input_projection = plans[i].projection;
    const PulseEnvelope projected =
        config.inputs[i].scaled(plans[i].projection);
    rail.storage = run_storage_recall(plans[i].params, plans[i].program,
                                      projected);
    rail.ledger = energy_ledger(rail.storage);
    const auto& t = rail.storage.run.t_us;
    {
      // Beam energy before the coupled-mode projection, on the same clock.
      cvec raw(t.size());
      for (size_t k = 0; k < t.size(); ++k) raw[k] = config.inputs[i](t[k]);
      rail.input_energy_pre_projection = trace_energy(t, raw, 0.0, t.back());
    }
    const double centroid_in =
        trace_centroid(t, rail.storage.run.input_trace, 0.0, t_flip);
    rail.storage_time_us = 2.0 * (t_flip - centroid_in);
  }
  rec.t_us = rec.rails[0].storage.run.t_us;
  const size_t n = rec.t_us.size();
  if (rec.rails[1].storage.run.t_us.size() != n) {
    throw NumericalError("run_dual_rail: rail clocks diverged");
  }

  // One noise draw per shot; both coherences shift oppositely.
  std::uint64_t state = seed;
  std::mt19937_64 rng(splitmix64(state));
  const double dB = sample_delta_B(noise, rng);
  const double dline = rb87::mu_B_over_h * dB;  // MHz
  const std::array<double, 2> storage_phase = {
      -kTwoPi * dline * rec.rails[0].storage_time_us,
      +kTwoPi * dline * rec.rails[1].storage_time_us};

  const double root_trim = std::sqrt(config.rail2_energy_trim);
  for (int i = 0; i < 2; ++i) {
    cvec env = rec.rails[i].storage.run.output_trace;
    const std::complex<double> phase =
        std::exp(kI * storage_phase[static_cast<size_t>(i)]);
    for (size_t k = 0; k < n; ++k) {
      if (rec.t_us[k] > t_flip) {
        env[k] *= phase;
        if (i == 1) env[k] *= root_trim;
      }
    }
    rec.envelopes[i] = std::move(env);
  }

  // Combined vector field A1 P1 e^{-i 2 pi delta0 t} + A2 P2 e^{+i ...}.
  const PolarisationState p1 = rec.rails[0].mode.pol;
  const PolarisationState p2 = rec.rails[1].mode.pol;
  const std::complex<double> mode_inner = inner(p1, p2);
  rec.beat_intensity.resize(n);
  rec.beat_envelope.resize(n);
  rec.beat_demod.resize(n);
  for (size_t k = 0; k < n; ++k) {
    const std::complex<double> c1 =
        rec.envelopes[0][k] * std::exp(-kI * kTwoPi * delta0 * rec.t_us[k]);
    const std::complex<double> c2 =
        rec.envelopes[1][k] * std::exp(+kI * kTwoPi * delta0 * rec.t_us[k]);
    const std::complex<double> vL = c1 * p1.aL + c2 * p2.aL;
    const std::complex<double> vR = c1 * p1.aR + c2 * p2.aR;
    rec.beat_intensity[k] = std::norm(vL) + std::norm(vR);
    rec.beat_envelope[k] =
        std::norm(rec.envelopes[0][k]) + std::norm(rec.envelopes[1][k]);
    rec.beat_demod[k] =
        std::conj(rec.envelopes[0][k]) * rec.envelopes[1][k] * mode_inner;
  }

  // Analysis window around the combined echo centroid.
  const double t_end = rec.t_us.back();
  cvec env_amp(n);
  for (size_t k = 0; k < n; ++k)
    env_amp[k] = std::sqrt(rec.beat_envelope[k]);
  const double tc = trace_centroid(rec.t_us, env_amp, t_flip, t_end);
  double wbar = 0.5 * (config.inputs[0].width_us + config.inputs[1].width_us);
  if (wbar <= 0.0) wbar = (t_end - t_flip) / 3.0;
  rec.window_lo_us = std::max(t_flip, tc - 1.5 * wbar);
  rec.window_hi_us = std::min(t_end, tc + 1.5 * wbar);

  // Metrics.
  DualRailMetrics& m = rec.metrics;
  m.delta_B_gauss = dB;
  m.beta1 = config.rail_params[0].beta;
  m.beta2 = config.rail_params[1].beta;
  m.mode_overlap = overlap(p1, p2);

  const double e1_pre = rec.rails[0].input_energy_pre_projection;
  const double e2_pre = rec.rails[1].input_energy_pre_projection;
  if (e1_pre + e2_pre <= 0.0) {
    throw ConfigError("run_dual_rail: both inputs carry zero energy");
  }
  const double echo1 = rec.rails[0].storage.echo_energy;
  const double echo2 =
      rec.rails[1].storage.echo_energy * config.rail2_energy_trim;
  m.eta1 = e1_pre > 0.0 ? echo1 / e1_pre : 0.0;
  m.eta2 = e2_pre > 0.0 ? echo2 / e2_pre : 0.0;
  m.eta_combined = (echo1 + echo2) / (e1_pre + e2_pre);

  // Temporal match of the input envelopes on the clock (the scalar
  // projection factors cancel in the normalized cross integral).
  const auto& u1 = rec.rails[0].storage.run.input_trace;
  const auto& u2 = rec.rails[1].storage.run.input_trace;
  std::complex<double> cross = 0.0;
  double n1 = 0.0, n2 = 0.0;
  for (size_t k = 0; k < n; ++k) {
    cross += std::conj(u1[k]) * u2[k];
    n1 += std::norm(u1[k]);
    n2 += std::norm(u2[k]);
  }
  m.temporal_match =
      n1 > 0.0 && n2 > 0.0 ? std::abs(cross) / std::sqrt(n1 * n2) : 0.0;

  const double dt = rec.rails[0].storage.run.dt_us;
  const std::complex<double> z_echo = window_sum(
      rec.t_us, rec.beat_demod, rec.window_lo_us, rec.window_hi_us, dt);
  double denom = 0.0;
  for (size_t k = 0; k < n; ++k) {
    if (rec.t_us[k] > rec.window_lo_us && rec.t_us[k] <= rec.window_hi_us)
      denom += rec.beat_envelope[k] * dt;
  }
  m.v_measured = denom > 0.0 ? 2.0 * std::abs(z_echo) / denom : 0.0;
  m.v_predicted = (m.eta1 > 0.0 && m.eta2 > 0.0)
                      ? predicted_visibility(m.eta1, m.eta2, m.mode_overlap,
                                             m.temporal_match)
                      : 0.0;

  // Beat phase relative to the (unstored) input reference pulses; the
  // input traces already carry their projection factors.
  cvec ref_demod(n);
  for (size_t k = 0; k < n; ++k)
    ref_demod[k] = std::conj(u1[k]) * u2[k] * mode_inner;
  BeatSeries echo_series{rec.t_us, rec.beat_demod, rec.window_lo_us,
                         rec.window_hi_us};
  BeatSeries ref_series{rec.t_us, ref_demod, 0.0, t_flip};
  rec.reference_phase_deg = 0.0;
  if (m.v_measured > 1e-9) {
    m.delta_phi_deg = relative_phase(echo_series, ref_series);
    std::complex<double> z_ref = window_sum(rec.t_us, ref_demod, 0.0, t_flip, dt);
    rec.reference_phase_deg = std::arg(z_ref) * 180.0 / std::numbers::pi;
  } else {
    m.delta_phi_deg = 0.0;
  }
  return rec;
}

McPhaseResult phase_noise_mc(const DualRailConfig& config,
                             const NoiseModel& noise, int trials,
                             std::uint64_t seed) {
  if (trials < 1) throw ConfigError("phase_noise_mc: trials must be >= 1");

  const NoiseModel quiet{};
  const EchoRecord base = run_dual_rail(config, quiet, seed);
  const double t_flip = config.program.flip_time_us;

  cvec ref_demod(base.t_us.size());
  {
    const auto& u1 = base.rails[0].storage.run.input_trace;  // projected
    const auto& u2 = base.rails[1].storage.run.input_trace;
    const std::complex<double> mode_inner =
        inner(base.rails[0].mode.pol, base.rails[1].mode.pol);
    for (size_t k = 0; k < base.t_us.size(); ++k)
      ref_demod[k] = std::conj(u1[k]) * u2[k] * mode_inner;
  }
  const BeatSeries ref_series{base.t_us, ref_demod, 0.0, t_flip};

  const double t_sum =
      base.rails[0].storage_time_us + base.rails[1].storage_time_us;

  McPhaseResult out;
  out.samples_deg.reserve(trials);
  out.delta_B_gauss.reserve(trials);
  // T for the closed form is the mean per-rail storage time; Delta_phi =
  // 2 pi (mu_B/h) dB (T1 + T2) = 360 deg * 2 * (mu_B/h) * dB * T_mean.
  out.closed_form_std_deg =
      360.0 * rb87::mu_B_over_h * noise.sigma_B_gauss * t_sum;

  BeatSeries echo_series{base.t_us, base.beat_demod, base.window_lo_us,
                         base.window_hi_us};
  double sum = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    std::uint64_t state = seed + 0x2545f4914f6cdd1dULL *
                                     static_cast<std::uint64_t>(trial + 1);
    std::mt19937_64 rng(splitmix64(state));
    const double dB = sample_delta_B(noise, rng);
    const double theta = kTwoPi * rb87::mu_B_over_h * dB * t_sum;
    const std::complex<double> rot = std::exp(kI * theta);
    echo_series.demod = base.beat_demod;
    for (auto& c : echo_series.demod) c *= rot;
    const double phi = relative_phase(echo_series, ref_series);
    out.samples_deg.push_back(phi);
    out.delta_B_gauss.push_back(dB);
    sum += phi;
  }
  out.mean_deg = sum / trials;
  double var = 0.0;
  for (double s : out.samples_deg) {
    var += (s - out.mean_deg) * (s - out.mean_deg);
  }
  out.std_deg = trials > 1 ? std::sqrt(var / (trials - 1)) : 0.0;
  return out;
}

std::vector<AsymmetryRow> circular_mode_asymmetry(
    const DualRailConfig& base, const std::vector<double>& beta_ladder) {
  for (size_t i = 1; i < beta_ladder.size(); ++i) {
    if (beta_ladder[i] <= beta_ladder[i - 1]) {
      throw ConfigError("circular_mode_asymmetry: beta ladder must increase");
    }
  }
  const double ratio =
      circular_beta_ratio(base.delta_MHz, base.coupling_options);
  std::vector<AsymmetryRow> rows;
  rows.reserve(beta_ladder.size());
  for (double beta : beta_ladder) {
    AsymmetryRow row;
    row.beta = beta;
    double eta[2];
    for (int i = 0; i < 2; ++i) {
      GemParams params = base.rail_params[i];
      params.beta = i == 0 ? beta : beta * ratio;
      GradientProgram program = base.program;
      program.bias_MHz = 0.0;
      const StorageResult sr =
          run_storage_recall(params, program, base.inputs[i]);
      eta[i] = sr.echo_fraction;
    }
    row.eta1 = eta[0];
    row.eta2 = eta[1];
    row.asymmetry = (eta[0] + eta[1]) > 0.0
                        ? std::abs(eta[0] - eta[1]) / (eta[0] + eta[1])
                        : 0.0;
    rows.push_back(row);
  }
  return rows;
}

double calibrate_beta(const DualRailConfig& base, double target_eta1,
                      double tol, int max_iter) {
  if (target_eta1 <= 0.0 || target_eta1 >= 1.0) {
    throw ConfigError("calibrate_beta: target efficiency must be in (0, 1)");
  }
  const double delta0 = raman_line_positions(base.B0_gauss)[2];
  auto plans = plan_rails(base, std::max(delta0, 1e-9));
  const double proj2 = std::norm(plans[0].projection);
  if (proj2 <= 0.0) {
    throw ConfigError("calibrate_beta: input orthogonal to the coupled mode");
  }

  auto measured = [&](double beta) {
    GemParams params = plans[0].params;
    params.beta = beta;
    params.dt_us = 0.0;  // re-derive the clock for each strength
    const StorageResult sr =
        run_storage_recall(params, plans[0].program, base.inputs[0]);
    return sr.echo_fraction * proj2;
  };

  double lo = 1e-4, hi = 4.0;
  double f_lo = measured(lo), f_hi = measured(hi);
  if (target_eta1 <= f_lo || target_eta1 >= f_hi) {
    throw ConfigError("calibrate_beta: target " + std::to_string(target_eta1) +
                      " outside reachable range [" + std::to_string(f_lo) +
                      ", " + std::to_string(f_hi) + "]");
  }
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < max_iter; ++it) {
    mid = 0.5 * (lo + hi);
    const double f = measured(mid);
    if (std::abs(f - target_eta1) <= tol) return mid;
    (f < target_eta1 ? lo : hi) = mid;
  }
  return mid;
}

}  // namespace dualgem
