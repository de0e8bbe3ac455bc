#include "dualgem/gem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dualgem/atomic.hpp"
#include "dualgem/errors.hpp"

namespace dualgem {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::complex<double> kI{0.0, 1.0};
constexpr double kStabilityBound = 0.1;  // rad per step
const double kLn2 = std::log(2.0);

using cvec = std::vector<std::complex<double>>;

double trapz_norm2(const cvec& v, double h) {
  if (v.size() < 2) return 0.0;
  double sum = 0.5 * (std::norm(v.front()) + std::norm(v.back()));
  for (size_t k = 1; k + 1 < v.size(); ++k) sum += std::norm(v[k]);
  return sum * h;
}

}  // namespace

double trace_energy(const std::vector<double>& t, const cvec& trace,
                    double t_lo, double t_hi) {
  double sum = 0.0;
  for (size_t k = 0; k + 1 < t.size(); ++k) {
    const double a = std::max(t[k], t_lo), b = std::min(t[k + 1], t_hi);
    if (b <= a) continue;
    const double h = t[k + 1] - t[k];
    const double i0 = std::norm(trace[k]), i1 = std::norm(trace[k + 1]);
    const double fa = (a - t[k]) / h, fb = (b - t[k]) / h;
    const double ia = i0 + (i1 - i0) * fa, ib = i0 + (i1 - i0) * fb;
    sum += 0.5 * (ia + ib) * (b - a);
  }
  return sum;
}

double trace_centroid(const std::vector<double>& t, const cvec& trace,
                      double t_lo, double t_hi) {
  double num = 0.0, den = 0.0;
  for (size_t k = 0; k < t.size(); ++k) {
    if (t[k] <= t_lo || t[k] > t_hi) continue;
    const double w = std::norm(trace[k]);
    num += w * t[k];
    den += w;
  }
  return den > 0.0 ? num / den : 0.0;
}

double detuning_profile(const GradientProgram& program, double z,
                        double t_us) {
  return program.bias_MHz + program.slope_at(t_us) * (z - 0.5) +
         program.offset_MHz;
}

std::complex<double> PulseEnvelope::operator()(double t_us) const {
  return eval ? eval(t_us) : std::complex<double>{0.0, 0.0};
}

PulseEnvelope PulseEnvelope::gaussian(double width_us, double centre_us,
                                      std::complex<double> amplitude,
                                      double carrier_MHz) {
  if (width_us <= 0.0) throw ConfigError("PulseEnvelope: width_us must be > 0");
  PulseEnvelope p;
  p.shape = "gaussian";
  p.width_us = width_us;
  p.centre_us = centre_us;
  p.amplitude = amplitude;
  p.carrier_MHz = carrier_MHz;
  p.eval = [width_us, centre_us, amplitude, carrier_MHz](double t) {
    const double x = (t - centre_us) / width_us;
    return amplitude * std::exp(-2.0 * kLn2 * x * x) *
           std::exp(-kI * kTwoPi * carrier_MHz * (t - centre_us));
  };
  return p;
}

PulseEnvelope PulseEnvelope::none() {
  PulseEnvelope p;
  p.shape = "none";
  p.eval = [](double) { return std::complex<double>{0.0, 0.0}; };
  return p;
}

PulseEnvelope PulseEnvelope::scaled(std::complex<double> factor) const {
  PulseEnvelope p = *this;
  p.amplitude *= factor;
  auto base = eval;
  p.eval = [base, factor](double t) {
    return base ? factor * base(t) : std::complex<double>{0.0, 0.0};
  };
  return p;
}

double PulseEnvelope::bandwidth_MHz() const {
  // Gaussian intensity FWHM time-bandwidth product 2 ln2 / pi.
  if (shape == "gaussian" && width_us > 0.0)
    return 2.0 * kLn2 / std::numbers::pi / width_us;
  return 0.0;
}

namespace {

struct Workspace {
  cvec field;        // slaved field at the current stage
  cvec k1, k2, k3, k4, stage;
};

// E[0] = boundary; dE/dz = i G sigma by cumulative trapezoid.
void solve_field(const cvec& sigma, std::complex<double> boundary, double g,
                 double dz, cvec& field) {
  field[0] = boundary;
  const std::complex<double> w = kI * g * 0.5 * dz;
  for (size_t k = 1; k < sigma.size(); ++k) {
    field[k] = field[k - 1] + w * (sigma[k - 1] + sigma[k]);
  }
}

}  // namespace

double stable_dt(const GemParams& params, const GradientProgram& program,
                 const PulseEnvelope& input) {
  const double eta = program.eta_MHz_per_L;
  const double g = std::sqrt(kTwoPi * params.beta * std::abs(eta));
  const double max_det = std::abs(eta) * 0.5 +
                         std::abs(program.offset_MHz + params.rail_offset_MHz) +
                         std::abs(input.carrier_MHz);
  // Keep the phase rotation per step well inside the RK4 accuracy region;
  // the coupling and decay rates join the budget, and dt never exceeds 0.1.
  return kStabilityBound /
         std::max(kTwoPi * max_det + params.gamma0_per_us + g, 1.0);
}

EvolveResult evolve(const GemParams& params, const GradientProgram& program,
                    const PulseEnvelope& input) {
  if (params.beta < 0.0) throw ConfigError("GemParams: beta must be >= 0");
  if (params.gamma0_per_us < 0.0)
    throw ConfigError("GemParams: gamma0_per_us must be >= 0");
  if (params.n_z < 16) throw ConfigError("GemParams: n_z must be >= 16");
  if (params.t_end_us <= 0.0)
    throw ConfigError("GemParams: t_end_us must be > 0");

  const int nz = params.n_z;
  const double dz = 1.0 / nz;
  const double eta = program.eta_MHz_per_L;
  const double g = std::sqrt(kTwoPi * params.beta * std::abs(eta));
  const double gamma = params.gamma0_per_us;

  // Worst-case rail-frame detuning (bias is carrier bookkeeping, not
  // dynamics; the rail integrates in its own rotating frame).
  const double frame_offset = program.offset_MHz + params.rail_offset_MHz;
  const double max_det =
      std::abs(eta) * 0.5 + std::abs(frame_offset) + std::abs(input.carrier_MHz);

  double dt = params.dt_us;
  if (dt <= 0.0) dt = stable_dt(params, program, input);
  if (kTwoPi * max_det * dt > kStabilityBound * (1.0 + 1e-9)) {
    throw NumericalError(
        "evolve: stability bound violated, 2*pi*max|delta'|*dt = " +
        std::to_string(kTwoPi * max_det * dt) + " > 0.1; reduce dt_us");
  }

  const int n_steps = std::max(1, static_cast<int>(std::ceil(
                                      params.t_end_us / dt - 1e-9)));

  EvolveResult res;
  res.dt_us = dt;
  res.n_z = nz;
  res.t_us.resize(n_steps + 1);
  res.input_trace.resize(n_steps + 1);
  res.output_trace.resize(n_steps + 1);
  res.final_state.sigma.assign(nz + 1, {0.0, 0.0});
  res.final_state.field.assign(nz + 1, {0.0, 0.0});

  const double broadened_width = std::abs(eta);
  res.bandwidth_warning =
      broadened_width > 0.0 && input.bandwidth_MHz() > broadened_width;

  Workspace ws;
  ws.field.assign(nz + 1, {0.0, 0.0});
  ws.k1.assign(nz + 1, {0.0, 0.0});
  ws.k2 = ws.k1;
  ws.k3 = ws.k1;
  ws.k4 = ws.k1;
  ws.stage = ws.k1;

  cvec& sigma = res.final_state.sigma;

  auto rhs = [&](const cvec& s, double t, cvec& out, cvec& field) {
    solve_field(s, input(t), g, dz, field);
    const double slope = program.slope_at(t);
    for (int k = 0; k <= nz; ++k) {
      const double det = slope * (k * dz - 0.5) + frame_offset;
      out[k] = -(gamma + kI * kTwoPi * det) * s[k] + kI * g * field[k];
    }
  };

  double stored_prev = 0.0;
  double peak_flux = 0.0;
  double max_resid_abs = 0.0;
  double decayed = 0.0;

  for (int step = 0; step <= n_steps; ++step) {
    const double t = step * dt;
    res.t_us[step] = t;
    // Output sample at the current instant, before advancing.
    rhs(sigma, t, ws.k1, ws.field);
    res.input_trace[step] = input(t);
    res.output_trace[step] = ws.field[nz];
    if (step == n_steps) {
      res.final_state.field = ws.field;
      break;
    }

    // Classic RK4; the field is re-slaved at every stage.
    for (int k = 0; k <= nz; ++k)
      ws.stage[k] = sigma[k] + 0.5 * dt * ws.k1[k];
    rhs(ws.stage, t + 0.5 * dt, ws.k2, ws.field);
    for (int k = 0; k <= nz; ++k)
      ws.stage[k] = sigma[k] + 0.5 * dt * ws.k2[k];
    rhs(ws.stage, t + 0.5 * dt, ws.k3, ws.field);
    for (int k = 0; k <= nz; ++k) ws.stage[k] = sigma[k] + dt * ws.k3[k];
    rhs(ws.stage, t + dt, ws.k4, ws.field);
    for (int k = 0; k <= nz; ++k) {
      sigma[k] += dt / 6.0 *
                  (ws.k1[k] + 2.0 * ws.k2[k] + 2.0 * ws.k3[k] + ws.k4[k]);
    }

    // Conservation bookkeeping: d/dt int|sigma|^2 dz =
    // -2 gamma int|sigma|^2 dz + |E_in|^2 - |E_out|^2.
    solve_field(sigma, input(t + dt), g, dz, ws.field);
    const double stored_new = trapz_norm2(sigma, dz);
    const double flux_in_0 = std::norm(res.input_trace[step]);
    const double flux_out_0 = std::norm(res.output_trace[step]);
    const double flux_in_1 = std::norm(input(t + dt));
    const double flux_out_1 = std::norm(ws.field[nz]);
    const double flux = 0.5 * dt *
                        ((flux_in_0 - flux_out_0) + (flux_in_1 - flux_out_1));
    const double decay_inc = gamma * dt * (stored_prev + stored_new);
    decayed += decay_inc;
    max_resid_abs = std::max(
        max_resid_abs, std::abs(stored_new - stored_prev + decay_inc - flux));
    peak_flux = std::max({peak_flux, flux_in_0, flux_in_1});
    stored_prev = stored_new;

    if (step % 64 == 0 &&
        (!std::isfinite(sigma[nz / 2].real()) ||
         !std::isfinite(res.output_trace[step].real()))) {
      throw NumericalError("evolve: non-finite state at t = " +
                           std::to_string(t) + " us (step " +
                           std::to_string(step) + ")");
    }
  }

  for (const auto& v : res.output_trace) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw NumericalError("evolve: non-finite output trace");
    }
  }

  res.decayed_energy = decayed;
  res.max_flux_residual =
      peak_flux > 0.0 ? max_resid_abs / (dt * peak_flux) : 0.0;
  return res;
}

StorageResult run_storage_recall(const GemParams& params,
                                 const GradientProgram& program,
                                 const PulseEnvelope& input) {
  if (program.flip_time_us <= 0.0 ||
      program.flip_time_us >= params.t_end_us) {
    throw ConfigError("run_storage_recall: flip time must lie inside (0, t_end)");
  }
  StorageResult sr;
  sr.run = evolve(params, program, input);
  sr.flip_time_us = program.flip_time_us;

  const auto& t = sr.run.t_us;
  const double t_end = t.back();
  sr.input_energy = trace_energy(t, sr.run.input_trace, 0.0, t_end);
  sr.transmitted_energy =
      trace_energy(t, sr.run.output_trace, 0.0, program.flip_time_us);
  sr.echo_energy =
      trace_energy(t, sr.run.output_trace, program.flip_time_us, t_end);
  sr.residual_energy =
      trapz_norm2(sr.run.final_state.sigma, 1.0 / sr.run.n_z);
  sr.echo_centroid_us = trace_centroid(t, sr.run.output_trace,
                                        program.flip_time_us, t_end);
  if (sr.input_energy > 0.0) {
    sr.transmitted_fraction = sr.transmitted_energy / sr.input_energy;
    sr.echo_fraction = sr.echo_energy / sr.input_energy;
  }
  return sr;
}

EnergyLedger energy_ledger(const StorageResult& result, double tolerance) {
  EnergyLedger ledger;
  ledger.tolerance = tolerance;
  ledger.input = result.input_energy;
  ledger.transmitted = result.transmitted_energy;
  ledger.echo = result.echo_energy;
  ledger.residual = result.residual_energy;
  ledger.decayed = result.run.decayed_energy;
  const double sum =
      ledger.transmitted + ledger.echo + ledger.residual + ledger.decayed;
  ledger.closure_residual =
      ledger.input > 0.0 ? std::abs(ledger.input - sum) / ledger.input : 0.0;
  ledger.closed = ledger.closure_residual <= tolerance;
  return ledger;
}

std::vector<double> absorption_spectrum(double B0_gauss, double eta_MHz_per_L,
                                        const SpectrumParams& params,
                                        const std::vector<double>& probe_MHz) {
  if (params.od0 < 0.0 || params.gamma_MHz <= 0.0) {
    throw ConfigError("SpectrumParams: od0 >= 0 and gamma_MHz > 0 required");
  }
  const double delta0 = rb87::mu_B_over_h * B0_gauss;
  const double gamma_ang = kTwoPi * params.gamma_MHz;
  const int signs[3] = {-1, 0, 1};

  std::vector<double> transmission;
  transmission.reserve(probe_MHz.size());
  for (double delta : probe_MHz) {
    double od = 0.0;
    for (int line = 0; line < 3; ++line) {
      const double od_line = params.od0 * params.strength[line];
      if (od_line <= 0.0) continue;
      const int s = signs[line];
      const double pos = s * delta0;
      if (s == 0 || eta_MHz_per_L == 0.0) {
        const double u = kTwoPi * (delta - pos);
        od += od_line * gamma_ang * gamma_ang /
              (gamma_ang * gamma_ang + u * u);
      } else {
        // Slice integral over the linear gradient: exact atan form.
        const double g2 = od_line * gamma_ang / 2.0;
        const double u0 = kTwoPi * (delta - pos + s * eta_MHz_per_L * 0.5);
        const double u1 = kTwoPi * (delta - pos - s * eta_MHz_per_L * 0.5);
        od += 2.0 * g2 *
              (std::atan(u0 / gamma_ang) - std::atan(u1 / gamma_ang)) /
              (kTwoPi * s * eta_MHz_per_L);
      }
    }
    transmission.push_back(std::exp(-od));
  }
  return transmission;
}

}  // namespace dualgem
