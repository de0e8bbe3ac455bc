#include "dualgem/polarisation.hpp"

#include <cmath>
#include <string>

#include "dualgem/atomic.hpp"
#include "dualgem/errors.hpp"

namespace dualgem {

namespace {
constexpr std::complex<double> kI{0.0, 1.0};
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
}  // namespace

double PolarisationState::norm() const {
  return std::sqrt(std::norm(aL) + std::norm(aR));
}

PolarisationState PolarisationState::normalized() const {
  const double n = norm();
  if (n < 1e-300) throw ConfigError("PolarisationState: zero vector");
  return {aL / n, aR / n};
}

std::array<std::complex<double>, 2> PolarisationState::to_linear() const {
  return {(aL + aR) * kInvSqrt2, kI * (aL - aR) * kInvSqrt2};
}

PolarisationState PolarisationState::H() {
  return {kInvSqrt2, kInvSqrt2};
}
PolarisationState PolarisationState::V() {
  return {kI * kInvSqrt2, -kI * kInvSqrt2};
}
PolarisationState PolarisationState::L() { return {1.0, 0.0}; }
PolarisationState PolarisationState::R() { return {0.0, 1.0}; }

std::complex<double> inner(const PolarisationState& p1,
                           const PolarisationState& p2) {
  return std::conj(p1.aL) * p2.aL + std::conj(p1.aR) * p2.aR;
}

double overlap(const PolarisationState& p1, const PolarisationState& p2) {
  return std::abs(inner(p1.normalized(), p2.normalized()));
}

double stored_fraction(const PolarisationState& coupled_mode,
                       const PolarisationState& input) {
  const double amp = overlap(coupled_mode, input);
  return amp * amp;
}

std::array<double, 2> ellipse_axes(const PolarisationState& p) {
  const auto [ex, ey] = p.normalized().to_linear();
  const double s0 = std::norm(ex) + std::norm(ey);
  const double s1 = std::norm(ex) - std::norm(ey);
  const double s2 = 2.0 * std::real(std::conj(ex) * ey);
  const double lin = std::hypot(s1, s2);
  return {std::sqrt((s0 + lin) / 2.0), std::sqrt(std::max(0.0, (s0 - lin) / 2.0))};
}

double CouplingPair::g_cp() const {
  return std::sqrt(std::norm(g_minus) + std::norm(g_plus));
}

namespace {

void check_guard(double delta22, double delta21, double guard) {
  if (std::abs(delta22) < guard || std::abs(delta21) < guard) {
    throw ConfigError(
        "effective_couplings: detuning within " + std::to_string(guard) +
        " MHz of a one-photon resonance (Delta22=" + std::to_string(delta22) +
        ", Delta21=" + std::to_string(delta21) + ")");
  }
}

// Raman path amplitude |1,m> -> |F',m+q> -> |2,m>, divided by the path
// detuning. The same q drives both legs, so the control weight is Omega_q.
std::complex<double> coherence_coupling(int m, int q,
                                        const PolarisationState& control,
                                        double delta_MHz,
                                        const CouplingOptions& options) {
  static const TransitionTable table;
  const std::complex<double> omega = q > 0 ? control.aR : control.aL;
  std::complex<double> g = 0.0;
  for (int Fe = 2; Fe >= 1; --Fe) {
    if (std::abs(m + q) > Fe) continue;
    const LevelRef lower{false, 1, m};
    const LevelRef upper{false, 2, m};
    const LevelRef exc{true, Fe, m + q};
    double delta_path =
        Fe == 2 ? delta_MHz : delta_MHz + rb87::excited_splitting_MHz;
    if (options.include_excited_zeeman) {
      // Shift of the signal leg's transition moves the path off Delta.
      delta_path -= zeeman_shift(exc, options.B0_gauss) -
                    zeeman_shift(lower, options.B0_gauss);
    }
    g += omega * table.amplitude(lower, exc, q) *
         table.amplitude(upper, exc, q) / delta_path;
  }
  return g;
}

CouplingPair couplings_for_coherence(int m, int rail,
                                     const PolarisationState& control,
                                     double delta_MHz,
                                     const CouplingOptions& options) {
  check_guard(delta_MHz, delta_MHz + rb87::excited_splitting_MHz,
              options.resonance_guard_MHz);
  const PolarisationState ctrl = control.normalized();
  CouplingPair pair;
  pair.rail = rail;
  pair.delta22_MHz = delta_MHz;
  pair.delta21_MHz = delta_MHz + rb87::excited_splitting_MHz;
  pair.control = ctrl;
  pair.g_minus = coherence_coupling(m, -1, ctrl, delta_MHz, options);
  pair.g_plus = coherence_coupling(m, +1, ctrl, delta_MHz, options);
  return pair;
}

}  // namespace

CouplingPair effective_couplings(int rail, const PolarisationState& control,
                                 double delta_MHz,
                                 const CouplingOptions& options) {
  if (rail != 1 && rail != 2) {
    throw ConfigError("effective_couplings: rail must be 1 or 2");
  }
  const int m = rail == 1 ? 1 : -1;
  return couplings_for_coherence(m, rail, control, delta_MHz, options);
}

CouplingPair centre_line_couplings(const PolarisationState& control,
                                   double delta_MHz,
                                   const CouplingOptions& options) {
  return couplings_for_coherence(0, 0, control, delta_MHz, options);
}

CoupledMode coupled_mode(const CouplingPair& pair) {
  const double gcp = pair.g_cp();
  if (gcp < 1e-300) {
    throw ConfigError("coupled_mode: both couplings vanish");
  }
  return {{pair.g_minus / gcp, pair.g_plus / gcp}, gcp};
}

namespace {

// Coupling of the neglected coherence |1,0> <-> |2,+-2|: signal sigma+-
// from |1,0>, control sigma-+ from |2,+-2>, summed over F' when two_path.
std::complex<double> neglected_coupling(int rail,
                                        const PolarisationState& control,
                                        double delta_MHz, bool two_path) {
  static const TransitionTable table;
  const int sign = rail == 1 ? 1 : -1;
  const LevelRef lower{false, 1, 0};
  const LevelRef upper{false, 2, 2 * sign};
  // Signal leg helicity +sign, control leg helicity -sign.
  const std::complex<double> omega = sign > 0 ? control.aL : control.aR;
  std::complex<double> g = 0.0;
  for (int Fe = 2; Fe >= (two_path ? 1 : 2); --Fe) {
    const LevelRef exc{true, Fe, sign};
    const double delta_path =
        Fe == 2 ? delta_MHz : delta_MHz + rb87::excited_splitting_MHz;
    g += omega * table.amplitude(lower, exc, sign) *
         table.amplitude(upper, exc, -sign) / delta_path;
  }
  return g;
}

}  // namespace

NeglectedLambdaReport neglected_lambda_report(double delta_MHz,
                                              const CouplingOptions& options,
                                              int rail) {
  // Evaluated in the operating configuration: vertical control.
  const PolarisationState control = PolarisationState::V();
  const CouplingPair retained = effective_couplings(rail, control, delta_MHz,
                                                    options);
  const double gcp2 = retained.g_cp() * retained.g_cp();
  const double gx2_two =
      std::norm(neglected_coupling(rail, control, delta_MHz, true));
  const double gx2_single =
      std::norm(neglected_coupling(rail, control, delta_MHz, false));
  NeglectedLambdaReport report;
  report.linear_ratio_two_path = gcp2 / gx2_two;
  report.linear_ratio_single_path = gcp2 / gx2_single;
  report.storage_cycle_ratio =
      report.linear_ratio_two_path * report.linear_ratio_two_path;
  return report;
}

double neglected_lambda_od_ratio(double delta_MHz,
                                 const CouplingOptions& options) {
  return neglected_lambda_report(delta_MHz, options).storage_cycle_ratio;
}

}  // namespace dualgem
