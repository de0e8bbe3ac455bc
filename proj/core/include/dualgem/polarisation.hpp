#pragma once

#include <array>
#include <complex>

namespace dualgem {

// Transverse polarisation state in the circular basis (a_L, a_R).
//
// Basis convention (fixed): e_L = (x + iy)/sqrt(2), e_R = (x - iy)/sqrt(2),
// H = (L + R)/sqrt(2), V = i(L - R)/sqrt(2). Sigma+ transitions are driven
// by the R component, sigma- by the L component. All values compared against
// published magnitudes are convention-independent.
struct PolarisationState {
  std::complex<double> aL{0.0, 0.0};
  std::complex<double> aR{0.0, 0.0};

  double norm() const;
  PolarisationState normalized() const;  // throws ConfigError on zero vector
  // Jones components in the linear basis: Ex = (aL+aR)/sqrt(2),
  // Ey = i(aL-aR)/sqrt(2).
  std::array<std::complex<double>, 2> to_linear() const;

  static PolarisationState H();
  static PolarisationState V();
  static PolarisationState L();
  static PolarisationState R();
};

// <p1|p2> = conj(aL1) aL2 + conj(aR1) aR2 (no normalisation).
std::complex<double> inner(const PolarisationState& p1,
                           const PolarisationState& p2);

// |<p1|p2>| on unit-normalized states, in [0, 1].
double overlap(const PolarisationState& p1, const PolarisationState& p2);

// Fraction of input p stored through coupled mode P: |<P|p>|^2 on unit
// states. The orthogonal remainder 1 - stored_fraction is not stored.
double stored_fraction(const PolarisationState& coupled_mode,
                       const PolarisationState& input);

// Semi-axes {major, minor} of the polarisation ellipse of a unit state,
// from the linear-basis Stokes parameters.
std::array<double, 2> ellipse_axes(const PolarisationState& p);

struct CouplingOptions {
  // Reject operating points within this band of a one-photon resonance.
  double resonance_guard_MHz = 1.0;
  // Fold excited-state Zeeman shifts into the per-path detunings. Off by
  // default; at ~1 G they are ~0.2 MHz against Delta ~ 200 MHz.
  bool include_excited_zeeman = false;
  double B0_gauss = 0.0;
};

// Effective Raman couplings of one ground coherence to the two circular
// signal components. Dimensionless relative units: control Rabi magnitude
// normalized to 1 and split into (Omega-, Omega+) = (aL, aR) of the control
// polarisation; dipole products in units of the reduced J->J' element;
// detunings in MHz.
struct CouplingPair {
  std::complex<double> g_minus{0.0, 0.0};
  std::complex<double> g_plus{0.0, 0.0};
  int rail = 1;
  double delta22_MHz = 0.0;
  double delta21_MHz = 0.0;
  PolarisationState control;

  double g_cp() const;  // sqrt(|g-|^2 + |g+|^2), exact by construction
};

// Rail 1 is the m_F = +1 ground coherence (carrier +delta0), rail 2 the
// m_F = -1 mirror. Delta is the one-photon detuning from F'=2 (MHz);
// Delta21 = Delta + 816.7 MHz. The g- term coherently sums the F'=2 and
// F'=1 paths with atomic-convention signs.
CouplingPair effective_couplings(int rail, const PolarisationState& control,
                                 double delta_MHz,
                                 const CouplingOptions& options = {});

// Same construction for the magnetically insensitive m_F = 0 coherence
// (the unbroadened centre line). Used for spectrum line strengths.
CouplingPair centre_line_couplings(const PolarisationState& control,
                                   double delta_MHz,
                                   const CouplingOptions& options = {});

struct CoupledMode {
  PolarisationState pol;  // (g-, g+)/g_cp, unit norm
  double g_cp = 0.0;
};

// Throws ConfigError when both couplings vanish.
CoupledMode coupled_mode(const CouplingPair& pair);

// Optical-depth suppression of the neglected lambda system (the coherence
// between |1,0> and |2,+2> excited by the sigma+ signal component), relative
// to the retained m_F = +1 coherence, over a full storage cycle (write and
// read each weigh the coupled modes once, hence the square):
//
//   ratio = [ g_cp^2 / |g_x|^2 ]^2
//
// g_x sums the neglected coherence's two excited paths (F'=2 at Delta22,
// F'=1 at Delta21; they interfere destructively). The single-pass,
// F'=2-only variants are exposed via neglected_lambda_report for
// comparison; see the docs for why the cycle ratio is the published figure.
double neglected_lambda_od_ratio(double delta_MHz,
                                 const CouplingOptions& options = {});

struct NeglectedLambdaReport {
  double storage_cycle_ratio = 0.0;    // [g_cp^2/|g_x|^2]^2, two-path g_x
  double linear_ratio_two_path = 0.0;  // g_cp^2/|g_x|^2
  double linear_ratio_single_path = 0.0;  // g_cp^2/|g_x,F'=2 only|^2
};
NeglectedLambdaReport neglected_lambda_report(
    double delta_MHz, const CouplingOptions& options = {}, int rail = 1);

}  // namespace dualgem
