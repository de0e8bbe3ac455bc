#pragma once

#include <array>
#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace dualgem {

// Dimensionless model (see docs): z in [0, 1], time in microseconds,
// frequencies in MHz with angular 2*pi factors explicit. The coupled-mode
// equations integrated here are
//
//   dsigma/dt = -(gamma0 + i 2 pi delta'(z,t)) sigma + i G E
//   dE/dz     =  i G sigma,      E(0, t) = input(t)
//
// in the slowly-varying envelope limit (the c dE/dt term is dropped; the
// field is slaved to sigma as a spatial ODE each step). The single strength
// parameter is beta = G^2 / (2 pi eta): CW transmission through the
// gradient-broadened line is exp(-2 pi beta), and forward recall efficiency
// approaches (1 - exp(-2 pi beta))^2.

struct GemParams {
  double beta = 0.2;           // coupling^2 per unit gradient, >= 0
  double gamma0_per_us = 0.0;  // coherence decay gamma'_0, >= 0
  int n_z = 256;               // spatial intervals, >= 16
  double dt_us = 0.0;          // time step; 0 = auto from stability bound
  double t_end_us = 60.0;
  // Rail carrier offset from its line centre (two-photon, MHz).
  double rail_offset_MHz = 0.0;
};

struct GradientProgram {
  double eta_MHz_per_L = 1.0;  // gradient slope magnitude
  double flip_time_us = 20.0;  // t_s; slope sign reverses here
  double bias_MHz = 0.0;       // rail line centre, +-delta0
  double offset_MHz = 0.0;     // residual two-photon offset

  double slope_at(double t_us) const {
    return t_us < flip_time_us ? eta_MHz_per_L : -eta_MHz_per_L;
  }
};

// delta'(z, t) = bias + eta(t) (z - 1/2) + offset, in MHz.
double detuning_profile(const GradientProgram& program, double z, double t_us);

// Input-face envelope. Analytic evaluator so Runge-Kutta half-steps see the
// exact waveform; carrier detuning (MHz, relative to the rail line centre)
// enters as a phase ramp on the envelope.
struct PulseEnvelope {
  std::function<std::complex<double>(double)> eval;
  double carrier_MHz = 0.0;
  // Shape metadata (gaussian widths are intensity FWHM).
  std::string shape = "none";
  double width_us = 0.0;
  double centre_us = 0.0;
  std::complex<double> amplitude{0.0, 0.0};

  std::complex<double> operator()(double t_us) const;

  static PulseEnvelope gaussian(double width_us, double centre_us,
                                std::complex<double> amplitude = 1.0,
                                double carrier_MHz = 0.0);
  static PulseEnvelope none();

  PulseEnvelope scaled(std::complex<double> factor) const;
  // Intensity-FWHM spectral bandwidth in MHz (gaussian only; 0 otherwise).
  double bandwidth_MHz() const;
};

struct RailState {
  std::vector<std::complex<double>> sigma;  // coherence on the z grid
  std::vector<std::complex<double>> field;  // coupled-mode field on the grid
};

struct EvolveResult {
  std::vector<double> t_us;
  std::vector<std::complex<double>> input_trace;
  std::vector<std::complex<double>> output_trace;
  RailState final_state;
  double dt_us = 0.0;
  int n_z = 0;
  double decayed_energy = 0.0;      // 2 gamma0 integral |sigma|^2 dz dt
  double max_flux_residual = 0.0;   // worst per-step conservation defect
  bool bandwidth_warning = false;   // input bandwidth vs broadened line
};

// Marches the coupled-mode equations and returns the full output-face trace
// (samples aligned with t_us, including t = 0). Throws NumericalError when
// the stability bound 2 pi max|delta'| dt <= 0.1 is violated or the state
// goes non-finite.
EvolveResult evolve(const GemParams& params, const GradientProgram& program,
                    const PulseEnvelope& input);

// Largest time step honouring the stability bound for this operating point
// (what evolve picks when dt_us = 0).
double stable_dt(const GemParams& params, const GradientProgram& program,
                 const PulseEnvelope& input);

// Trapezoid energy of |trace|^2 over [t_lo, t_hi] (fractional end segments
// included) and the energy-weighted centroid over (t_lo, t_hi].
double trace_energy(const std::vector<double>& t_us,
                    const std::vector<std::complex<double>>& trace,
                    double t_lo, double t_hi);
double trace_centroid(const std::vector<double>& t_us,
                      const std::vector<std::complex<double>>& trace,
                      double t_lo, double t_hi);

struct EnergyLedger {
  double input = 0.0;
  double transmitted = 0.0;
  double echo = 0.0;
  double residual = 0.0;
  double decayed = 0.0;
  double closure_residual = 0.0;  // |input - sum| / input
  bool closed = false;            // closure_residual <= tolerance
  double tolerance = 1e-3;
};

struct StorageResult {
  EvolveResult run;
  double flip_time_us = 0.0;
  double input_energy = 0.0;
  double transmitted_energy = 0.0;  // output window t <= t_s
  double echo_energy = 0.0;         // output window t > t_s
  double residual_energy = 0.0;     // integral |sigma(T)|^2 dz
  double echo_centroid_us = 0.0;    // energy-weighted, echo window
  // Normalized to input energy.
  double transmitted_fraction = 0.0;
  double echo_fraction = 0.0;
};

// evolve + window split at the flip time.
StorageResult run_storage_recall(const GemParams& params,
                                 const GradientProgram& program,
                                 const PulseEnvelope& input);

// Conservation bookkeeping; with gamma0 = 0 input = transmitted + echo +
// residual within tolerance, else the difference is the decayed share.
EnergyLedger energy_ledger(const StorageResult& result, double tolerance = 1e-3);

// Steady-state weak-probe spectrum of the three Raman lines.
struct SpectrumParams {
  double od0 = 10.0;        // resonant intensity OD of an unbroadened line
  double gamma_MHz = 0.05;  // intrinsic two-photon HWHM
  // Relative strengths of the lines at {-delta0, 0, +delta0}.
  std::array<double, 3> strength = {1.0, 1.0, 1.0};
};

// Intensity transmission at each probe detuning (MHz). The two side lines
// are gradient-broadened to ~|eta| L; the centre line is untouched by the
// gradient (closed-form per-slice integral, exact for the linear profile).
std::vector<double> absorption_spectrum(double B0_gauss, double eta_MHz_per_L,
                                        const SpectrumParams& params,
                                        const std::vector<double>& probe_MHz);

}  // namespace dualgem
