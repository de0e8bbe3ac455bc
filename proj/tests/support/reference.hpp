#pragma once

#include <complex>
#include <functional>
#include <vector>

// Independent storage/recall oracle: Heun (second-order) time stepping with
// a midpoint-rule field slave, written separately from the library's RK4
// integrator. Used at elevated resolution to cross-check transmission,
// echo timing, and efficiency.
namespace refsim {

struct Result {
  std::vector<double> t_us;
  std::vector<std::complex<double>> output;
  double input_energy = 0.0;
  double transmitted_energy = 0.0;  // t <= flip
  double echo_energy = 0.0;         // t > flip
  double echo_centroid_us = 0.0;
};

struct Setup {
  double beta = 0.2;
  double gamma0_per_us = 0.0;
  int n_z = 1024;
  double dt_us = 0.005;
  double t_end_us = 60.0;
  double flip_time_us = 20.0;
  double eta_MHz_per_L = 1.0;
  double offset_MHz = 0.0;
  std::function<std::complex<double>(double)> input;
};

Result integrate(const Setup& setup);

}  // namespace refsim
