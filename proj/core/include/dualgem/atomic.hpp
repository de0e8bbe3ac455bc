#pragma once

#include <array>
#include <vector>

namespace dualgem {

// 87Rb D1 line (5S1/2 -> 5P1/2), nuclear spin 3/2.
namespace rb87 {
inline constexpr double nuclear_spin = 1.5;
inline constexpr double J_ground = 0.5;
inline constexpr double J_excited = 0.5;
// Bohr magneton over Planck constant, MHz per gauss.
inline constexpr double mu_B_over_h = 1.399624;
// Excited-state hyperfine splitting F'=1 -> F'=2, MHz.
inline constexpr double excited_splitting_MHz = 816.7;
}  // namespace rb87

struct LevelRef {
  bool excited = false;
  int F = 1;
  int mF = 0;
};

// Throws ConfigError unless F in {1,2} and |mF| <= F.
void validate_level(const LevelRef& level);

struct ZeemanParams {
  double B0_gauss = 0.0;
  double mu_B_over_h = rb87::mu_B_over_h;
};

// Lande g_F. Ground manifold: g_1 = -1/2, g_2 = +1/2. Excited (5P1/2):
// g'_1 = -1/6, g'_2 = +1/6.
double lande_g_factor(const LevelRef& level);

// m_F * g_F * (mu_B/h) * B, in MHz.
double zeeman_shift(const LevelRef& level, double B_gauss);

// Two-photon Raman line positions {-delta0, 0, +delta0} for the three
// ground coherences m_F in {-1, 0, +1}; delta0 = (mu_B/h) * B0 since
// g_2 - g_1 = 1. Returned in ascending order.
std::array<double, 3> raman_line_positions(double B0_gauss);

// Relative dipole amplitude <F m | d | F' m'> for the D1 manifold, in units
// of the reduced J -> J' element. q is the polarisation helicity of the
// driving light, q = m' - m in {-1, 0, +1}; anything forbidden returns 0.
//
// Convention (fixed; signs matter for two-path interference):
//   mu = (-1)^(F' + J + 1 + I) sqrt((2F'+1)(2J+1)) {J J' 1; F' F I}
//      * (-1)^(F' - 1 + m) sqrt(2F+1) (F' 1 F; m', m - m', -m)
// With this normalisation sum_{F',m',q} mu^2 = 1 for every ground sublevel.
double relative_dipole(const LevelRef& ground, const LevelRef& excited, int q);

struct TransitionEntry {
  LevelRef ground;
  LevelRef excited;
  int q = 0;  // m'_F - m_F
  double amplitude = 0.0;
};

// All nonzero D1 entries; built eagerly, safe for concurrent readers.
class TransitionTable {
 public:
  TransitionTable();
  const std::vector<TransitionEntry>& entries() const { return entries_; }
  // 0.0 for forbidden or absent combinations.
  double amplitude(const LevelRef& ground, const LevelRef& excited,
                   int q) const;

 private:
  std::vector<TransitionEntry> entries_;
};

}  // namespace dualgem
