#include "dualgem/atomic.hpp"

#include <cmath>
#include <string>

#include "dualgem/angular.hpp"
#include "dualgem/errors.hpp"

namespace dualgem {

void validate_level(const LevelRef& level) {
  if (level.F < 1 || level.F > 2) {
    throw ConfigError("LevelRef: F must be 1 or 2 on the D1 line, got " +
                      std::to_string(level.F));
  }
  if (std::abs(level.mF) > level.F) {
    throw ConfigError("LevelRef: |m_F| <= F violated (F=" +
                      std::to_string(level.F) + ", m_F=" +
                      std::to_string(level.mF) + ")");
  }
}

double lande_g_factor(const LevelRef& level) {
  validate_level(level);
  if (!level.excited) return level.F == 1 ? -0.5 : 0.5;
  return level.F == 1 ? -1.0 / 6.0 : 1.0 / 6.0;
}

double zeeman_shift(const LevelRef& level, double B_gauss) {
  return level.mF * lande_g_factor(level) * rb87::mu_B_over_h * B_gauss;
}

std::array<double, 3> raman_line_positions(double B0_gauss) {
  const double delta0 = rb87::mu_B_over_h * B0_gauss;
  return {-delta0, 0.0, delta0};
}

double relative_dipole(const LevelRef& ground, const LevelRef& excited,
                       int q) {
  validate_level(ground);
  validate_level(excited);
  if (ground.excited || !excited.excited) {
    throw ConfigError("relative_dipole: expects (ground, excited) order");
  }
  if (q < -1 || q > 1) return 0.0;
  if (excited.mF != ground.mF + q) return 0.0;

  const double I = rb87::nuclear_spin;
  const double J = rb87::J_ground, Jp = rb87::J_excited;
  const double F = ground.F, Fp = excited.F;
  const double m = ground.mF, mp = excited.mF;

  // <F||d||F'> / <J||d||J'>, Wigner-Eckart over the hyperfine decomposition.
  const double reduced = ((static_cast<int>(Fp + J + 1 + I) % 2) ? -1.0 : 1.0) *
                         std::sqrt((2 * Fp + 1) * (2 * J + 1)) *
                         wigner_6j(J, Jp, 1, Fp, F, I);
  const double projection =
      ((static_cast<int>(Fp - 1 + m) % 2) ? -1.0 : 1.0) *
      std::sqrt(2 * F + 1) * wigner_3j(Fp, 1, F, mp, m - mp, -m);
  return reduced * projection;
}

TransitionTable::TransitionTable() {
  for (int Fg = 1; Fg <= 2; ++Fg) {
    for (int mg = -Fg; mg <= Fg; ++mg) {
      for (int Fe = 1; Fe <= 2; ++Fe) {
        for (int q = -1; q <= 1; ++q) {
          const int me = mg + q;
          if (std::abs(me) > Fe) continue;
          const LevelRef g{false, Fg, mg};
          const LevelRef e{true, Fe, me};
          const double amp = relative_dipole(g, e, q);
          if (amp != 0.0) entries_.push_back({g, e, q, amp});
        }
      }
    }
  }
}

double TransitionTable::amplitude(const LevelRef& ground,
                                  const LevelRef& excited, int q) const {
  for (const auto& entry : entries_) {
    if (entry.ground.F == ground.F && entry.ground.mF == ground.mF &&
        entry.excited.F == excited.F && entry.excited.mF == excited.mF &&
        entry.q == q) {
      return entry.amplitude;
    }
  }
  return 0.0;
}

}  // namespace dualgem
