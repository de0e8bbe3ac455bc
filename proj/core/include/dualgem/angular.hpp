#pragma once

namespace dualgem {

// Wigner 3j and 6j symbols for half-integer angular momenta.
//
// Arguments are doubles holding exact half-integers (n/2). The Racah
// single-sum formulas are evaluated in exact rational arithmetic; the square
// of the symbol is an exact rational <= 1, and the only rounding is its
// conversion to double followed by one sqrt. Selection-rule violations
// (triangle conditions, m sums, mismatched half-integrality of a (j, m)
// pair) return exactly 0.0.
//
// Throws std::invalid_argument for arguments that are not half-integers
// within 1e-9, or for negative j.

double wigner_3j(double j1, double j2, double j3,
                 double m1, double m2, double m3);

double wigner_6j(double j1, double j2, double j3,
                 double j4, double j5, double j6);

}  // namespace dualgem
