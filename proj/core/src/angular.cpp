#include "dualgem/angular.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dualgem {
namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

// Doubled representation: j = tj / 2. Keeps every selection rule an integer
// parity check and every factorial argument an exact integer.
int twice(double x, const char* name) {
  const double t = 2.0 * x;
  if (!std::isfinite(t) || std::abs(t - std::round(t)) > 1e-9) {
    throw std::invalid_argument(std::string("wigner: ") + name +
                                " is not a half-integer");
  }
  return static_cast<int>(std::llround(t));
}

cpp_int factorial(int n) {
  cpp_int f = 1;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

bool triangle_ok(int ta, int tb, int tc) {
  return (ta + tb + tc) % 2 == 0 && tc >= std::abs(ta - tb) && tc <= ta + tb;
}

// Exact Delta^2(abc) = (a+b-c)! (a-b+c)! (-a+b+c)! / (a+b+c+1)!
cpp_rational triangle_factor(int ta, int tb, int tc) {
  return cpp_rational(factorial((ta + tb - tc) / 2) *
                          factorial((ta - tb + tc) / 2) *
                          factorial((-ta + tb + tc) / 2),
                      factorial((ta + tb + tc) / 2 + 1));
}

// sign(s) * sqrt(|r|) with r = (symbol)^2 exact; r <= 1 so the conversion
// to double cannot overflow.
double signed_sqrt(const cpp_rational& r, int sign) {
  return sign * std::sqrt(static_cast<double>(r));
}

}  // namespace

double wigner_3j(double j1, double j2, double j3,
                 double m1, double m2, double m3) {
  const int tj1 = twice(j1, "j1"), tj2 = twice(j2, "j2"), tj3 = twice(j3, "j3");
  const int tm1 = twice(m1, "m1"), tm2 = twice(m2, "m2"), tm3 = twice(m3, "m3");
  if (tj1 < 0 || tj2 < 0 || tj3 < 0)
    throw std::invalid_argument("wigner_3j: negative j");

  if (tm1 + tm2 + tm3 != 0) return 0.0;
  if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tm3) > tj3)
    return 0.0;
  // (j, m) must share half-integrality; a mismatched pair is no state at all.
  if ((tj1 + tm1) % 2 != 0 || (tj2 + tm2) % 2 != 0 || (tj3 + tm3) % 2 != 0)
    return 0.0;
  if (!triangle_ok(tj1, tj2, tj3)) return 0.0;

  const int a1 = (tj1 + tj2 - tj3) / 2;
  const int b2 = (tj1 - tm1) / 2;
  const int b3 = (tj2 + tm2) / 2;
  const int c1 = (tj3 - tj2 + tm1) / 2;  // + t in the sum
  const int c2 = (tj3 - tj1 - tm2) / 2;  // + t in the sum

  const int tmin = std::max({0, -c1, -c2});
  const int tmax = std::min({a1, b2, b3});
  if (tmin > tmax) return 0.0;

  cpp_rational sum = 0;
  for (int t = tmin; t <= tmax; ++t) {
    cpp_int denom = factorial(t) * factorial(a1 - t) * factorial(b2 - t) *
                    factorial(b3 - t) * factorial(c1 + t) * factorial(c2 + t);
    cpp_rational term(1, denom);
    if (t % 2 != 0) term = -term;
    sum += term;
  }
  if (sum == 0) return 0.0;

  cpp_rational norm = triangle_factor(tj1, tj2, tj3);
  norm *= factorial((tj1 + tm1) / 2) * factorial((tj1 - tm1) / 2);
  norm *= factorial((tj2 + tm2) / 2) * factorial((tj2 - tm2) / 2);
  norm *= factorial((tj3 + tm3) / 2) * factorial((tj3 - tm3) / 2);

  int sign = sum > 0 ? 1 : -1;
  if (((tj1 - tj2 - tm3) / 2) % 2 != 0) sign = -sign;
  return signed_sqrt(norm * sum * sum, sign);
}

double wigner_6j(double j1, double j2, double j3,
                 double j4, double j5, double j6) {
  const int t1 = twice(j1, "j1"), t2 = twice(j2, "j2"), t3 = twice(j3, "j3");
  const int t4 = twice(j4, "j4"), t5 = twice(j5, "j5"), t6 = twice(j6, "j6");
  if (t1 < 0 || t2 < 0 || t3 < 0 || t4 < 0 || t5 < 0 || t6 < 0)
    throw std::invalid_argument("wigner_6j: negative j");

  if (!triangle_ok(t1, t2, t3) || !triangle_ok(t1, t5, t6) ||
      !triangle_ok(t4, t2, t6) || !triangle_ok(t4, t5, t3))
    return 0.0;

  const int T[4] = {(t1 + t2 + t3) / 2, (t1 + t5 + t6) / 2,
                    (t4 + t2 + t6) / 2, (t4 + t5 + t3) / 2};
  const int Q[3] = {(t1 + t2 + t4 + t5) / 2, (t2 + t3 + t5 + t6) / 2,
                    (t3 + t1 + t6 + t4) / 2};

  const int tmin = *std::max_element(T, T + 4);
  const int tmax = *std::min_element(Q, Q + 3);
  if (tmin > tmax) return 0.0;

  cpp_rational sum = 0;
  for (int t = tmin; t <= tmax; ++t) {
    cpp_int denom = factorial(t - T[0]) * factorial(t - T[1]) *
                    factorial(t - T[2]) * factorial(t - T[3]) *
                    factorial(Q[0] - t) * factorial(Q[1] - t) *
                    factorial(Q[2] - t);
    cpp_rational term(factorial(t + 1), denom);
    if (t % 2 != 0) term = -term;
    sum += term;
  }
  if (sum == 0) return 0.0;

  const cpp_rational norm = triangle_factor(t1, t2, t3) *
                            triangle_factor(t1, t5, t6) *
                            triangle_factor(t4, t2, t6) *
                            triangle_factor(t4, t5, t3);
  return signed_sqrt(norm * sum * sum, sum > 0 ? 1 : -1);
}

}  // namespace dualgem
