#pragma once

// Exact Wigner 3j symbols from the Racah single-sum formula. Factorials and the
// sum are carried in arbitrary-precision rationals; only the final square root
// is taken in floating point.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace zeitlin::wigner {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// n! for n >= 0, memoized.
inline const BigInt& factorial(int n) {
  static thread_local std::vector<BigInt> table{BigInt(1)};
  if (n < 0) throw std::invalid_argument("factorial of negative number");
  while (static_cast<int>(table.size()) <= n) {
    table.push_back(table.back() * static_cast<int>(table.size()));
  }
  return table[n];
}

namespace detail {

// (a + b) / 2 for doubled quantum numbers; -1 if not an integer.
inline int half_sum(int two_a, int two_b) {
  const int t = two_a + two_b;
  return (t % 2 == 0) ? t / 2 : -1;
}

}  // namespace detail

/// Exact square of the 3j symbol with its sign: returns (sign, value^2).
/// Arguments are twice the quantum numbers, so half-integers are representable.
struct Signed3j {
  int sign = 0;  // -1, 0, +1
  Rational square;
};

inline Signed3j wigner_3j_exact(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3) {
  Signed3j out;
  if (tm1 + tm2 + tm3 != 0) return out;
  if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tm3) > tj3) return out;
  if ((tj1 + tm1) % 2 || (tj2 + tm2) % 2 || (tj3 + tm3) % 2) return out;
  if ((tj1 + tj2 + tj3) % 2) return out;
  // triangle condition
  if (tj3 > tj1 + tj2 || tj3 < std::abs(tj1 - tj2)) return out;

  const int j1pj2mj3 = (tj1 + tj2 - tj3) / 2;
  const int j1mj2pj3 = (tj1 - tj2 + tj3) / 2;
  const int mj1pj2pj3 = (-tj1 + tj2 + tj3) / 2;
  const int jsum = (tj1 + tj2 + tj3) / 2;

  Rational delta(factorial(j1pj2mj3) * factorial(j1mj2pj3) * factorial(mj1pj2pj3),
                 factorial(jsum + 1));
  BigInt prefactor = factorial(detail::half_sum(tj1, tm1)) * factorial(detail::half_sum(tj1, -tm1)) *
                     factorial(detail::half_sum(tj2, tm2)) * factorial(detail::half_sum(tj2, -tm2)) *
                     factorial(detail::half_sum(tj3, tm3)) * factorial(detail::half_sum(tj3, -tm3));

  // Racah sum over k with all factorial arguments non-negative.
  const int a1 = (tj3 - tj2 + tm1) / 2;  // j3 - j2 + m1
  const int a2 = (tj3 - tj1 - tm2) / 2;  // j3 - j1 - m2
  const int b1 = j1pj2mj3;               // j1 + j2 - j3
  const int b2 = (tj1 - tm1) / 2;        // j1 - m1
  const int b3 = (tj2 + tm2) / 2;        // j2 + m2
  const int k_min = std::max({0, -a1, -a2});
  const int k_max = std::min({b1, b2, b3});
  Rational sum(0);
  for (int k = k_min; k <= k_max; ++k) {
    BigInt den = factorial(k) * factorial(a1 + k) * factorial(a2 + k) * factorial(b1 - k) *
                 factorial(b2 - k) * factorial(b3 - k);
    Rational term(BigInt(1), den);
    if (k % 2) sum -= term; else sum += term;
  }
  if (sum == 0) return out;

  // overall phase (-1)^(j1 - j2 - m3)
  const int phase_exp = (tj1 - tj2 - tm3) / 2;
  int sign = (phase_exp % 2 == 0) ? 1 : -1;
  if (sum < 0) sign = -sign;
  out.sign = sign;
  out.square = delta * Rational(prefactor) * sum * sum;
  return out;
}

/// 3j symbol in double precision; arguments doubled.
inline double wigner_3j_twice(int tj1, int tj2, int tj3, int tm1, int tm2, int tm3) {
  const Signed3j w = wigner_3j_exact(tj1, tj2, tj3, tm1, tm2, tm3);
  if (w.sign == 0) return 0.0;
  return w.sign * std::sqrt(w.square.convert_to<double>());
}

/// 3j symbol for integer quantum numbers.
inline double wigner_3j(int j1, int j2, int j3, int m1, int m2, int m3) {
  return wigner_3j_twice(2 * j1, 2 * j2, 2 * j3, 2 * m1, 2 * m2, 2 * m3);
}

}  // namespace zeitlin::wigner
