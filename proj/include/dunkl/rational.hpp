#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

namespace dunkl {

using Rational = mpq_class;

inline double to_double(const Rational& q) { return q.get_d(); }

/// Recovers a small-denominator rational p/q with |x - p/q| <= rel_tol*max(1,|x|)
/// using continued fractions. Returns nullopt when no such q <= max_den exists
/// (e.g. sqrt(2)), which is how irrational multiplicities are detected.
inline std::optional<Rational> rationalize(double x, std::int64_t max_den = 1000000,
                                           double rel_tol = 1e-13) {
  if (!std::isfinite(x)) return std::nullopt;
  const double tol = rel_tol * std::max(1.0, std::abs(x));
  const bool neg = x < 0;
  double r = std::abs(x);
  // Convergents h/k.
  mpz_class h_prev = 1, h = static_cast<long>(std::floor(r));
  mpz_class k_prev = 0, k = 1;
  double frac = r - std::floor(r);
  for (int iter = 0; iter < 64; ++iter) {
    const double approx = h.get_d() / k.get_d();
    if (std::abs(approx - std::abs(x)) <= tol) {
      Rational q(neg ? mpz_class(-h) : h, k);
      q.canonicalize();
      return q;
    }
    if (frac < 1e-300) break;
    const double inv = 1.0 / frac;
    const double a = std::floor(inv);
    frac = inv - a;
    const mpz_class ai = static_cast<long>(a);
    mpz_class h_next = ai * h + h_prev;
    mpz_class k_next = ai * k + k_prev;
    if (k_next > max_den) break;
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
  }
  return std::nullopt;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

}  // namespace dunkl
