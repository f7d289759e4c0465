#pragma once

#include <gtest/gtest.h>

#include <random>

#include "dunkl/error.hpp"
#include "dunkl/polynomial.hpp"
#include "dunkl/root_system.hpp"

namespace dunkl::testing {

template <class F>
void expect_error(ErrorKind kind, F&& f) {
  try {
    f();
    ADD_FAILURE() << "expected error " << to_string(kind);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

/// Gaussian point with components of scale `s`.
inline Vector random_point(std::mt19937_64& rng, int dim, double s = 1.0) {
  std::normal_distribution<double> n(0.0, s);
  Vector x(dim);
  for (int i = 0; i < dim; ++i) x(i) = n(rng);
  return x;
}

/// Random polynomial of total degree <= d with small integer coefficients.
inline Polynomial random_poly(std::mt19937_64& rng, int dim, int d, int terms = 6) {
  std::uniform_int_distribution<int> coef(-3, 3), deg(0, d);
  Polynomial p(dim);
  for (int t = 0; t < terms; ++t) {
    Exponent e(static_cast<std::size_t>(dim), 0);
    int left = deg(rng);
    for (int j = 0; j < dim && left > 0; ++j) {
      std::uniform_int_distribution<int> take(0, left);
      const int a = j + 1 == dim ? left : take(rng);
      e[static_cast<std::size_t>(j)] = a;
      left -= a;
    }
    p.add_term(e, Rational(coef(rng)));
  }
  return p;
}

inline Polynomial var(int dim, int i) { return Polynomial::variable(dim, i); }

}  // namespace dunkl::testing
