#pragma once

// Dunkl operators
//
//   T_i f(x) = d_i f(x) + sum_{alpha in R_+} k_alpha alpha_i (f(x) - f(sigma_alpha x)) / <alpha,x>
//
// exactly on rational polynomials and numerically on scalar fields.
//
// Exact mode works with a rational direction v parallel to alpha. Every term is
// invariant under alpha -> c*alpha except the 1/<alpha,x>^2 term of the
// Laplacian formula, where |alpha|^2 = 2 gives the factor |v|^2/2.

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "dunkl/error.hpp"
#include "dunkl/polynomial.hpp"
#include "dunkl/rational.hpp"
#include "dunkl/root_system.hpp"
#include "dunkl/scalar_field.hpp"

namespace dunkl {

namespace detail {

struct ExactRoot {
  RationalVector v;       // rational direction
  Rational half_norm_sq;  // |v|^2 / 2
  RationalMatrix reflection;
  Rational k;
};

inline std::vector<ExactRoot> exact_roots(const RootSystem& rs) {
  std::vector<ExactRoot> out;
  for (std::size_t a = 0; a < rs.size(); ++a) {
    const auto& dir = rs.exact_direction(a);
    if (!dir) fail(ErrorKind::exactness_unavailable, "root " + std::to_string(a) + " has no rational direction");
    auto k = rs.exact_multiplicity(a);
    if (!k) fail(ErrorKind::exactness_unavailable, "multiplicity of root " + std::to_string(a) + " is not rational");
    ExactRoot r;
    r.v = *dir;
    r.k = *k;
    Rational nsq = 0;
    for (const auto& c : r.v) nsq += c * c;
    r.half_norm_sq = nsq / 2;
    const Rational two_over = 2 / nsq;
    const std::size_t n = r.v.size();
    r.reflection.assign(n, RationalVector(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) r.reflection[i][j] = Rational(i == j ? 1 : 0) - two_over * r.v[i] * r.v[j];
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline void check_axis(const RootSystem& rs, int i) {
  if (i < 0 || i >= rs.dim()) fail(ErrorKind::out_of_range, "axis index " + std::to_string(i) + " out of range");
}

}  // namespace detail

/// (f - f o sigma_alpha) / <v,x> as an exact polynomial.
inline Polynomial reflection_quotient(const Polynomial& p, const detail::ExactRoot& r) {
  return divide_exact(p - p.compose_linear(r.reflection), r.v);
}

inline Polynomial apply_T_poly(const RootSystem& rs, int i, const Polynomial& p) {
  detail::check_axis(rs, i);
  if (p.dim() != rs.dim()) fail(ErrorKind::invalid_dimension, "polynomial and root system dimensions differ");
  const auto roots = detail::exact_roots(rs);
  Polynomial out = p.derivative(i);
  for (const auto& r : roots) {
    if (r.k == 0 || r.v[static_cast<std::size_t>(i)] == 0) continue;
    out += reflection_quotient(p, r) * (r.k * r.v[static_cast<std::size_t>(i)]);
  }
  return out;
}

inline std::vector<Polynomial> dunkl_gradient(const RootSystem& rs, const Polynomial& p) {
  std::vector<Polynomial> g;
  for (int i = 0; i < rs.dim(); ++i) g.push_back(apply_T_poly(rs, i, p));
  return g;
}

/// T_i f(x). Within the wall tolerance the difference quotient is replaced by
/// its limit: x - sigma_alpha x = <alpha,x> alpha (|alpha|^2 = 2), so
/// f(x) - f(sigma_alpha x) = <alpha,x> <grad f(x), alpha> + O(<alpha,x>^2).
inline double apply_T_numeric(const RootSystem& rs, int i, const ScalarField& f, const Vector& x, bool allow_fd = true) {
  detail::check_axis(rs, i);
  const Vector g = f.grad(x, allow_fd);
  double t = g(i);
  const double fx = f(x);
  for (std::size_t a = 0; a < rs.size(); ++a) {
    const double k = rs.multiplicity(a);
    const Vector& alpha = rs.positive_roots()[a];
    if (k == 0.0 || alpha(i) == 0.0) continue;
    const double ax = alpha.dot(x);
    double q;
    if (on_wall(rs, x, a)) {
      q = g.dot(alpha);
    } else {
      q = (fx - f(Vector(x - ax * alpha))) / ax;
    }
    t += k * alpha(i) * q;
  }
  return t;
}

inline Vector dunkl_gradient(const RootSystem& rs, const ScalarField& f, const Vector& x, bool allow_fd = true) {
  Vector out(rs.dim());
  for (int i = 0; i < rs.dim(); ++i) out(i) = apply_T_numeric(rs, i, f, x, allow_fd);
  return out;
}

enum class LaplacianMethod { sum_of_squares, formula };

/// Exact Dunkl Laplacian of a polynomial. `formula` uses
///   Delta f + 2 sum k [ <grad f,alpha>/<alpha,x> - (f - f o sigma)/<alpha,x>^2 ].
inline Polynomial dunkl_laplacian_poly(const RootSystem& rs, const Polynomial& p, LaplacianMethod method) {
  const int n = rs.dim();
  if (method == LaplacianMethod::sum_of_squares) {
    Polynomial out(n);
    for (int i = 0; i < n; ++i) out += apply_T_poly(rs, i, apply_T_poly(rs, i, p));
    return out;
  }
  const auto roots = detail::exact_roots(rs);
  Polynomial out(n);
  std::vector<Polynomial> grad;
  for (int i = 0; i < n; ++i) {
    grad.push_back(p.derivative(i));
    out += grad.back().derivative(i);
  }
  for (const auto& r : roots) {
    if (r.k == 0) continue;
    Polynomial directional(n);
    for (int i = 0; i < n; ++i) directional += grad[static_cast<std::size_t>(i)] * r.v[static_cast<std::size_t>(i)];
    // [<grad p, v><v,x> - |v|^2/2 (p - p o sigma)] / <v,x>^2
    Polynomial num = directional * Polynomial::linear(r.v) - (p - p.compose_linear(r.reflection)) * r.half_norm_sq;
    out += divide_exact(divide_exact(num, r.v), r.v) * (2 * r.k);
  }
  return out;
}

/// Numeric Dunkl Laplacian by the gradient/Laplacian formula.
inline double dunkl_laplacian(const RootSystem& rs, const ScalarField& f, const Vector& x) {
  double out = f.lap(x);
  const Vector g = f.grad(x);
  const double fx = f(x);
  for (std::size_t a = 0; a < rs.size(); ++a) {
    const double k = rs.multiplicity(a);
    if (k == 0.0) continue;
    if (on_wall(rs, x, a)) fail(ErrorKind::on_wall, "Laplacian formula is singular on the wall of root " + std::to_string(a));
    const Vector& alpha = rs.positive_roots()[a];
    const double ax = alpha.dot(x);
    out += 2 * k * (g.dot(alpha) / ax - (fx - f(Vector(x - ax * alpha))) / (ax * ax));
  }
  return out;
}

inline double dunkl_laplacian(const RootSystem& rs, const Polynomial& p, const Vector& x, LaplacianMethod method) {
  if (method == LaplacianMethod::formula) return dunkl_laplacian(rs, field_from_polynomial(p), x);
  return dunkl_laplacian_poly(rs, p, method).evaluate(x);
}

/// T_i f g + f T_i g - sum k alpha_i (f - f o sigma)(g - g o sigma)/<alpha,x>, exactly.
inline Polynomial leibniz_rhs_poly(const RootSystem& rs, int i, const Polynomial& f, const Polynomial& g) {
  detail::check_axis(rs, i);
  const auto roots = detail::exact_roots(rs);
  Polynomial out = apply_T_poly(rs, i, f) * g + f * apply_T_poly(rs, i, g);
  for (const auto& r : roots) {
    if (r.k == 0 || r.v[static_cast<std::size_t>(i)] == 0) continue;
    const Polynomial df = f - f.compose_linear(r.reflection);
    const Polynomial dg = g - g.compose_linear(r.reflection);
    // alpha_i / <alpha,x> = v_i / <v,x>
    out -= divide_exact(df * dg, r.v) * (r.k * r.v[static_cast<std::size_t>(i)]);
  }
  return out;
}

/// Numeric form of the three-term product rule, with the wall limit
/// (f(x)-f(sx))(g(x)-g(sx))/<alpha,x> -> 0 on a wall.
inline double leibniz_rhs(const RootSystem& rs, int i, const ScalarField& f, const ScalarField& g, const Vector& x) {
  detail::check_axis(rs, i);
  const double fx = f(x), gx = g(x);
  double out = apply_T_numeric(rs, i, f, x) * gx + fx * apply_T_numeric(rs, i, g, x);
  for (std::size_t a = 0; a < rs.size(); ++a) {
    const double k = rs.multiplicity(a);
    const Vector& alpha = rs.positive_roots()[a];
    if (k == 0.0 || alpha(i) == 0.0 || on_wall(rs, x, a)) continue;
    const double ax = alpha.dot(x);
    const Vector sx = x - ax * alpha;
    out -= k * alpha(i) * (fx - f(sx)) * (gx - g(sx)) / ax;
  }
  return out;
}

}  // namespace dunkl
