#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include "dunkl/error.hpp"
#include "dunkl/polynomial.hpp"
#include "dunkl/root_system.hpp"

namespace dunkl {

/// A test function on R^N. `gradient` and `laplacian` are optional; when absent,
/// central finite differences are used where a caller allows it.
struct ScalarField {
  std::string name;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<double(const Vector&)> laplacian;
  std::optional<double> lipschitz;
  bool g_invariant = false;

  double operator()(const Vector& x) const { return value(x); }
  bool has_gradient() const { return static_cast<bool>(gradient); }

  Vector grad(const Vector& x, bool allow_fd = true) const {
    if (gradient) return gradient(x);
    if (!allow_fd) fail(ErrorKind::gradient_required, "field '" + name + "' has no analytic gradient");
    return fd_gradient(x);
  }

  /// Central differences with step max(1e-6, 1e-6 |x|).
  Vector fd_gradient(const Vector& x) const {
    const double h = std::max(1e-6, 1e-6 * x.norm());
    Vector g(x.size());
    Vector xp = x, xm = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      xp(j) = x(j) + h;
      xm(j) = x(j) - h;
      g(j) = (value(xp) - value(xm)) / (2 * h);
      xp(j) = xm(j) = x(j);
    }
    return g;
  }

  double lap(const Vector& x) const {
    if (laplacian) return laplacian(x);
    const double h = 1e-4 * std::max(1.0, x.norm());
    const double f0 = value(x);
    double s = 0.0;
    Vector y = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      y(j) = x(j) + h;
      const double fp = value(y);
      y(j) = x(j) - h;
      const double fm = value(y);
      y(j) = x(j);
      s += (fp - 2 * f0 + fm) / (h * h);
    }
    return s;
  }
};

inline ScalarField field_from_polynomial(const Polynomial& p, std::string name = {}) {
  const int n = p.dim();
  std::vector<CompiledPolynomial> d;
  Polynomial lap(n);
  for (int i = 0; i < n; ++i) {
    const Polynomial di = p.derivative(i);
    d.emplace_back(di);
    lap += di.derivative(i);
  }
  ScalarField f;
  f.name = name.empty() ? p.to_string() : std::move(name);
  f.value = [c = CompiledPolynomial(p)](const Vector& x) { return c(x); };
  f.gradient = [d](const Vector& x) {
    Vector g(static_cast<Eigen::Index>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) g(static_cast<Eigen::Index>(i)) = d[i](x);
    return g;
  };
  f.laplacian = [c = CompiledPolynomial(lap)](const Vector& x) { return c(x); };
  return f;
}

/// f(x) = |x|; 1-Lipschitz and radial, hence G-invariant.
inline ScalarField norm_field() {
  ScalarField f;
  f.name = "|x|";
  f.value = [](const Vector& x) { return x.norm(); };
  f.gradient = [](const Vector& x) { return Vector(x / x.norm()); };
  f.laplacian = [](const Vector& x) { return (static_cast<double>(x.size()) - 1.0) / x.norm(); };
  f.lipschitz = 1.0;
  f.g_invariant = true;
  return f;
}

/// Largest relative mismatch between the analytic gradient and central differences.
inline double gradient_mismatch(const ScalarField& f, const std::vector<Vector>& points) {
  double worst = 0.0;
  for (const auto& x : points) {
    const Vector a = f.grad(x, false);
    const Vector n = f.fd_gradient(x);
    worst = std::max(worst, (a - n).norm() / std::max(1.0, a.norm()));
  }
  return worst;
}

/// Spot check of f(gx) = f(x) over all group elements.
inline bool spot_check_invariance(const ScalarField& f, const RootSystem& rs, int samples, std::uint64_t seed,
                                  double rel_tol = 1e-9) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int s = 0; s < samples; ++s) {
    Vector x(rs.dim());
    for (Eigen::Index j = 0; j < x.size(); ++j) x(j) = normal(rng);
    const double fx = f(x);
    for (const auto& g : rs.group()) {
      const double fg = f(Vector(g.matrix * x));
      if (std::abs(fg - fx) > rel_tol * std::max(1.0, std::abs(fx))) return false;
    }
  }
  return true;
}

}  // namespace dunkl
