#pragma once

// Gauss rules from the Golub-Welsch eigenvalue method.

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "dunkl/error.hpp"

namespace dunkl {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

/// Rule for the monic recurrence p_{j+1} = (x - a_j) p_j - b_j p_{j-1}, total mass mu0.
inline GaussRule golub_welsch(const std::vector<double>& a, const std::vector<double>& b, double mu0) {
  const auto n = static_cast<Eigen::Index>(a.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    J(i, i) = a[static_cast<std::size_t>(i)];
    if (i + 1 < n) J(i, i + 1) = J(i + 1, i) = std::sqrt(b[static_cast<std::size_t>(i + 1)]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  if (es.info() != Eigen::Success) fail(ErrorKind::non_convergence, "Golub-Welsch eigen solve failed");
  GaussRule r;
  for (Eigen::Index i = 0; i < n; ++i) {
    r.nodes.push_back(es.eigenvalues()(i));
    const double v0 = es.eigenvectors()(0, i);
    r.weights.push_back(mu0 * v0 * v0);
  }
  return r;
}

}  // namespace detail

/// Gauss-Legendre on [lo, hi].
inline GaussRule gauss_legendre(int n, double lo = -1.0, double hi = 1.0) {
  if (n < 1) fail(ErrorKind::invalid_argument, "Gauss rule needs at least one node");
  std::vector<double> a(static_cast<std::size_t>(n), 0.0), b(static_cast<std::size_t>(n), 0.0);
  for (int j = 1; j < n; ++j) b[static_cast<std::size_t>(j)] = j * j / (4.0 * j * j - 1.0);
  GaussRule r = detail::golub_welsch(a, b, 2.0);
  const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    r.nodes[i] = mid + half * r.nodes[i];
    r.weights[i] *= half;
  }
  return r;
}

/// Gauss rule for the weight t^beta on [0, h], beta > -1.
inline GaussRule gauss_jacobi_origin(int n, double beta, double h = 1.0) {
  if (n < 1) fail(ErrorKind::invalid_argument, "Gauss rule needs at least one node");
  if (!(beta > -1.0)) fail(ErrorKind::invalid_argument, "weight exponent must exceed -1");
  // Jacobi weight (1-u)^0 (1+u)^beta on [-1,1], then t = h(1+u)/2.
  const double al = 0.0, be = beta;
  std::vector<double> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n), 0.0);
  a[0] = (be - al) / (al + be + 2.0);
  for (int j = 1; j < n; ++j) {
    const double s = 2.0 * j + al + be;
    a[static_cast<std::size_t>(j)] = (be * be - al * al) / (s * (s + 2.0));
    b[static_cast<std::size_t>(j)] = 4.0 * j * (j + al) * (j + be) * (j + al + be) / (s * s * (s + 1.0) * (s - 1.0));
  }
  const double mu0 = std::pow(2.0, al + be + 1.0) * std::exp(std::lgamma(al + 1.0) + std::lgamma(be + 1.0) -
                                                             std::lgamma(al + be + 2.0));
  GaussRule r = detail::golub_welsch(a, b, mu0);
  const double scale = std::pow(h / 2.0, be + 1.0);
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    r.nodes[i] = h * (1.0 + r.nodes[i]) / 2.0;
    r.weights[i] *= scale;
  }
  return r;
}

}  // namespace dunkl
