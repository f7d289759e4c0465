#pragma once

// Fitting constants of inequality families over a test-function suite.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dunkl/error.hpp"
#include "dunkl/function_basis.hpp"
#include "dunkl/inequality.hpp"

namespace dunkl {

struct Candidate {
  std::string name;
  Eigen::VectorXd coeffs;
};

/// Every basis member on its own, then `random_count` random unit combinations.
inline std::vector<Candidate> test_suite(const Tabulation& t, int random_count, std::uint64_t seed) {
  std::vector<Candidate> out;
  for (Eigen::Index j = 0; j < t.members(); ++j) out.push_back({t.names[static_cast<std::size_t>(j)], unit_vector(t.members(), j)});
  int k = 0;
  for (auto& c : random_unit_combinations(t, random_count, seed)) out.push_back({"random#" + std::to_string(k++), std::move(c)});
  return out;
}

inline std::string describe(const Tabulation& t, const Eigen::VectorXd& c, int max_terms = 4) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(c.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return std::abs(c(a)) > std::abs(c(b)); });
  std::ostringstream os;
  os.precision(4);
  int shown = 0;
  for (auto j : idx) {
    if (c(j) == 0.0 || shown == max_terms) break;
    os << (shown ? " + " : "") << c(j) << "*" << t.names[static_cast<std::size_t>(j)];
    ++shown;
  }
  if (shown == max_terms && static_cast<Eigen::Index>(shown) < (c.array() != 0.0).count()) os << " + ...";
  return os.str();
}

struct FamilyTerms {
  Estimate lhs;
  std::vector<Estimate> rhs;  // T1 (and T2)
};

/// lhs(f) <= C1 T1(f) [+ C2 T2(f)]; `field` maps coefficients to the pointwise test function.
struct InequalityFamily {
  std::string name;
  std::vector<std::string> rhs_labels;
  std::function<FieldValues(const Eigen::VectorXd&)> field;
  std::function<FamilyTerms(const FieldValues&)> eval;
};

inline InequalityFamily linear_family(std::string name, const Tabulation& t, std::vector<std::string> labels,
                                      std::function<FamilyTerms(const FieldValues&)> eval) {
  return {std::move(name), std::move(labels), [&t](const Eigen::VectorXd& c) { return combine(t, c); }, std::move(eval)};
}

struct EvaluatedCandidate {
  std::string name;
  Eigen::VectorXd coeffs;
  FamilyTerms terms;
};

inline std::vector<EvaluatedCandidate> evaluate_suite(const InequalityFamily& fam, const std::vector<Candidate>& suite) {
  std::vector<EvaluatedCandidate> out;
  for (const auto& c : suite) {
    try {
      out.push_back({c.name, c.coeffs, fam.eval(fam.field(c.coeffs))});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::degenerate_function) throw;
    }
  }
  return out;
}

namespace detail {

/// Random-direction hill climb maximizing `objective`, step scaled to |c|.
template <class Obj>
Eigen::VectorXd hill_climb(Eigen::VectorXd c, Obj&& objective, int iterations, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double best = objective(c);
  double step = 0.2;
  for (int it = 0; it < iterations && step > 1e-6; ++it) {
    Eigen::VectorXd z(c.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    const Eigen::VectorXd trial = c + step * c.norm() / std::sqrt(static_cast<double>(c.size())) * z;
    double v = -std::numeric_limits<double>::infinity();
    try {
      v = objective(trial);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::degenerate_function) throw;
    }
    if (std::isfinite(v) && v > best) {
      best = v;
      c = trial;
      step *= 1.5;
    } else {
      step *= 0.85;
    }
  }
  return c;
}

}  // namespace detail

/// Positive-definiteness floor below which a Dirichlet form counts as zero.
inline constexpr double kNullForm = 1e-12;

struct TightFit {
  double C = 0.0;
  InequalityReport report;
  std::string tightest;
  std::size_t evaluated = 0;
};

/// C = max lhs/T1 over the suite, refined by a hill climb from the best candidates.
inline TightFit fit_tight_constant(const InequalityFamily& fam, const std::vector<Candidate>& suite, int climb = 150,
                                   std::uint64_t seed = 1) {
  const auto evals = evaluate_suite(fam, suite);
  if (evals.empty()) fail(ErrorKind::degenerate_basis, "no usable test function in the suite");
  double scale = 0.0;
  for (const auto& e : evals) scale = std::max(scale, std::abs(e.terms.rhs.at(0).value));
  auto ratio = [&](const FamilyTerms& t) {
    const double d = t.rhs.at(0).value;
    if (d <= kNullForm * scale) {
      if (t.lhs.value > t.lhs.err + 1e-9) return std::numeric_limits<double>::infinity();
      return -std::numeric_limits<double>::infinity();
    }
    return t.lhs.value / d;
  };
  std::vector<std::size_t> order(evals.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ratio(evals[a].terms) > ratio(evals[b].terms); });
  if (std::isinf(ratio(evals[order[0]].terms)) && ratio(evals[order[0]].terms) > 0) {
    fail(ErrorKind::search_exhausted, "test function '" + evals[order[0]].name + "' has positive entropy and zero energy");
  }
  Eigen::VectorXd best = evals[order[0]].coeffs;
  std::string best_name = evals[order[0]].name;
  double best_ratio = ratio(evals[order[0]].terms);
  if (climb > 0) {
    const std::size_t starts = std::min<std::size_t>(3, order.size());
    for (std::size_t s = 0; s < starts; ++s) {
      auto obj = [&](const Eigen::VectorXd& c) { return ratio(fam.eval(fam.field(c))); };
      const Eigen::VectorXd c = detail::hill_climb(evals[order[s]].coeffs, obj, climb / static_cast<int>(starts), seed + s);
      const double r = obj(c);
      if (r > best_ratio) {
        best_ratio = r;
        best = c;
        best_name = "climb from " + evals[order[s]].name;
      }
    }
  }
  TightFit fit;
  fit.C = best_ratio;
  fit.tightest = best_name;
  fit.evaluated = evals.size();
  const FamilyTerms t = fam.eval(fam.field(best));
  fit.report = make_report(fam.name, t.lhs, {{fam.rhs_labels.at(0), fit.C, t.rhs.at(0)}}, {{"C", fit.C}}, best_name);
  return fit;
}

struct TwoConstantFit {
  double C1 = 0.0;
  double C2 = 0.0;
  InequalityReport report;
  std::vector<std::pair<double, double>> pareto;  // (C1, C2(C1)) on the grid
  std::string tightest;
};

inline constexpr double kSearchLow = 1e-3;
inline constexpr double kSearchHigh = 1e3;
inline constexpr int kSearchPoints = 61;

/// For C1 on a log grid over [1e-3, 1e3], C2(C1) = max (lhs - C1 T1) / T2 (>= 0);
/// returns the feasible pair minimizing C1 + C2.
inline TwoConstantFit fit_two_constants(const InequalityFamily& fam, const std::vector<Candidate>& suite, int climb = 120,
                                        std::uint64_t seed = 1) {
  const auto evals = evaluate_suite(fam, suite);
  if (evals.empty()) fail(ErrorKind::degenerate_basis, "no usable test function in the suite");
  auto c2_of = [](const FamilyTerms& t, double c1) {
    const double t2 = t.rhs.at(1).value;
    if (!(t2 > 0.0)) return -std::numeric_limits<double>::infinity();
    return (t.lhs.value - c1 * t.rhs.at(0).value) / t2;
  };
  TwoConstantFit fit;
  double best_sum = std::numeric_limits<double>::infinity();
  std::size_t best_idx = 0;
  double max_ratio1 = 0.0, max_ratio2 = 0.0;
  for (const auto& e : evals) {
    if (e.terms.rhs[0].value > 0.0) max_ratio1 = std::max(max_ratio1, e.terms.lhs.value / e.terms.rhs[0].value);
    if (e.terms.rhs[1].value > 0.0) max_ratio2 = std::max(max_ratio2, e.terms.lhs.value / e.terms.rhs[1].value);
  }
  for (int g = 0; g < kSearchPoints; ++g) {
    const double c1 = kSearchLow * std::pow(kSearchHigh / kSearchLow, g / static_cast<double>(kSearchPoints - 1));
    double c2 = 0.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < evals.size(); ++i) {
      const double v = c2_of(evals[i].terms, c1);
      if (v > c2) {
        c2 = v;
        arg = i;
      }
    }
    fit.pareto.emplace_back(c1, c2);
    if (c2 <= kSearchHigh && c1 + c2 < best_sum) {
      best_sum = c1 + c2;
      fit.C1 = c1;
      fit.C2 = c2;
      best_idx = arg;
    }
  }
  if (!std::isfinite(best_sum)) {
    std::ostringstream os;
    os << "no (C1, C2) in the search box; max lhs/T1 = " << max_ratio1 << ", max lhs/T2 = " << max_ratio2;
    fail(ErrorKind::search_exhausted, os.str());
  }
  Eigen::VectorXd best = evals[best_idx].coeffs;
  fit.tightest = evals[best_idx].name;
  if (climb > 0) {
    auto obj = [&](const Eigen::VectorXd& c) { return c2_of(fam.eval(fam.field(c)), fit.C1); };
    const Eigen::VectorXd c = detail::hill_climb(best, obj, climb, seed);
    const double v = obj(c);
    if (v > fit.C2) {
      fit.C2 = v;
      best = c;
      fit.tightest = "climb from " + fit.tightest;
    }
  }
  const FamilyTerms t = fam.eval(fam.field(best));
  fit.report = make_report(fam.name, t.lhs, {{fam.rhs_labels.at(0), fit.C1, t.rhs.at(0)}, {fam.rhs_labels.at(1), fit.C2, t.rhs.at(1)}},
                           {{"C1", fit.C1}, {"C2", fit.C2}}, fit.tightest);
  return fit;
}

struct RayleighResult {
  double lambda_max = 0.0;
  Eigen::VectorXd coeffs;
  Eigen::Index rank = 0;
};

/// Largest lambda of B v = lambda A v with B the covariance form and A the
/// Dirichlet form of the basis; a lower bound on the best Poincare constant.
inline RayleighResult estimate_best_constant_rayleigh(const Tabulation& t, GradientKind gradient = GradientKind::dunkl) {
  const auto& s = t.me->set(0);
  const Matrix Vs = t.V.middleRows(s.begin, s.size);
  const Eigen::VectorXd mean = Vs.transpose() * s.weights;
  const Matrix B = Vs.transpose() * s.weights.asDiagonal() * Vs - mean * mean.transpose();
  const auto& grads = gradient == GradientKind::dunkl ? t.D : t.G;
  if (grads.empty()) fail(ErrorKind::gradient_required, "gradients not tabulated");
  Matrix A = Matrix::Zero(t.members(), t.members());
  for (const auto& Gi : grads) {
    const Matrix Gs = Gi.middleRows(s.begin, s.size);
    A += Gs.transpose() * s.weights.asDiagonal() * Gs;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> ea(A);
  const Eigen::VectorXd& la = ea.eigenvalues();
  const double top = la.maxCoeff();
  if (!(top > 0.0)) fail(ErrorKind::degenerate_basis, "Dirichlet form vanishes on the basis");
  std::vector<Eigen::Index> range, null;
  for (Eigen::Index i = 0; i < la.size(); ++i) (la(i) > 1e-10 * top ? range : null).push_back(i);
  const double bscale = std::max(B.diagonal().maxCoeff(), 1e-300);
  for (auto i : null) {
    const Eigen::VectorXd v = ea.eigenvectors().col(i);
    if (v.dot(B * v) > 1e-8 * bscale) {
      fail(ErrorKind::degenerate_basis, "Dirichlet form is singular on a non-constant direction");
    }
  }
  Matrix P(t.members(), static_cast<Eigen::Index>(range.size()));
  for (std::size_t j = 0; j < range.size(); ++j) {
    P.col(static_cast<Eigen::Index>(j)) = ea.eigenvectors().col(range[j]) / std::sqrt(la(range[j]));
  }
  const Matrix M = P.transpose() * B * P;
  Eigen::SelfAdjointEigenSolver<Matrix> em(M);
  const Eigen::Index top_idx = em.eigenvalues().size() - 1;
  RayleighResult r;
  r.lambda_max = em.eigenvalues()(top_idx);
  r.coeffs = P * em.eigenvectors().col(top_idx);
  r.rank = static_cast<Eigen::Index>(range.size());
  return r;
}

/// 1 + eps v for the Rayleigh extremal v: the near-constant regime in which
/// entropy behaves like twice the variance.
inline std::vector<Candidate> poincare_limit_candidates(const Tabulation& t, const Eigen::VectorXd& v,
                                                        const std::vector<double>& eps = {0.2, 0.05, 0.01}) {
  std::optional<Eigen::Index> constant;
  for (Eigen::Index j = 0; j < t.members() && !constant; ++j) {
    const auto col = t.V.col(j);
    if (col.maxCoeff() - col.minCoeff() <= 1e-12 * std::max(1.0, col.cwiseAbs().maxCoeff()) && col(0) != 0.0) constant = j;
  }
  if (!constant) return {};
  const double scale = std::sqrt(std::max(v.dot(gram(t) * v), 1e-300));
  std::vector<Candidate> out;
  for (double e : eps) {
    Eigen::VectorXd c = (e / scale) * v;
    c(*constant) += 1.0 / t.V(0, *constant);
    std::ostringstream name;
    name << "1 + " << e << " * rayleigh extremal";
    out.push_back({name.str(), c});
  }
  return out;
}

/// For C(eps) = n/2 (log(1/eps) - c): the largest c compatible with f is
/// log(2 E / (n M)) + 1 - 2 Ent / (n M), attained at eps = n M / (2 E),
/// where M = int f^2, E = int |grad_k f|^2, n = N + 2 gamma.
struct CFit {
  double c = 0.0;
  double eps_star = 0.0;
  std::string tightest;
  Eigen::VectorXd coeffs;
};

inline double c_bound(double ent, double energy, double mass, double n) {
  return std::log(2.0 * energy / (n * mass)) + 1.0 - 2.0 * ent / (n * mass);
}

inline double c_of_epsilon(double eps, double c, double n) { return 0.5 * n * (std::log(1.0 / eps) - c); }

/// `fam` must return lhs = Ent(f^2), rhs = {E, M}.
inline CFit fit_c(const InequalityFamily& fam, const std::vector<Candidate>& suite, double n, int climb = 120,
                  std::uint64_t seed = 1) {
  const auto evals = evaluate_suite(fam, suite);
  CFit fit;
  fit.c = std::numeric_limits<double>::infinity();
  auto bound = [&](const FamilyTerms& t) {
    if (!(t.rhs.at(0).value > 0.0) || !(t.rhs.at(1).value > 0.0)) return std::numeric_limits<double>::infinity();
    return c_bound(t.lhs.value, t.rhs[0].value, t.rhs[1].value, n);
  };
  for (const auto& e : evals) {
    const double b = bound(e.terms);
    if (b < fit.c) {
      fit.c = b;
      fit.tightest = e.name;
      fit.coeffs = e.coeffs;
    }
  }
  if (!std::isfinite(fit.c)) fail(ErrorKind::degenerate_basis, "no test function with positive energy and mass");
  if (climb > 0) {
    auto obj = [&](const Eigen::VectorXd& c) { return -bound(fam.eval(fam.field(c))); };
    const Eigen::VectorXd c = detail::hill_climb(fit.coeffs, obj, climb, seed);
    if (-obj(c) < fit.c) {
      fit.c = -obj(c);
      fit.coeffs = c;
      fit.tightest = "climb from " + fit.tightest;
    }
  }
  const FamilyTerms t = fam.eval(fam.field(fit.coeffs));
  fit.eps_star = n * t.rhs[1].value / (2.0 * t.rhs[0].value);
  return fit;
}

struct SobolevRatio {
  double lower_bound = 0.0;
  double q = 0.0;
  Eigen::VectorXd coeffs;
  std::string extremal;
};

inline double sobolev_exponent(double p, double n) {
  if (!(p >= 1.0) || !(p < n)) fail(ErrorKind::out_of_range, "Sobolev exponent needs 1 <= p < N + 2 gamma");
  return p * n / (n - p);
}

/// ||f||_q / ||grad_k f||_p for one test function, on weighted set `set`.
inline double sobolev_quotient(const MeasureEstimator& me, const FieldValues& fv, double p, double q, std::size_t set = 0) {
  const double num = std::pow(me.integrate_on(set, Eigen::VectorXd(fv.f.array().abs().pow(q))), 1.0 / q);
  const Eigen::VectorXd g = fv.dgrad.rowwise().norm();
  const double den = std::pow(me.integrate_on(set, Eigen::VectorXd(g.array().pow(p))), 1.0 / p);
  if (!(den > 0.0)) return 0.0;
  return num / den;
}

/// max over basis members, random combinations and a hill climb; a lower bound for C_DS.
inline SobolevRatio sobolev_ratio(const Tabulation& t, double p, int random_count = 200, int climb = 300,
                                  std::uint64_t seed = 1) {
  const double n = t.me->root_system().homogeneous_dim();
  SobolevRatio out;
  out.q = sobolev_exponent(p, n);
  auto obj = [&](const Eigen::VectorXd& c) { return sobolev_quotient(*t.me, combine(t, c), p, out.q); };
  for (const auto& cand : test_suite(t, random_count, seed)) {
    const double v = obj(cand.coeffs);
    if (v > out.lower_bound) {
      out.lower_bound = v;
      out.coeffs = cand.coeffs;
      out.extremal = cand.name;
    }
  }
  if (out.coeffs.size() == 0) fail(ErrorKind::degenerate_basis, "no test function with nonzero gradient");
  const Eigen::VectorXd c = detail::hill_climb(out.coeffs, obj, climb, seed + 1);
  const double v = obj(c);
  if (v > out.lower_bound) {
    out.lower_bound = v;
    out.coeffs = c;
    out.extremal = describe(t, c);
  }
  return out;
}

}  // namespace dunkl
