#pragma once

// Rothaus defect, Herbst-type concentration and integrability, chamber
// reduction, and the L^p entropy bound.

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "dunkl/constants.hpp"
#include "dunkl/diagnostics.hpp"
#include "dunkl/error.hpp"
#include "dunkl/estimator.hpp"
#include "dunkl/function_basis.hpp"
#include "dunkl/inequality.hpp"
#include "dunkl/quadrature.hpp"
#include "dunkl/sampler.hpp"

namespace dunkl {

struct RothausRow {
  double c = 0.0;
  Estimate ent;      // Ent(f^2)
  Estimate mass;     // int f^2
  Estimate shifted;  // Ent((f + c)^2)
  Estimate defect;
  bool negative = false;  // defect < -err
};

/// defect(c) = Ent(f^2) + 2 int f^2 - Ent((f + c)^2), with f recentred first.
inline std::vector<RothausRow> rothaus_defect(const MeasureEstimator& me, const Eigen::VectorXd& f,
                                              const std::vector<double>& cs) {
  const double mean = me.integrate_on(0, f);
  const Eigen::VectorXd g = (f.array() - mean).matrix();
  const Estimate ent = entropy(me, g, EntropyVariant::ent);
  const Estimate mass = weighted_norm(me, g);
  std::vector<RothausRow> rows;
  for (double c : cs) {
    const Estimate shifted = entropy(me, Eigen::VectorXd(g.array() + c), EntropyVariant::ent);
    RothausRow r;
    r.c = c;
    r.ent = ent;
    r.mass = mass;
    r.shifted = shifted;
    r.defect = ent + 2.0 * mass - shifted;
    r.negative = r.defect.value < -r.defect.err;
    rows.push_back(r);
  }
  return rows;
}

struct ConcentrationRow {
  double r = 0.0;
  double tail = 0.0;
  double bound = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool flagged = false;  // ci_low > bound
};

struct ConcentrationProfile {
  double mean = 0.0;
  double n_eff = 0.0;
  double a = 0.0;
  double C = 0.0;
  std::vector<ConcentrationRow> rows;
  bool satisfied() const {
    return std::none_of(rows.begin(), rows.end(), [](const ConcentrationRow& r) { return r.flagged; });
  }
};

/// Wilson score interval for k successes in n_eff effective trials.
inline std::pair<double, double> wilson_interval(double phat, double n, double z) {
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (phat + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/// Empirical P(f >= mean + r) against e^{-r^2/(aC)}, with a Wilson interval at
/// the effective sample size (ESS of f summed over chains).
inline ConcentrationProfile concentration_profile(const RootSystem& rs, const std::vector<SampleChain>& chains,
                                                  const ScalarField& f, double C, const std::vector<double>& r_grid,
                                                  double z = 2.576) {
  if (!f.lipschitz) fail(ErrorKind::hypothesis_violation, "test function needs a Lipschitz bound");
  if (!f.g_invariant || !spot_check_invariance(f, rs, 20, 11)) {
    fail(ErrorKind::hypothesis_violation, "test function '" + f.name + "' is not G-invariant");
  }
  if (!(C > 0.0)) fail(ErrorKind::invalid_argument, "constant C must be positive");
  ConcentrationProfile out;
  out.a = *f.lipschitz;
  out.C = C;
  std::vector<std::vector<double>> series;
  double total = 0.0, sum = 0.0;
  for (const auto& c : chains) {
    std::vector<double> s(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) s[i] = f(Vector(c.points.row(static_cast<Eigen::Index>(i)).transpose()));
    for (double v : s) sum += v;
    total += static_cast<double>(s.size());
    series.push_back(std::move(s));
  }
  if (total == 0.0) fail(ErrorKind::insufficient_chains, "empty sample");
  out.mean = sum / total;
  for (const auto& s : series) out.n_eff += ess(s);
  for (double r : r_grid) {
    double hits = 0.0;
    for (const auto& s : series) {
      for (double v : s) hits += v >= out.mean + r ? 1.0 : 0.0;
    }
    ConcentrationRow row;
    row.r = r;
    row.tail = hits / total;
    row.bound = std::exp(-r * r / (out.a * C));
    std::tie(row.ci_low, row.ci_high) = wilson_interval(row.tail, out.n_eff, z);
    row.flagged = row.ci_low > row.bound;
    out.rows.push_back(row);
  }
  return out;
}

/// E e^{h(|x|)} under e^{-r^p} r^{n-1} dr on (0, inf), by exp-sinh quadrature
/// in log space; +inf when the integral diverges.
inline double radial_exp_expectation_1d(double n, double p, const std::function<double(double)>& h) {
  boost::math::quadrature::exp_sinh<double> integrator;
  auto density = [&](double r, double extra) {
    const double lw = extra + (n - 1.0) * std::log(r) - std::pow(r, p);
    return lw < -745.0 ? 0.0 : std::exp(lw);
  };
  double num = 0.0;
  try {
    num = integrator.integrate([&](double r) { return r > 0.0 ? density(r, h(r)) : 0.0; });
  } catch (const boost::math::evaluation_error&) {
    return std::numeric_limits<double>::infinity();
  }
  const double den = integrator.integrate([&](double r) { return r > 0.0 ? density(r, 0.0) : 0.0; });
  return num / den;
}

struct IntegrabilityRow {
  double R = 0.0;
  Estimate integral;
  double difference = 0.0;  // I(R) - I(previous R)
};

struct MgfRow {
  double s = 0.0;
  Estimate mgf;
  double bound = 0.0;
  bool violated = false;
};

struct IntegrabilityScan {
  double b = 0.0;
  double threshold = 0.0;  // sqrt(2/(aC)), when C is known
  std::vector<IntegrabilityRow> rows;
  bool converged = false;
  std::string verdict;
  std::vector<MgfRow> mgf;
};

/// Truncated integrals int_{B_R} e^{b^2 f^2 / 2} dmu_U over ascending radii.
/// Converged when the last two successive differences each shrink by at least
/// half (or fall below 1e-12 relative); otherwise divergence is reported.
/// With C > 0 the moment-generating bound exp(s int f + aC s^2/4) is checked
/// for s in {-2, -1, 1, 2} on the untruncated measure.
inline IntegrabilityScan exp_integrability_scan(const MeasureSpec& ms, const ScalarField& f, double b,
                                                const std::vector<double>& radii, double C = 0.0, int resolution = 0) {
  if (!ms.confined() || ms.variant != MeasureVariant::mu_U) fail(ErrorKind::invalid_argument, "scan needs a mu_U measure");
  if (radii.size() < 3) fail(ErrorKind::invalid_argument, "scan needs at least three radii");
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (!(radii[i] > radii[i - 1])) fail(ErrorKind::invalid_argument, "radii must be ascending");
  }
  if (!f.lipschitz) fail(ErrorKind::hypothesis_violation, "test function needs a Lipschitz bound");
  IntegrabilityScan out;
  out.b = b;
  const double a = *f.lipschitz;
  if (C > 0.0) {
    out.threshold = std::sqrt(2.0 / (a * C));
    if (!(b < out.threshold) && ms.p >= 2.0) {
      fail(ErrorKind::hypothesis_violation, "b is not below the admissible threshold sqrt(2/(aC))");
    }
  }
  const int m = resolution > 0 ? resolution : default_resolution(*ms.rs);
  const double Z = ms.Z ? *ms.Z : normalization(ms, m);
  double prev = 0.0;
  for (double R : radii) {
    MeasureSpec ball = ball_measure(ms.rs, R);
    ball.normalized = false;
    const QuadratureGrid g = build_grid(ball, m);
    const Integral I = integrate_fn(g, [&](const Vector& x) {
      const double v = f(x);
      return std::exp(0.5 * b * b * v * v - std::pow(x.norm(), ms.p)) / Z;
    });
    IntegrabilityRow row;
    row.R = R;
    row.integral = {I.value, I.err};
    row.difference = I.value - prev;
    prev = I.value;
    out.rows.push_back(row);
  }
  const auto& r = out.rows;
  const std::size_t k = r.size();
  const double last = std::abs(r[k - 1].difference), mid = std::abs(r[k - 2].difference), early = std::abs(r[k - 3].difference);
  const double scale = std::abs(r[k - 1].integral.value);
  const bool negligible = last <= 1e-12 * scale;
  const bool shrinking = last <= 0.5 * mid && mid <= 0.5 * early;
  out.converged = std::isfinite(scale) && (negligible || shrinking);
  out.verdict = out.converged ? "converged" : "divergent";
  if (C > 0.0) {
    MeasureSpec full = ms;
    full.Z = Z;
    const MeasureEstimator me = MeasureEstimator::from_grid(build_grid(full, m));
    const Eigen::VectorXd fv = me.evaluate([&](const Vector& x) { return f(x); });
    const double mean = me.integrate_on(0, fv);
    for (double s : {-2.0, -1.0, 1.0, 2.0}) {
      MgfRow row;
      row.s = s;
      row.mgf = me.expect(Eigen::VectorXd((s * fv.array()).exp()));
      row.bound = std::exp(s * mean + a * C * s * s / 4.0);
      row.violated = row.mgf.value - row.mgf.err > row.bound;
      out.mgf.push_back(row);
    }
  }
  return out;
}

/// |int g dmu - |G| int_H g dmu| against the combined error bars.
inline InequalityReport chamber_invariance_check(const RootSystem& rs, const ScalarField& g, const MeasureEstimator& me_full,
                                                 const MeasureEstimator& me_chamber) {
  if (!spot_check_invariance(g, rs, 20, 5, 1e-8)) {
    fail(ErrorKind::hypothesis_violation, "function '" + g.name + "' is not G-invariant");
  }
  const Estimate full = me_full.expect_fn([&](const Vector& x) { return g(x); });
  const Estimate part = me_chamber.expect_fn([&](const Vector& x) { return g(x); });
  const double order = static_cast<double>(rs.group().size());
  InequalityReport r = make_report("chamber-invariance", full, {{"|G| * chamber integral", order, part}},
                                   {{"group_order", order}}, g.name);
  r.violated = r.valid && std::abs(r.margin) > r.combined_err;
  return r;
}

/// L^p entropy bound with C(eps) = n/2 (log(1/eps) - c):
///   Ent(f^p) <= eps int grad_k f . grad_k f^{p-1} + C(2 eps / p) int f^p.
/// `c` is the fitted constant of the p = 2 family; f must be nonnegative.
inline InequalityReport lp_logsob_check(const Tabulation& t, const Eigen::VectorXd& coeffs, double p, double eps, double c,
                                        const std::string& test_function = {}) {
  if (!(p > 2.0)) fail(ErrorKind::out_of_range, "L^p entropy bound needs p > 2");
  if (!(eps > 0.0)) fail(ErrorKind::invalid_argument, "epsilon must be positive");
  const MeasureEstimator& me = *t.me;
  const FieldValues f = combine(t, coeffs);
  const double top = f.f.cwiseAbs().maxCoeff();
  if (f.f.minCoeff() < -1e-12 * std::max(top, 1.0)) fail(ErrorKind::hypothesis_violation, "test function takes negative values");
  const FieldValues g = compose(
      t, coeffs, [p](double q) { return std::pow(std::max(q, 0.0), p - 1.0); },
      [p](double q) { return (p - 1.0) * std::pow(std::max(q, 0.0), p - 2.0); });
  const Estimate lhs = entropy(me, f.f, EntropyVariant::ent_pow, p);
  const Estimate cross = me.expect(Eigen::VectorXd(f.dgrad.cwiseProduct(g.dgrad).rowwise().sum()));
  const Estimate mass = weighted_norm(me, Eigen::VectorXd(f.f.array().abs().pow(p / 2.0)));
  const double n = me.root_system().homogeneous_dim();
  const double C = c_of_epsilon(2.0 * eps / p, c, n);
  return make_report("lp-logsob", lhs, {{"int grad_k f . grad_k f^{p-1}", eps, cross}, {"int f^p", C, mass}},
                     {{"epsilon", eps}, {"c", c}, {"C_of_epsilon", C}, {"p", p}}, test_function);
}

}  // namespace dunkl
