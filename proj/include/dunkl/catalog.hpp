#pragma once

// Named checks: each binds a measure, a test-function suite and one inequality
// (with explicit or fitted constants) and returns its reports.

#include <nlohmann/json.hpp>

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dunkl/applications.hpp"
#include "dunkl/constants.hpp"
#include "dunkl/diagnostics.hpp"
#include "dunkl/dunkl_ops.hpp"
#include "dunkl/error.hpp"
#include "dunkl/estimator.hpp"
#include "dunkl/function_basis.hpp"
#include "dunkl/inequality.hpp"
#include "dunkl/quadrature.hpp"
#include "dunkl/sampler.hpp"

namespace dunkl {

struct EstimatorSettings {
  enum class Kind { quadrature, mcmc };
  Kind kind = Kind::quadrature;
  std::optional<double> L;
  int resolution = 0;
  int n = 20000;
  int chains = 4;
  Algo algo = Algo::rwm;
};

inline std::string to_string(EstimatorSettings::Kind k) { return k == EstimatorSettings::Kind::mcmc ? "mcmc" : "quadrature"; }

struct CheckContext {
  std::shared_ptr<const RootSystem> rs;
  double p = 2.0;
  bool chamber = false;
  EstimatorSettings estimator;
  nlohmann::json options = nlohmann::json::object();
  std::uint64_t seed = 0;
  int jobs = 1;

  double number(const std::string& key, double fallback) const {
    return options.contains(key) ? options.at(key).get<double>() : fallback;
  }
  int integer(const std::string& key, int fallback) const { return options.contains(key) ? options.at(key).get<int>() : fallback; }
  std::vector<double> list(const std::string& key, std::vector<double> fallback) const {
    return options.contains(key) ? options.at(key).get<std::vector<double>>() : fallback;
  }
  /// Independent stream derived from the master seed.
  std::uint64_t stream(std::uint64_t tag) const { return chain_seed(seed, static_cast<std::size_t>(tag)); }
};

struct PlotTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct CheckResult {
  std::string check;
  std::string anchor;
  std::vector<InequalityReport> reports;
  /// One row per inequality instance for summary.csv (the worst case of each).
  std::vector<InequalityReport> headline;
  nlohmann::json details = nlohmann::json::object();
  std::vector<PlotTable> tables;
  std::vector<SampleChain> chains;
  std::vector<std::string> findings;
  bool violated = false;
};

enum class EstimatorNeed { quadrature, mcmc, either, exact };
enum class ChamberNeed { full, chamber };
enum class OptionType { number, integer, number_list };

inline std::string to_string(EstimatorNeed e) {
  switch (e) {
    case EstimatorNeed::quadrature: return "quadrature";
    case EstimatorNeed::mcmc: return "mcmc";
    case EstimatorNeed::either: return "quadrature|mcmc";
    case EstimatorNeed::exact: return "exact";
  }
  return "unknown";
}

struct CheckInfo {
  std::string name;
  std::string anchor;
  EstimatorNeed estimator = EstimatorNeed::either;
  ChamberNeed chamber = ChamberNeed::full;
  /// Fits constants rather than testing given ones.
  bool fitted = false;
  std::map<std::string, OptionType> options;
  /// Empty when (root system, p, options) satisfy the hypotheses; otherwise the reason.
  std::function<std::string(const RootSystem&, double, const nlohmann::json&)> precondition;
  std::function<CheckResult(const CheckContext&)> run;
};

namespace detail {

inline constexpr Eigen::Index kMaxBasisDraws = 40000;

struct Prepared {
  MeasureEstimator me;
  std::vector<SampleChain> chains;
};

inline MeasureSpec confined_measure(const CheckContext& ctx, double p) {
  return ctx.chamber ? mu_u_chamber_measure(ctx.rs, p) : mu_u_measure(ctx.rs, p);
}

inline int grid_resolution(const CheckContext& ctx) {
  if (ctx.estimator.resolution > 0) return ctx.estimator.resolution;
  return ctx.rs->dim() >= 3 ? 8 : default_resolution(*ctx.rs);
}

/// Every `stride`-th draw of each chain, so at most kMaxBasisDraws points in total.
inline std::vector<SampleChain> thin_for_basis(const std::vector<SampleChain>& chains) {
  Eigen::Index total = 0;
  for (const auto& c : chains) total += static_cast<Eigen::Index>(c.size());
  const Eigen::Index stride = std::max<Eigen::Index>(1, (total + kMaxBasisDraws - 1) / kMaxBasisDraws);
  if (stride == 1) return chains;
  std::vector<SampleChain> out;
  for (const auto& c : chains) {
    SampleChain t = c;
    const Eigen::Index n = (static_cast<Eigen::Index>(c.size()) + stride - 1) / stride;
    t.points.resize(n, c.dim());
    t.log_density.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
      t.points.row(i) = c.points.row(i * stride);
      t.log_density.push_back(c.log_density[static_cast<std::size_t>(i * stride)]);
    }
    t.thinning = c.thinning * static_cast<int>(stride);
    out.push_back(std::move(t));
  }
  return out;
}

/// Quadrature grid, or chains when the config asks for MCMC and the measure is samplable.
inline Prepared prepare(const CheckContext& ctx, MeasureSpec ms, std::uint64_t tag = 1) {
  if (ms.confined() && ctx.estimator.kind == EstimatorSettings::Kind::mcmc) {
    auto chains = sample_chains(ms, ctx.estimator.n, ctx.estimator.chains, ctx.estimator.algo, ctx.stream(tag), ctx.jobs);
    MeasureEstimator me = MeasureEstimator::from_chains(ms, thin_for_basis(chains));
    return {std::move(me), std::move(chains)};
  }
  if (ctx.estimator.L && ms.variant != MeasureVariant::ball) ms.truncation = *ctx.estimator.L;
  return {MeasureEstimator::from_grid(build_grid(ms, grid_resolution(ctx))), {}};
}

/// Hermite products to the configured degree, plus exponential and radial tilts.
inline FunctionBasis test_basis(const CheckContext& ctx, double p, bool tilts, RadialFactor rho = {}) {
  const int dim = ctx.rs->dim();
  FunctionBasis b = hermite_basis(dim, ctx.integer("basis_degree", default_basis_degree(dim)), rho);
  if (!tilts) return b;
  const double scale = p >= 2.0 ? 1.0 : 0.5;
  std::vector<Vector> cs;
  Vector e1 = Vector::Zero(dim);
  e1(0) = 1.0;
  cs.push_back(scale * e1);
  cs.push_back(-2.0 * scale * e1);
  if (dim >= 2) {
    Vector d = Vector::Zero(dim);
    d(0) = scale;
    d(1) = -scale;
    cs.push_back(d);
  }
  for (const auto& c : cs) b.add(BasisMember::from_field(exponential_tilt(c)));
  const std::vector<double> radial = p >= 2.0 ? std::vector<double>{1.0, 2.0, 4.0} : std::vector<double>{0.5, 1.0};
  for (double s : radial) b.add(BasisMember::from_field(radial_tilt(s)));
  return b;
}

inline std::vector<Candidate> suite_for(const CheckContext& ctx, const Tabulation& t) {
  return test_suite(t, ctx.integer("random", 200), ctx.stream(101));
}

/// Pointwise weight |x|^a on the estimator's cloud.
inline Eigen::VectorXd radial_power(const MeasureEstimator& me, double a) {
  return me.evaluate([a](const Vector& x) { return std::pow(x.norm(), a); });
}

inline Estimate weighted(const MeasureEstimator& me, const Eigen::VectorXd& f, const Eigen::VectorXd& w, NormKind norm) {
  const Eigen::VectorXd v = norm == NormKind::l2 ? Eigen::VectorXd(f.array().square()) : Eigen::VectorXd(f.array().abs());
  return me.expect(v.cwiseProduct(w));
}

inline void add_instance(CheckResult& out, std::vector<InequalityReport> reports) {
  if (reports.empty()) return;
  out.headline.push_back(worst(reports));
  for (auto& r : reports) {
    out.violated = out.violated || r.violated;
    out.reports.push_back(std::move(r));
  }
}

inline std::string describe_candidate(const Tabulation& t, const Candidate& c) {
  return c.name.rfind("random#", 0) == 0 ? c.name + ": " + describe(t, c.coeffs) : c.name;
}

inline nlohmann::json estimate_json(const Estimate& e) { return to_json(e); }

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

/// Tight family lhs <= C T1 with a Dunkl or classical Dirichlet form.
inline InequalityFamily tight_family(const std::string& name, const Tabulation& t, GradientKind gradient,
                                     EntropyVariant variant, double s) {
  return linear_family(name, t, {"int |grad f|^2"}, [&t, gradient, variant, s](const FieldValues& fv) {
    return FamilyTerms{entropy(*t.me, fv.f, variant, s), {dirichlet_form(*t.me, fv, NormKind::l2, gradient)}};
  });
}

/// Fresh random combinations judged against fitted constants.
inline std::vector<InequalityReport> holdout(const InequalityFamily& fam, const Tabulation& t, int count, std::uint64_t seed,
                                             const std::vector<double>& constants) {
  std::vector<InequalityReport> out;
  int k = 0;
  for (const auto& c : random_unit_combinations(t, count, seed)) {
    FamilyTerms terms;
    try {
      terms = fam.eval(fam.field(c));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::degenerate_function) throw;
      continue;
    }
    std::vector<RhsTerm> rhs;
    std::map<std::string, double> named;
    for (std::size_t j = 0; j < terms.rhs.size(); ++j) {
      rhs.push_back({fam.rhs_labels.at(j), constants.at(j), terms.rhs[j]});
      named[constants.size() == 1 ? "C" : "C" + std::to_string(j + 1)] = constants[j];
    }
    out.push_back(make_report(fam.name + " (held out)", terms.lhs, std::move(rhs), named, "holdout#" + std::to_string(k++)));
  }
  return out;
}

inline void record_tight(CheckResult& out, const TightFit& fit, const std::string& key) {
  out.details[key] = {{"C", fit.C}, {"tightest", fit.tightest}, {"evaluated", fit.evaluated}};
}

inline void record_two(CheckResult& out, const TwoConstantFit& fit, const std::string& key) {
  out.details[key] = {{"C1", fit.C1}, {"C2", fit.C2}, {"tightest", fit.tightest}};
  PlotTable table{key + "_pareto", {"C1", "C2"}, {}};
  for (const auto& [a, b] : fit.pareto) table.rows.push_back({a, b});
  out.tables.push_back(std::move(table));
}

/// Tight constant for Ent(f^2) <= C int |grad f|^2, with near-constant candidates.
inline TightFit fit_tight_logsob(const CheckContext& ctx, const Tabulation& t, GradientKind gradient, const std::string& name) {
  auto suite = suite_for(ctx, t);
  try {
    const RayleighResult ray = estimate_best_constant_rayleigh(t, gradient);
    for (auto& c : poincare_limit_candidates(t, ray.coeffs)) suite.push_back(std::move(c));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::degenerate_basis) throw;
  }
  const InequalityFamily fam = tight_family(name, t, gradient, EntropyVariant::ent, 1.0);
  return fit_tight_constant(fam, suite, ctx.integer("climb", 150), ctx.stream(303));
}

inline Polynomial random_polynomial(int dim, int degree, int terms, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coef(-3, 3), deg(0, degree), axis(0, dim - 1);
  Polynomial p(dim);
  for (int t = 0; t < terms; ++t) {
    Exponent e(static_cast<std::size_t>(dim), 0);
    const int d = deg(rng);
    for (int s = 0; s < d; ++s) ++e[static_cast<std::size_t>(axis(rng))];
    const int c = coef(rng);
    p.add_term(e, Rational(c == 0 ? 1 : c));
  }
  return p;
}

/// Sharp classical Sobolev constant for p = 2 in dimension n >= 3.
inline double classical_sobolev_constant(int n) {
  const double dn = static_cast<double>(n);
  return std::pow(boost::math::tgamma(dn) / boost::math::tgamma(dn / 2.0), 1.0 / dn) / std::sqrt(M_PI * dn * (dn - 2.0));
}

inline std::string need_p_at_least(double p, double lo) { return p >= lo ? "" : "needs p >= " + fmt(lo); }

// ---- individual checks ----

inline CheckResult run_keyineq(const CheckContext& ctx) {
  CheckResult out;
  const Prepared prep = prepare(ctx, confined_measure(ctx, 2.0));
  const MeasureEstimator& me = prep.me;
  const Tabulation t = tabulate(test_basis(ctx, 2.0, true), me);
  const double n = ctx.rs->homogeneous_dim();
  const Eigen::VectorXd w = radial_power(me, 2.0);
  std::vector<InequalityReport> reports;
  for (const auto& c : suite_for(ctx, t)) {
    const FieldValues fv = combine(t, c.coeffs);
    reports.push_back(make_report("keyineq", weighted(me, fv.f, w, NormKind::l2),
                                  {{"int |grad_k f|^2", 1.0, dirichlet_form(me, fv)}, {"int f^2", n, weighted_norm(me, fv.f)}},
                                  {{"C", 1.0}, {"D", n}}, describe_candidate(t, c)));
  }
  add_instance(out, std::move(reports));
  out.details["test_functions"] = out.reports.size();
  return out;
}

inline CheckResult run_ubound_intermediate(const CheckContext& ctx) {
  CheckResult out;
  const double n = ctx.rs->homogeneous_dim();
  for (double p : ctx.list("p_values", {ctx.p})) {
    const Prepared prep = prepare(ctx, confined_measure(ctx, p));
    const MeasureEstimator& me = prep.me;
    const Tabulation t = tabulate(test_basis(ctx, p, true), me);
    const Eigen::VectorXd wl = radial_power(me, 2.0 * (p - 1.0)), wr = radial_power(me, p - 2.0);
    const double c1 = 4.0 / (p * p), d1 = 2.0 * (p * p + p * (n - 2.0)) / (p * p);
    std::vector<InequalityReport> reports;
    for (const auto& c : suite_for(ctx, t)) {
      const FieldValues fv = combine(t, c.coeffs);
      reports.push_back(make_report("ubound-intermediate p=" + fmt(p), weighted(me, fv.f, wl, NormKind::l2),
                                    {{"int |grad_k f|^2", c1, dirichlet_form(me, fv)},
                                     {"int f^2 |x|^(p-2)", d1, weighted(me, fv.f, wr, NormKind::l2)}},
                                    {{"C", c1}, {"D", d1}, {"p", p}}, describe_candidate(t, c)));
    }
    add_instance(out, std::move(reports));
  }
  return out;
}

inline CheckResult run_ubound_l1(const CheckContext& ctx) {
  CheckResult out;
  const double p = ctx.p, n = ctx.rs->homogeneous_dim();
  const Prepared prep = prepare(ctx, confined_measure(ctx, p));
  const MeasureEstimator& me = prep.me;
  const Tabulation t = tabulate(test_basis(ctx, p, true), me, {true, true, true});
  const Eigen::VectorXd wl = radial_power(me, p - 1.0);
  const RadialFactor cut = RadialFactor::outside_ball();
  std::vector<InequalityReport> reports;
  for (const auto& c : suite_for(ctx, t)) {
    const FieldValues fv = compose(
        t, c.coeffs, [](double q) { return q * q; }, [](double q) { return 2.0 * q; }, cut);
    const std::string name = "(" + describe_candidate(t, c) + ")^2 * " + cut.name();
    if (!(fv.f.cwiseAbs().maxCoeff() > 0.0)) continue;
    reports.push_back(make_report("ubound-l1", weighted(me, fv.f, wl, NormKind::l1),
                                  {{"int |grad_k f|", 1.0 / p, dirichlet_form(me, fv, NormKind::l1)},
                                   {"int |f|", (n - 1.0) / p, weighted_norm(me, fv.f, NormKind::l1)}},
                                  {{"C", 1.0 / p}, {"D", (n - 1.0) / p}, {"p", p}}, name));
  }
  add_instance(out, std::move(reports));
  out.details["note"] = "nonnegative test functions q^2 (|x|^2 - 1)_+^3 vanishing on the unit ball";
  return out;
}

/// Two-constant fit of lhs <= C1 T1 + C2 T2, validated on held-out combinations.
inline void two_constant_check(CheckResult& out, const CheckContext& ctx, const Tabulation& t, const InequalityFamily& fam,
                               const std::string& key) {
  const TwoConstantFit fit = fit_two_constants(fam, suite_for(ctx, t), ctx.integer("climb", 120), ctx.stream(303));
  record_two(out, fit, key);
  std::vector<InequalityReport> reports{fit.report};
  for (auto& r : holdout(fam, t, ctx.integer("holdout", 200), ctx.stream(202), {fit.C1, fit.C2})) reports.push_back(std::move(r));
  add_instance(out, std::move(reports));
}

inline InequalityFamily weighted_two_family(const std::string& name, const Tabulation& t, Eigen::VectorXd w) {
  return linear_family(name, t, {"int |grad_k f|^2", "int f^2"}, [&t, w = std::move(w)](const FieldValues& fv) {
    return FamilyTerms{weighted(*t.me, fv.f, w, NormKind::l2), {dirichlet_form(*t.me, fv), weighted_norm(*t.me, fv.f)}};
  });
}

inline CheckResult run_ubound_2p(const CheckContext& ctx, bool corollary) {
  CheckResult out;
  const double p = ctx.p;
  const Prepared prep = prepare(ctx, confined_measure(ctx, p));
  const Tabulation t = tabulate(test_basis(ctx, p, true), prep.me);
  const double a = corollary ? p : 2.0 * (p - 1.0);
  const InequalityFamily fam = weighted_two_family(corollary ? "ubound-2p-cor" : "ubound-2p", t, radial_power(prep.me, a));
  two_constant_check(out, ctx, t, fam, "fit");
  return out;
}

inline CheckResult run_entropy_two(const CheckContext& ctx, const std::string& name, EntropyVariant variant, double s,
                                   NormKind norm) {
  CheckResult out;
  const double p = ctx.p;
  const Prepared prep = prepare(ctx, confined_measure(ctx, p));
  const Tabulation t = tabulate(test_basis(ctx, p, true), prep.me);
  const bool l1 = norm == NormKind::l1;
  const InequalityFamily fam = linear_family(
      name, t, {l1 ? "int |grad_k f|" : "int |grad_k f|^2", l1 ? "int |f|" : "int f^2"},
      [&t, variant, s, norm](const FieldValues& fv) {
        return FamilyTerms{entropy(*t.me, fv.f, variant, s), {dirichlet_form(*t.me, fv, norm), weighted_norm(*t.me, fv.f, norm)}};
      });
  out.details["s"] = s;
  two_constant_check(out, ctx, t, fam, "fit");
  return out;
}

inline CheckResult run_logsob_mu_k(const CheckContext& ctx) {
  CheckResult out;
  const double R = ctx.number("radius", 2.0);
  MeasureSpec ms = ball_measure(ctx.rs, R);
  ms.normalized = false;
  const Prepared prep = prepare(ctx, ms);
  const Tabulation t = tabulate(test_basis(ctx, 2.0, false, RadialFactor::bump(R)), prep.me);
  const double n = ctx.rs->homogeneous_dim();
  const InequalityFamily fam = linear_family("logsob-mu-k", t, {"int |grad_k f|^2", "int f^2"}, [&t](const FieldValues& fv) {
    return FamilyTerms{entropy(*t.me, fv.f, EntropyVariant::ent), {dirichlet_form(*t.me, fv), weighted_norm(*t.me, fv.f)}};
  });
  const CFit fit = fit_c(fam, suite_for(ctx, t), n, ctx.integer("climb", 120), ctx.stream(303));
  out.details["c"] = fit.c;
  out.details["eps_star"] = fit.eps_star;
  out.details["tightest"] = fit.tightest;
  out.details["radius"] = R;
  auto report_at = [&](const FamilyTerms& terms, double eps, const std::string& name) {
    const double C = c_of_epsilon(eps, fit.c, n);
    return make_report("logsob-mu-k", terms.lhs, {{"int |grad_k f|^2", eps, terms.rhs[0]}, {"int f^2", C, terms.rhs[1]}},
                       {{"epsilon", eps}, {"c", fit.c}, {"C_of_epsilon", C}}, name);
  };
  std::vector<InequalityReport> reports;
  const FamilyTerms best = fam.eval(fam.field(fit.coeffs));
  reports.push_back(report_at(best, fit.eps_star, fit.tightest));
  int k = 0;
  for (const auto& c : random_unit_combinations(t, ctx.integer("holdout", 200), ctx.stream(202))) {
    FamilyTerms terms;
    try {
      terms = fam.eval(fam.field(c));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::degenerate_function) throw;
      continue;
    }
    if (!(terms.rhs[0].value > 0.0)) continue;
    const double eps = n * terms.rhs[1].value / (2.0 * terms.rhs[0].value);
    reports.push_back(report_at(terms, eps, "holdout#" + std::to_string(k++)));
  }
  add_instance(out, std::move(reports));
  return out;
}

inline CheckResult run_lp_logsob(const CheckContext& ctx) {
  CheckResult out;
  const double R = ctx.number("radius", 2.0), q = ctx.number("exponent", 4.0), eps = ctx.number("epsilon", 0.5);
  MeasureSpec ms = ball_measure(ctx.rs, R);
  ms.normalized = false;
  const Prepared prep = prepare(ctx, ms);
  const double n = ctx.rs->homogeneous_dim();
  const Tabulation tc = tabulate(test_basis(ctx, 2.0, false, RadialFactor::bump(R)), prep.me);
  const InequalityFamily fam = linear_family("logsob-mu-k", tc, {"int |grad_k f|^2", "int f^2"}, [&tc](const FieldValues& fv) {
    return FamilyTerms{entropy(*tc.me, fv.f, EntropyVariant::ent), {dirichlet_form(*tc.me, fv), weighted_norm(*tc.me, fv.f)}};
  });
  const CFit fit = fit_c(fam, suite_for(ctx, tc), n, ctx.integer("climb", 120), ctx.stream(303));
  out.details["c"] = fit.c;
  // Nonnegative suite: squares of low-degree Hermite products, and (1 + x_1^2), times the bump.
  const int dim = ctx.rs->dim();
  FunctionBasis sq;
  const FunctionBasis low = hermite_basis(dim, std::min(2, ctx.integer("basis_degree", 2)));
  for (const auto& m : low.members) sq.add(BasisMember::polynomial(*m.poly * *m.poly, RadialFactor::bump(R), "(" + m.name + ")^2"));
  sq.add(BasisMember::polynomial(Polynomial::constant(dim, 1) + Polynomial::variable(dim, 0) * Polynomial::variable(dim, 0),
                                 RadialFactor::bump(R), "1 + x_1^2"));
  const Tabulation t = tabulate(sq, prep.me, {true, true, true});
  std::vector<Candidate> cands;
  for (Eigen::Index j = 0; j < t.members(); ++j) cands.push_back({t.names[static_cast<std::size_t>(j)], unit_vector(t.members(), j)});
  std::mt19937_64 rng(ctx.stream(404));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < ctx.integer("random", 200) / 4; ++k) {
    Eigen::VectorXd c(t.members());
    for (Eigen::Index j = 0; j < c.size(); ++j) c(j) = u(rng);
    cands.push_back({"nonnegative#" + std::to_string(k), c});
  }
  std::vector<InequalityReport> reports;
  for (const auto& c : cands) {
    InequalityReport r = lp_logsob_check(t, c.coeffs, q, eps, fit.c, describe_candidate(t, c));
    reports.push_back(std::move(r));
  }
  add_instance(out, std::move(reports));
  return out;
}

inline CheckResult run_poincare_mu_u(const CheckContext& ctx, GradientKind gradient, const std::string& name) {
  CheckResult out;
  const Prepared prep = prepare(ctx, confined_measure(ctx, ctx.p));
  const MeasureEstimator& me = prep.me;
  const bool classical = gradient == GradientKind::classical;
  const Tabulation t = tabulate(test_basis(ctx, ctx.p, true), me, {!classical, classical, false});
  const RayleighResult ray = estimate_best_constant_rayleigh(t, gradient);
  out.details["lambda_max"] = ray.lambda_max;
  out.details["rank"] = ray.rank;
  out.details["gram_condition"] = condition_number(gram(t));
  // An ill-conditioned Gram matrix can leave the eigenvalue slightly below a
  // directly evaluated quotient; C is the larger of the two.
  double C = ray.lambda_max;
  std::string extremal = "rayleigh extremal: " + describe(t, ray.coeffs);
  Eigen::VectorXd best = ray.coeffs;
  const auto suite = suite_for(ctx, t);
  for (const auto& c : suite) {
    const FieldValues fv = combine(t, c.coeffs);
    const double e = dirichlet_form(me, fv, NormKind::l2, gradient).value;
    if (!(e > kNullForm)) continue;
    const double q = variance(me, fv.f).value / e;
    if (q > C) {
      C = q;
      best = c.coeffs;
      extremal = describe_candidate(t, c);
    }
  }
  out.details["C"] = C;
  auto report = [&](const Eigen::VectorXd& c, const std::string& label) {
    const FieldValues fv = combine(t, c);
    return make_report(name, variance(me, fv.f), {{"int |grad f|^2", C, dirichlet_form(me, fv, NormKind::l2, gradient)}},
                       {{"C", C}}, label);
  };
  std::vector<InequalityReport> reports{report(best, extremal)};
  for (const auto& c : suite) {
    const FieldValues fv = combine(t, c.coeffs);
    if (dirichlet_form(me, fv, NormKind::l2, gradient).value > kNullForm) reports.push_back(report(c.coeffs, describe_candidate(t, c)));
  }
  add_instance(out, std::move(reports));
  return out;
}

inline CheckResult run_poincare_ball(const CheckContext& ctx) {
  CheckResult out;
  PlotTable table{"poincare_ball", {"R", "lambda_max", "lambda_over_R2"}, {}};
  std::vector<std::pair<double, RayleighResult>> fits;
  for (double R : ctx.list("radii", {1.0, 2.0, 4.0})) {
    const Prepared prep = prepare(ctx, ball_measure(ctx.rs, R));
    const Tabulation t = tabulate(test_basis(ctx, 2.0, false), prep.me);
    const RayleighResult ray = estimate_best_constant_rayleigh(t);
    table.rows.push_back({R, ray.lambda_max, ray.lambda_max / (R * R)});
    fits.emplace_back(R, ray);
  }
  double C = 0.0, lo = std::numeric_limits<double>::infinity();
  for (const auto& row : table.rows) {
    C = std::max(C, row[2]);
    lo = std::min(lo, row[2]);
  }
  out.details["C"] = C;
  out.details["spread"] = C / lo;
  for (const auto& [R, ray] : fits) {
    const Prepared prep = prepare(ctx, ball_measure(ctx.rs, R));
    const Tabulation t = tabulate(test_basis(ctx, 2.0, false), prep.me);
    const FieldValues fv = combine(t, ray.coeffs);
    add_instance(out, {make_report("poincare-ball R=" + fmt(R), variance(prep.me, fv.f),
                                   {{"R^2 int_B |grad_k f|^2", C * R * R, dirichlet_form(prep.me, fv)}}, {{"C", C}, {"r", R}},
                                   "rayleigh extremal: " + describe(t, ray.coeffs))});
  }
  out.tables.push_back(std::move(table));
  return out;
}

inline CheckResult run_tight(const CheckContext& ctx, GradientKind gradient, const std::string& name) {
  CheckResult out;
  const Prepared prep = prepare(ctx, confined_measure(ctx, ctx.p));
  const bool classical = gradient == GradientKind::classical;
  const Tabulation t = tabulate(test_basis(ctx, ctx.p, true), prep.me, {!classical, classical, false});
  const TightFit fit = fit_tight_logsob(ctx, t, gradient, name);
  record_tight(out, fit, "fit");
  const RayleighResult ray = estimate_best_constant_rayleigh(t, gradient);
  out.details["poincare_lambda_max"] = ray.lambda_max;
  std::vector<InequalityReport> reports{fit.report};
  const InequalityFamily fam = tight_family(name, t, gradient, EntropyVariant::ent, 1.0);
  for (auto& r : holdout(fam, t, ctx.integer("holdout", 500), ctx.stream(202), {fit.C})) reports.push_back(std::move(r));
  add_instance(out, std::move(reports));
  return out;
}

inline CheckResult run_phi(const CheckContext& ctx, GradientKind gradient, const std::string& name) {
  CheckResult out;
  const double p = ctx.p, s = 2.0 * (p - 1.0) / p;
  const Prepared prep = prepare(ctx, confined_measure(ctx, p));
  const bool classical = gradient == GradientKind::classical;
  const Tabulation t = tabulate(test_basis(ctx, p, true), prep.me, {!classical, classical, false});
  const InequalityFamily fam = linear_family(name, t, {"int |grad f|^2", "int f^2"}, [&t, s, gradient](const FieldValues& fv) {
    return FamilyTerms{entropy(*t.me, fv.f, EntropyVariant::phi, s),
                       {dirichlet_form(*t.me, fv, NormKind::l2, gradient), weighted_norm(*t.me, fv.f)}};
  });
  out.details["s"] = s;
  two_constant_check(out, ctx, t, fam, "fit");
  return out;
}

inline CheckResult run_rothaus(const CheckContext& ctx) {
  CheckResult out;
  const Prepared prep = prepare(ctx, confined_measure(ctx, ctx.p));
  const Tabulation t = tabulate(test_basis(ctx, ctx.p, true), prep.me, {false, false, false});
  std::vector<double> cs = ctx.list("c_values", {});
  if (cs.empty()) {
    for (int i = -10; i <= 10; ++i) cs.push_back(0.5 * i);
    cs.push_back(1e3);
  }
  std::vector<InequalityReport> reports;
  for (const auto& c : test_suite(t, ctx.integer("random", 20), ctx.stream(101))) {
    const Eigen::VectorXd f = t.V * c.coeffs;
    if (f.maxCoeff() - f.minCoeff() <= 1e-12 * std::max(1.0, f.cwiseAbs().maxCoeff())) continue;
    for (const auto& row : rothaus_defect(prep.me, f, cs)) {
      reports.push_back(make_report("rothaus", row.shifted, {{"Ent(f^2)", 1.0, row.ent}, {"int f^2", 2.0, row.mass}},
                                    {{"c", row.c}}, describe_candidate(t, c) + " (recentred), c=" + fmt(row.c)));
    }
  }
  add_instance(out, std::move(reports));
  return out;
}

inline CheckResult run_exp_integrability(const CheckContext& ctx) {
  CheckResult out;
  const double p = ctx.p, b = ctx.number("b", 0.5);
  double C = ctx.number("C", 0.0);
  if (p >= 2.0 && !(C > 0.0)) {
    const Prepared prep = prepare(ctx, mu_u_measure(ctx.rs, p));
    const Tabulation t = tabulate(test_basis(ctx, p, true), prep.me);
    C = fit_tight_logsob(ctx, t, GradientKind::dunkl, "tight-logsob").C;
  }
  const int m = ctx.estimator.resolution > 0 ? ctx.estimator.resolution : default_resolution(*ctx.rs);
  const IntegrabilityScan scan =
      exp_integrability_scan(mu_u_measure(ctx.rs, p), norm_field(), b, ctx.list("radii", {1, 2, 4, 8, 16, 32, 64, 128}), C, m);
  PlotTable table{"exp_integrability", {"R", "truncated_integral", "err", "difference"}, {}};
  for (const auto& r : scan.rows) table.rows.push_back({r.R, r.integral.value, r.integral.err, r.difference});
  out.tables.push_back(std::move(table));
  out.details["b"] = b;
  out.details["C"] = C;
  out.details["threshold"] = scan.threshold;
  out.details["verdict"] = scan.verdict;
  const double n = ctx.rs->homogeneous_dim();
  const double oracle = radial_exp_expectation_1d(n, p, [b](double r) { return 0.5 * b * b * r * r; });
  out.details["radial_oracle"] = std::isfinite(oracle) ? nlohmann::json(oracle) : nlohmann::json("divergent");
  {
    const auto& r = scan.rows;
    const std::size_t k = r.size();
    InequalityReport conv = make_report("exp-integrability convergence", {std::abs(r[k - 1].difference), 0.0},
                                        {{"half the previous difference", 0.5, {std::abs(r[k - 2].difference), 0.0}},
                                         {"negligible", 1e-12, {std::abs(r[k - 1].integral.value), 0.0}}},
                                        {{"b", b}, {"C", C}}, "|x|");
    conv.note = scan.verdict;
    if (!scan.converged) {
      out.findings.push_back("truncated integrals diverge at p=" + fmt(p) + ", b=" + fmt(b));
      // Below p = 2 no integrability is claimed, so divergence is a finding only.
      if (p < 2.0) conv.violated = false;
    }
    add_instance(out, {std::move(conv)});
  }
  if (scan.converged && std::isfinite(oracle)) {
    const auto& last = scan.rows.back().integral;
    InequalityReport r = make_report("exp-integrability limit vs radial quadrature", {std::abs(last.value - oracle), 0.0},
                                     {{"relative tolerance", 1e-4 * oracle, {1.0, 0.0}}, {"grid err", 1.0, {last.err, 0.0}}},
                                     {{"b", b}}, "|x|");
    add_instance(out, {std::move(r)});
  }
  std::vector<InequalityReport> mgf;
  for (const auto& row : scan.mgf) {
    mgf.push_back(make_report("mgf bound s=" + fmt(row.s), row.mgf, {{"exp(s int f + aC s^2/4)", 1.0, {row.bound, 0.0}}},
                              {{"a", 1.0}, {"C", C}, {"s", row.s}}, "|x|"));
  }
  add_instance(out, std::move(mgf));
  return out;
}

inline CheckResult run_concentration(const CheckContext& ctx) {
  CheckResult out;
  const double p = ctx.p;
  double C = ctx.number("C", 0.0);
  if (!(C > 0.0)) {
    CheckContext quad = ctx;
    quad.estimator.kind = EstimatorSettings::Kind::quadrature;
    const Prepared prep = prepare(quad, mu_u_measure(ctx.rs, p));
    const Tabulation t = tabulate(test_basis(ctx, p, true), prep.me);
    C = fit_tight_logsob(ctx, t, GradientKind::dunkl, "tight-logsob").C;
  }
  const MeasureSpec ms = mu_u_measure(ctx.rs, p);
  out.chains = sample_chains(ms, ctx.estimator.n, ctx.estimator.chains, ctx.estimator.algo, ctx.stream(1), ctx.jobs);
  const ConcentrationProfile prof = concentration_profile(*ctx.rs, out.chains, norm_field(), C, ctx.list("r_grid", {0.5, 1.0, 1.5, 2.0}));
  PlotTable table{"concentration", {"r", "tail", "bound", "ci_low", "ci_high"}, {}};
  std::vector<InequalityReport> reports;
  for (const auto& row : prof.rows) {
    table.rows.push_back({row.r, row.tail, row.bound, row.ci_low, row.ci_high});
    // The report compares the lower confidence limit with the bound.
    InequalityReport r = make_report("concentration r=" + fmt(row.r), {row.ci_low, 0.0}, {{"exp(-r^2/(aC))", 1.0, {row.bound, 0.0}}},
                                     {{"a", prof.a}, {"C", C}, {"r", row.r}}, "|x|");
    r.note = "tail " + fmt(row.tail) + ", CI [" + fmt(row.ci_low) + ", " + fmt(row.ci_high) + "]";
    reports.push_back(std::move(r));
  }
  out.tables.push_back(std::move(table));
  out.details["C"] = C;
  out.details["mean"] = prof.mean;
  out.details["n_eff"] = prof.n_eff;
  add_instance(out, std::move(reports));
  return out;
}

inline CheckResult run_chamber_invariance(const CheckContext& ctx) {
  CheckResult out;
  MeasureSpec full = mu_k_measure(ctx.rs), part = mu_k_measure(ctx.rs);
  part.chamber = fundamental_chamber(*ctx.rs);
  const Prepared pf = prepare(ctx, full), pc = prepare(ctx, part);
  std::vector<ScalarField> gs;
  ScalarField g1;
  g1.name = "|x|^2 exp(-|x|^2)";
  g1.value = [](const Vector& x) { return x.squaredNorm() * std::exp(-x.squaredNorm()); };
  g1.g_invariant = true;
  gs.push_back(g1);
  std::mt19937_64 rng(ctx.stream(404));
  for (int k = 0; k < ctx.integer("random", 3); ++k) {
    const Polynomial q = symmetrize(*ctx.rs, random_polynomial(ctx.rs->dim(), 4, 6, rng));
    if (q.is_zero()) continue;
    const auto cq = std::make_shared<CompiledPolynomial>(q);
    ScalarField g;
    g.name = "sym(" + q.to_string() + ") exp(-|x|^2)";
    g.value = [cq](const Vector& x) { return (*cq)(x)*std::exp(-x.squaredNorm()); };
    g.g_invariant = true;
    gs.push_back(std::move(g));
  }
  std::vector<InequalityReport> reports;
  for (const auto& g : gs) reports.push_back(chamber_invariance_check(*ctx.rs, g, pf.me, pc.me));
  add_instance(out, std::move(reports));
  return out;
}

inline CheckResult run_sobolev_ratio(const CheckContext& ctx) {
  CheckResult out;
  const double p = ctx.number("sobolev_p", 2.0);
  const Prepared prep = prepare(ctx, mu_k_measure(ctx.rs));
  const FunctionBasis basis = test_basis(ctx, 2.0, false, RadialFactor::gaussian(0.5));
  const Tabulation t = tabulate(basis, prep.me);
  const SobolevRatio sr = sobolev_ratio(t, p, ctx.integer("random", 200), ctx.integer("climb", 300), ctx.stream(303));
  out.details["lower_bound"] = sr.lower_bound;
  out.details["q"] = sr.q;
  out.details["extremal"] = sr.extremal;
  std::vector<InequalityReport> reports;
  for (double s : {0.5, 2.0}) {
    // f(s x) with s < 1 reaches out to |x| = L / s, so the grid radius grows accordingly.
    MeasureSpec ms = mu_k_measure(ctx.rs);
    ms.truncation = (ctx.estimator.L ? *ctx.estimator.L : truncation_radius(ms)) / std::min(s, 1.0);
    const MeasureEstimator me = MeasureEstimator::from_grid(build_grid(ms, grid_resolution(ctx)));
    const Tabulation tb = tabulate(basis, me);
    const Tabulation ts = tabulate(basis, me.with_points(Matrix(s * me.points())));
    const FieldValues base = combine(tb, sr.coeffs);
    FieldValues fv = combine(ts, sr.coeffs);
    fv.dgrad *= s;
    // Each quotient is also evaluated on the companion set; the spread is its error bar.
    Estimate scaled_q{sobolev_quotient(me, fv, p, sr.q), 0.0}, base_q{sobolev_quotient(me, base, p, sr.q), 0.0};
    for (std::size_t set = 1; set < me.set_count(); ++set) {
      scaled_q.err = std::max(scaled_q.err, std::abs(sobolev_quotient(me, fv, p, sr.q, set) - scaled_q.value));
      base_q.err = std::max(base_q.err, std::abs(sobolev_quotient(me, base, p, sr.q, set) - base_q.value));
    }
    InequalityReport r = make_report("sobolev-ratio rescaling t=" + fmt(s), {std::abs(scaled_q.value - base_q.value), scaled_q.err},
                                     {{"quotient error", 1.0, {0.0, base_q.err}}}, {{"s", s}}, sr.extremal);
    reports.push_back(std::move(r));
  }
  const double n = ctx.rs->homogeneous_dim();
  if (ctx.rs->trivial_multiplicity() && p == 2.0 && n >= 3.0) {
    const double ceiling = classical_sobolev_constant(ctx.rs->dim());
    out.details["classical_constant"] = ceiling;
    reports.push_back(make_report("sobolev-ratio classical ceiling", {sr.lower_bound, 0.0},
                                  {{"classical sharp constant", 1.0, {ceiling, 0.0}}}, {{"C", ceiling}}, sr.extremal));
  }
  add_instance(out, std::move(reports));
  return out;
}

inline CheckResult run_identities(const CheckContext& ctx) {
  CheckResult out;
  const RootSystem& rs = *ctx.rs;
  const int dim = rs.dim();
  std::mt19937_64 rng(ctx.stream(404));
  const int pairs = ctx.integer("pairs", 50), degree = ctx.integer("degree", 5);
  int leibniz_fail = 0, laplace_fail = 0;
  for (int k = 0; k < pairs; ++k) {
    const Polynomial f = random_polynomial(dim, degree, 6, rng), g = random_polynomial(dim, degree, 6, rng);
    for (int i = 0; i < dim; ++i) {
      if (!(apply_T_poly(rs, i, f * g) == leibniz_rhs_poly(rs, i, f, g))) ++leibniz_fail;
    }
    for (const Polynomial* h : {&f, &g}) {
      if (!(dunkl_laplacian_poly(rs, *h, LaplacianMethod::sum_of_squares) == dunkl_laplacian_poly(rs, *h, LaplacianMethod::formula))) {
        ++laplace_fail;
      }
    }
  }
  auto exact = [&](const std::string& name, int failures, const std::string& what) {
    return make_report(name, {static_cast<double>(failures), 0.0}, {{"allowed failures", 1.0, {0.0, 0.0}}}, {}, what);
  };
  add_instance(out, {exact("leibniz", leibniz_fail, std::to_string(pairs) + " random pairs, degree <= " + std::to_string(degree))});
  add_instance(out, {exact("laplacian two-way", laplace_fail, std::to_string(2 * pairs) + " random polynomials")});

  const double n = rs.homogeneous_dim();
  std::normal_distribution<double> normal;
  double worst_rel = 0.0;
  int tested = 0;
  while (tested < ctx.integer("points", 100)) {
    Vector x(dim);
    for (int i = 0; i < dim; ++i) x(i) = normal(rng);
    if (!off_all_walls(rs, x)) continue;
    const double v = dunkl_laplacian(rs, norm_field(), x), want = (n - 1.0) / x.norm();
    worst_rel = std::max(worst_rel, std::abs(v - want) / std::abs(want));
    ++tested;
  }
  add_instance(out, {make_report("laplacian of |x|", {worst_rel, 0.0}, {{"relative tolerance", 1.0, {1e-8, 0.0}}}, {},
                                 "max relative error over " + std::to_string(tested) + " off-wall points")});

  if (dim <= 3) {
    const int m = ctx.integer("ibp_resolution", dim >= 3 ? 20 : 24);
    const QuadratureGrid grid = build_grid(mu_k_measure(ctx.rs), m);
    double worst_ibp = 0.0;
    const int ibp_pairs = ctx.integer("ibp_pairs", 20);
    for (int k = 0; k < ibp_pairs; ++k) {
      const Polynomial f = random_polynomial(dim, 3, 4, rng), g = random_polynomial(dim, 3, 4, rng);
      const IbpResult r = ibp_residual(rs, k % dim, f, g, grid);
      worst_ibp = std::max(worst_ibp, r.residual / std::max(1.0, r.scale));
    }
    add_instance(out, {make_report("integration by parts", {worst_ibp, 0.0}, {{"tolerance", 1.0, {1e-6, 0.0}}}, {},
                                   std::to_string(ibp_pairs) + " polynomial pairs times exp(-|x|^2), residual / max(1, scale)")});
  }
  return out;
}

inline CheckResult run_synthetic(const CheckContext& ctx) {
  CheckResult out;
  const Prepared prep = prepare(ctx, confined_measure(ctx, ctx.p));
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(prep.me.point_count());
  const Estimate m = weighted_norm(prep.me, one);
  add_instance(out, {make_report("synthetic-violation", m, {{"int f^2", 0.5, m}}, {{"C", 0.5}}, "f = 1")});
  out.findings.push_back("deliberately false inequality int f^2 <= (1/2) int f^2");
  return out;
}

inline std::string p_range(double p, double lo, double hi, bool lo_open, bool hi_open) {
  const bool ok = (lo_open ? p > lo : p >= lo) && (hi_open ? p < hi : p <= hi);
  if (ok) return "";
  return "needs p in " + std::string(lo_open ? "(" : "[") + fmt(lo) + ", " + (std::isinf(hi) ? "inf" : fmt(hi)) + (hi_open ? ")" : "]");
}

}  // namespace detail

inline const std::vector<CheckInfo>& catalog() {
  using detail::p_range;
  using O = OptionType;
  static const double inf = std::numeric_limits<double>::infinity();
  static const std::map<std::string, OptionType> basis_opts{{"basis_degree", O::integer}, {"random", O::integer}};
  auto with = [](std::map<std::string, OptionType> extra) {
    extra.insert(basis_opts.begin(), basis_opts.end());
    return extra;
  };
  auto any_p = [](const RootSystem&, double, const nlohmann::json&) { return std::string(); };
  static const std::vector<CheckInfo> checks = {
      {"identities", "Dunkl product rule, two-way Dunkl Laplacian, Laplacian of |x|, integration by parts against mu_k",
       EstimatorNeed::exact, ChamberNeed::full, false,
       {{"pairs", O::integer}, {"degree", O::integer}, {"points", O::integer}, {"ibp_pairs", O::integer}, {"ibp_resolution", O::integer}},
       any_p, detail::run_identities},
      {"keyineq", "key inequality of the Gaussian log-Sobolev proof: int f^2 |x|^2 <= int |grad_k f|^2 + (N+2gamma) int f^2",
       EstimatorNeed::either, ChamberNeed::full, false, basis_opts,
       [](const RootSystem&, double p, const nlohmann::json&) { return p == 2.0 ? std::string() : std::string("needs p = 2"); },
       detail::run_keyineq},
      {"ubound-intermediate", "intermediate U-bound with coefficients 4/p^2 and 2[p^2+p(N+2gamma-2)]/p^2",
       EstimatorNeed::either, ChamberNeed::full, false, with({{"p_values", O::number_list}}),
       [](const RootSystem&, double p, const nlohmann::json& o) {
         if (o.contains("p_values")) {
           for (double v : o.at("p_values").get<std::vector<double>>()) {
             if (!(v > 1.0)) return std::string("p_values entries must exceed 1");
           }
           return std::string();
         }
         return p_range(p, 1.0, inf, true, true);
       },
       detail::run_ubound_intermediate},
      {"ubound-l1", "L1 U-bound with C1 = 1/p, D1 = (N+2gamma-1)/p for functions vanishing on the unit ball",
       EstimatorNeed::either, ChamberNeed::full, false, basis_opts,
       [](const RootSystem&, double p, const nlohmann::json&) { return p_range(p, 1.0, inf, true, true); }, detail::run_ubound_l1},
      {"ubound-2p", "L2 U-bound int f^2 |x|^{2(p-1)} <= C int |grad_k f|^2 + D int f^2 (constants fitted)",
       EstimatorNeed::either, ChamberNeed::full, true, with({{"climb", O::integer}, {"holdout", O::integer}}),
       [](const RootSystem&, double p, const nlohmann::json&) { return p_range(p, 1.0, inf, true, true); },
       [](const CheckContext& c) { return detail::run_ubound_2p(c, false); }},
      {"ubound-2p-cor", "U-bound int f^2 |x|^p <= C int |grad_k f|^2 + D int f^2 for p >= 2 (constants fitted)",
       EstimatorNeed::either, ChamberNeed::full, true, with({{"climb", O::integer}, {"holdout", O::integer}}),
       [](const RootSystem&, double p, const nlohmann::json&) { return detail::need_p_at_least(p, 2.0); },
       [](const CheckContext& c) { return detail::run_ubound_2p(c, true); }},
      {"logsob-mu-k", "defective log-Sobolev inequality for mu_k with C(eps) = (N+2gamma)/2 (log(1/eps) - c), c fitted",
       EstimatorNeed::quadrature, ChamberNeed::full, true, with({{"radius", O::number}, {"climb", O::integer}, {"holdout", O::integer}}),
       any_p, detail::run_logsob_mu_k},
      {"lp-logsob", "L^p entropy bound Ent(f^p) <= eps int grad_k f . grad_k f^{p-1} + C(2eps/p) int f^p on mu_k",
       EstimatorNeed::quadrature, ChamberNeed::full, false,
       with({{"radius", O::number}, {"exponent", O::number}, {"epsilon", O::number}, {"climb", O::integer}}),
       [](const RootSystem&, double, const nlohmann::json& o) {
         if (o.contains("exponent") && !(o.at("exponent").get<double>() > 2.0)) return std::string("exponent must exceed 2");
         if (o.contains("epsilon") && !(o.at("epsilon").get<double>() > 0.0)) return std::string("epsilon must be positive");
         return std::string();
       },
       detail::run_lp_logsob},
      {"logsob-gaussian", "Gaussian-weight log-Sobolev inequality Ent(f^2) <= C1 int |grad_k f|^2 + C2 int f^2",
       EstimatorNeed::either, ChamberNeed::full, true, with({{"climb", O::integer}, {"holdout", O::integer}}),
       [](const RootSystem&, double p, const nlohmann::json&) { return p == 2.0 ? std::string() : std::string("needs p = 2"); },
       [](const CheckContext& c) { return detail::run_entropy_two(c, "logsob-gaussian", EntropyVariant::ent, 1.0, NormKind::l2); }},
      {"logsob-boltzmann", "log-Sobolev inequality for mu_U, p >= 2: Ent(f^2) <= C1 int |grad_k f|^2 + C2 int f^2",
       EstimatorNeed::either, ChamberNeed::full, true, with({{"climb", O::integer}, {"holdout", O::integer}}),
       [](const RootSystem&, double p, const nlohmann::json&) { return detail::need_p_at_least(p, 2.0); },
       [](const CheckContext& c) { return detail::run_entropy_two(c, "logsob-boltzmann", EntropyVariant::ent, 1.0, NormKind::l2); }},
      {"logsob-abs-pow", "modified log-Sobolev inequality for 1 < p <= 2 with |log|^s, s = 2(p-1)/p",
       EstimatorNeed::either, ChamberNeed::full, true, with({{"climb", O::integer}, {"holdout", O::integer}}),
       [](const RootSystem&, double p, const nlohmann::json&) { return p_range(p, 1.0, 2.0, true, false); },
       [](const CheckContext& c) {
         return detail::run_entropy_two(c, "logsob-abs-pow", EntropyVariant::abs_log_pow, 2.0 * (c.p - 1.0) / c.p, NormKind::l2);
       }},
      {"logsob-l1", "L1 log-Sobolev inequality with |log|^s, s = (p-1)/p, against int |grad_k f| and int |f|",
       EstimatorNeed::either, ChamberNeed::full, true, with({{"climb", O::integer}, {"holdout", O::integer}}),
       [](const RootSystem&, double p, const nlohmann::json&) { return p_range(p, 1.0, inf, true, true); },
       [](const CheckContext& c) {
         return detail::run_entropy_two(c, "logsob-l1", EntropyVariant::l1_log_pow, (c.p - 1.0) / c.p, NormKind::l1);
       }},
      {"poincare-ball", "local Poincare inequality on balls for mu_k with constant C R^2", EstimatorNeed::quadrature,
       ChamberNeed::full, true, with({{"radii", O::number_list}}), any_p, detail::run_poincare_ball},
      {"poincare-mu-U", "Poincare inequality for mu_U: Var(f) <= C int |grad_k f|^2 (Rayleigh quotient lower bound)",
       EstimatorNeed::either, ChamberNeed::full, true, basis_opts,
       [](const RootSystem&, double p, const nlohmann::json&) { return p_range(p, 1.0, inf, true, true); },
       [](const CheckContext& c) { return detail::run_poincare_mu_u(c, GradientKind::dunkl, "poincare-mu-U"); }},
      {"tight-logsob", "tight log-Sobolev inequality for mu_U, p >= 2: Ent(f^2) <= C int |grad_k f|^2",
       EstimatorNeed::either, ChamberNeed::full, true, with({{"climb", O::integer}, {"holdout", O::integer}}),
       [](const RootSystem&, double p, const nlohmann::json&) { return detail::need_p_at_least(p, 2.0); },
       [](const CheckContext& c) { return detail::run_tight(c, GradientKind::dunkl, "tight-logsob"); }},
      {"rothaus", "Rothaus lemma: Ent((f+c)^2) <= Ent(f^2) + 2 int f^2 for centred f", EstimatorNeed::either, ChamberNeed::full,
       false, with({{"c_values", O::number_list}}),
       [](const RootSystem&, double p, const nlohmann::json&) { return p_range(p, 1.0, inf, true, true); }, detail::run_rothaus},
      {"phi-sobolev", "Phi-Sobolev inequality for 1 < p < 2, Phi(x) = x log(1+x)^s, s = 2(p-1)/p", EstimatorNeed::either,
       ChamberNeed::full, true, with({{"climb", O::integer}, {"holdout", O::integer}}),
       [](const RootSystem&, double p, const nlohmann::json&) { return p_range(p, 1.0, 2.0, true, false); },
       [](const CheckContext& c) { return detail::run_phi(c, GradientKind::dunkl, "phi-sobolev"); }},
      {"exp-integrability", "Herbst integrability int e^{b^2 f^2/2} dmu_U < inf for b < sqrt(2/(aC)), with the moment bound",
       EstimatorNeed::quadrature, ChamberNeed::full, false,
       with({{"b", O::number}, {"radii", O::number_list}, {"C", O::number}, {"climb", O::integer}}),
       [](const RootSystem&, double p, const nlohmann::json&) { return p_range(p, 1.0, inf, true, true); },
       detail::run_exp_integrability},
      {"concentration", "Gaussian concentration P(f >= int f + r) <= e^{-r^2/(aC)} for G-invariant Lipschitz f",
       EstimatorNeed::mcmc, ChamberNeed::full, false, with({{"r_grid", O::number_list}, {"C", O::number}, {"climb", O::integer}}),
       [](const RootSystem&, double p, const nlohmann::json&) { return detail::need_p_at_least(p, 2.0); },
       detail::run_concentration},
      {"poincare-chamber", "Poincare inequality for mu_{U,H} with the classical gradient", EstimatorNeed::either,
       ChamberNeed::chamber, true, basis_opts,
       [](const RootSystem&, double p, const nlohmann::json&) { return p_range(p, 1.0, inf, true, true); },
       [](const CheckContext& c) { return detail::run_poincare_mu_u(c, GradientKind::classical, "poincare-chamber"); }},
      {"tight-logsob-chamber", "tight log-Sobolev inequality for mu_{U,H}, p >= 2, classical gradient", EstimatorNeed::either,
       ChamberNeed::chamber, true, with({{"climb", O::integer}, {"holdout", O::integer}}),
       [](const RootSystem&, double p, const nlohmann::json&) { return detail::need_p_at_least(p, 2.0); },
       [](const CheckContext& c) { return detail::run_tight(c, GradientKind::classical, "tight-logsob-chamber"); }},
      {"phi-sobolev-chamber", "Phi-Sobolev inequality for mu_{U,H}, 1 < p < 2, classical gradient", EstimatorNeed::either,
       ChamberNeed::chamber, true, with({{"climb", O::integer}, {"holdout", O::integer}}),
       [](const RootSystem&, double p, const nlohmann::json&) { return p_range(p, 1.0, 2.0, true, false); },
       [](const CheckContext& c) { return detail::run_phi(c, GradientKind::classical, "phi-sobolev-chamber"); }},
      {"chamber-invariance", "chamber reduction int g dmu_k = |G| int_H g dmu_k for G-invariant g", EstimatorNeed::quadrature,
       ChamberNeed::full, false, {{"random", O::integer}}, any_p, detail::run_chamber_invariance},
      {"sobolev-ratio", "Dunkl Sobolev inequality ||f||_q <= C ||grad_k f||_p, q = p(N+2gamma)/(N+2gamma-p) (lower bound on C)",
       EstimatorNeed::quadrature, ChamberNeed::full, true, with({{"sobolev_p", O::number}, {"climb", O::integer}}),
       [](const RootSystem& rs, double, const nlohmann::json& o) {
         const double sp = o.contains("sobolev_p") ? o.at("sobolev_p").get<double>() : 2.0;
         if (!(sp >= 1.0) || !(sp < rs.homogeneous_dim())) return std::string("sobolev_p must lie in [1, N + 2 gamma)");
         return std::string();
       },
       detail::run_sobolev_ratio},
      {"synthetic-violation", "deliberately false inequality int f^2 <= (1/2) int f^2 (exit-code fixture)", EstimatorNeed::either,
       ChamberNeed::full, false, {}, [](const RootSystem&, double p, const nlohmann::json&) { return p_range(p, 1.0, inf, true, true); },
       detail::run_synthetic},
  };
  return checks;
}

inline const CheckInfo& find_check(const std::string& name) {
  for (const auto& c : catalog()) {
    if (c.name == name) return c;
  }
  fail(ErrorKind::config_error, "unknown check '" + name + "'");
}

/// Runs one check and stamps its anchor on every report.
inline CheckResult run_check(const CheckInfo& info, const CheckContext& ctx) {
  CheckResult out = info.run(ctx);
  out.check = info.name;
  out.anchor = info.anchor;
  for (auto* list : {&out.reports, &out.headline}) {
    for (auto& r : *list) r.anchor = info.anchor;
  }
  return out;
}

}  // namespace dunkl
