#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dunkl/applications.hpp"
#include "dunkl/catalog.hpp"
#include "dunkl/constants.hpp"
#include "dunkl/function_basis.hpp"
#include "dunkl/inequality.hpp"
#include "test_util.hpp"

using namespace dunkl;
using dunkl::testing::expect_error;
using dunkl::testing::var;

namespace {

struct Fixture {
  std::shared_ptr<const RootSystem> rs;
  QuadratureGrid grid;
  MeasureEstimator me;

  Fixture(RootSystem r, MeasureSpec (*make)(std::shared_ptr<const RootSystem>, double), double p, int resolution = 0)
      : rs(share(std::move(r))), grid(build_grid(make(rs, p), resolution)), me(MeasureEstimator::from_grid(grid)) {}
};

MeasureSpec mu_u(std::shared_ptr<const RootSystem> rs, double p) { return mu_u_measure(std::move(rs), p); }

FunctionBasis single(const Polynomial& q) {
  FunctionBasis b;
  b.add(BasisMember::polynomial(q));
  return b;
}

CheckContext context(RootSystem rs, double p, nlohmann::json options = nlohmann::json::object(), std::uint64_t seed = 1) {
  CheckContext ctx;
  ctx.rs = share(std::move(rs));
  ctx.p = p;
  ctx.options = std::move(options);
  ctx.seed = seed;
  return ctx;
}

CheckResult run(const std::string& name, const CheckContext& ctx) { return run_check(find_check(name), ctx); }

}  // namespace

// ---- entropy and forms ----

TEST(Entropy, ConstantIsZero) {
  Fixture s(build_type_b(2, 1.0, 1.0), mu_u, 2.0);
  const Eigen::VectorXd one = Eigen::VectorXd::Constant(s.me.point_count(), 3.0);
  EXPECT_NEAR(entropy(s.me, one, EntropyVariant::ent).value, 0.0, 1e-12);
  EXPECT_NEAR(entropy(s.me, one, EntropyVariant::phi, 1.0).value, 0.0, 1e-12);
}

TEST(Entropy, HomogeneousOfDegreeOne) {
  Fixture s(build_rank_one(1.0), mu_u, 2.0);
  const Eigen::VectorXd f = s.me.evaluate([](const Vector& x) { return 1.0 + x(0) + 0.3 * x(0) * x(0); });
  const double e = entropy(s.me, f, EntropyVariant::ent).value;
  for (double lam : {0.1, 7.0}) {
    const double el = entropy(s.me, Eigen::VectorXd(std::sqrt(lam) * f), EntropyVariant::ent).value;
    EXPECT_NEAR(el, lam * e, 1e-10 * std::abs(lam * e));
  }
}

TEST(Entropy, GaussianExponentialClosedForm) {
  // f^2 = e^x under N(0, 1/2): Ent = E[x e^x] - E[e^x] log E[e^x] = e^{1/4}/4.
  Fixture s(build_rank_one(0.0), mu_u, 2.0);
  const Eigen::VectorXd f = s.me.evaluate([](const Vector& x) { return std::exp(0.5 * x(0)); });
  EXPECT_NEAR(entropy(s.me, f, EntropyVariant::ent).value, std::exp(0.25) / 4.0, 1e-10);
}

TEST(Entropy, NonnegativeOnRandomFunctions) {
  Fixture s(build_type_b(2, 1.0, 0.5), mu_u, 2.0);
  const FunctionBasis b = hermite_basis(2, 4);
  const Tabulation t = tabulate(b, s.me);
  for (const auto& c : test_suite(t, 100, 5)) {
    const Estimate e = entropy(s.me, combine(t, c.coeffs).f, EntropyVariant::ent);
    EXPECT_GE(e.value, -e.err - 1e-12) << c.name;
  }
}

TEST(DirichletForm, ConstantAndLinear) {
  for (double k : {0.0, 1.0}) {
    Fixture s(build_rank_one(k), mu_u, 2.0);
    const Tabulation t = tabulate(single(var(1, 0)), s.me);
    EXPECT_NEAR(dirichlet_form(s.me, combine(t, Eigen::VectorXd::Ones(1))).value, (1 + 2 * k) * (1 + 2 * k), 1e-10);
    const Tabulation one = tabulate(single(Polynomial::constant(1, Rational(1))), s.me);
    EXPECT_NEAR(dirichlet_form(s.me, combine(one, Eigen::VectorXd::Ones(1))).value, 0.0, 1e-14);
  }
}

// ---- explicit-constant bounds ----

TEST(ExplicitBounds, KeyInequalityOnX) {
  // E x^4 = 3/4 <= int |f'|^2 + (N + 2 gamma) int f^2 = 1 + 1/2 for the Gaussian.
  Fixture s(build_rank_one(0.0), mu_u, 2.0);
  const Tabulation t = tabulate(single(var(1, 0)), s.me);
  const FieldValues f = combine(t, Eigen::VectorXd::Ones(1));
  const InequalityReport r = make_report("keyineq", weighted_norm(s.me, f.f, NormKind::l2, [](const Vector& x) { return x.squaredNorm(); }),
                                         {{"dirichlet", 1.0, dirichlet_form(s.me, f)}, {"mass", 1.0, weighted_norm(s.me, f.f)}});
  EXPECT_NEAR(r.lhs.value, 0.75, 1e-10);
  EXPECT_NEAR(r.rhs, 1.5, 1e-10);
  EXPECT_FALSE(r.violated);
}

TEST(ExplicitBounds, CatalogSuitesHold) {
  for (double k : {0.0, 1.0}) {
    for (const char* name : {"keyineq", "ubound-l1"}) {
      const CheckResult r = run(name, context(build_rank_one(k), 2.0));
      EXPECT_FALSE(r.violated) << name << " k=" << k;
      EXPECT_GT(r.reports.size(), 10u);
    }
    const CheckResult u = run("ubound-intermediate", context(build_rank_one(k), 2.0, {{"p_values", {1.5, 2.0, 3.0}}}));
    EXPECT_FALSE(u.violated);
  }
}

TEST(ExplicitBounds, ReportViolationLogic) {
  const InequalityReport ok = make_report("x", {1.0, 0.1}, {{"t", 1.0, {0.95, 0.0}}});
  EXPECT_FALSE(ok.violated);
  const InequalityReport bad = make_report("x", {1.0, 0.01}, {{"t", 1.0, {0.9, 0.0}}});
  EXPECT_TRUE(bad.violated);
  EXPECT_NEAR(bad.margin, -0.1, 1e-15);
  const InequalityReport nan = make_report("x", {std::nan(""), 0.0}, {});
  EXPECT_FALSE(nan.valid);
  EXPECT_FALSE(nan.violated);
}

TEST(ExplicitBounds, SyntheticViolationIsFlagged) {
  EXPECT_TRUE(run("synthetic-violation", context(build_rank_one(1.0), 2.0)).violated);
}

// ---- fitted constants ----

TEST(Rayleigh, GaussianSpectralGap) {
  Fixture s(build_rank_one(0.0), mu_u, 2.0);
  const Tabulation t = tabulate(hermite_basis(1, 6), s.me);
  EXPECT_NEAR(estimate_best_constant_rayleigh(t).lambda_max, 0.5, 0.01);
}

TEST(Rayleigh, TwoElementBasisIsExactQuotient) {
  for (double k : {0.0, 1.0, 2.5}) {
    Fixture s(build_rank_one(k), mu_u, 2.0);
    FunctionBasis b = single(Polynomial::constant(1, Rational(1)));
    b.add(BasisMember::polynomial(var(1, 0)));
    const Tabulation t = tabulate(b, s.me);
    EXPECT_NEAR(estimate_best_constant_rayleigh(t).lambda_max, (k + 0.5) / ((1 + 2 * k) * (1 + 2 * k)), 1e-9);
  }
}

TEST(Rayleigh, MonotoneInBasis) {
  Fixture s(build_type_b(2, 1.0, 1.0), mu_u, 2.0);
  double prev = 0.0;
  for (int d = 1; d <= 5; ++d) {
    const double l = estimate_best_constant_rayleigh(tabulate(hermite_basis(2, d), s.me)).lambda_max;
    EXPECT_GE(l, prev - 1e-9) << "degree " << d;
    prev = l;
  }
}

TEST(TightLogSobolev, GaussianCalibration) {
  const CheckResult r = run("tight-logsob", context(build_rank_one(0.0), 2.0));
  EXPECT_NEAR(r.details.at("fit").at("C").get<double>(), 1.0, 0.1);
  EXPECT_FALSE(r.violated);
}

TEST(TightLogSobolev, SelfConsistencyAndPoincareOrdering) {
  struct Case {
    RootSystem rs;
    double p;
  };
  std::vector<Case> cases{{build_rank_one(0.0), 2.0}, {build_rank_one(1.0), 2.0}, {build_rank_one(0.0), 4.0}, {build_rank_one(1.0), 4.0}};
  for (auto& c : cases) {
    const double k = c.rs.gamma();
    const CheckResult r = run("tight-logsob", context(std::move(c.rs), c.p, {{"holdout", 500}}));
    EXPECT_FALSE(r.violated) << "k=" << k << " p=" << c.p;
    const double C = r.details.at("fit").at("C").get<double>();
    EXPECT_LE(r.details.at("poincare_lambda_max").get<double>(), 0.5 * C * (1.0 + 1e-3)) << "k=" << k << " p=" << c.p;
  }
}

TEST(TightLogSobolev, SelfConsistencyA2) {
  const CheckResult r = run("tight-logsob", context(build_type_a(3, 1.0), 2.0, {{"holdout", 500}}));
  EXPECT_FALSE(r.violated);
  EXPECT_GE(r.reports.size(), 500u);
  EXPECT_LE(r.details.at("poincare_lambda_max").get<double>(), 0.5 * r.details.at("fit").at("C").get<double>() * (1.0 + 1e-3));
}

TEST(TightLogSobolev, ConstantNonincreasingWhenBasisShrinks) {
  Fixture s(build_rank_one(1.0), mu_u, 2.0);
  const Tabulation big = tabulate(hermite_basis(1, 6), s.me);
  const Tabulation small = tabulate(hermite_basis(1, 3), s.me);
  auto fit = [](const Tabulation& t) {
    const InequalityFamily fam = linear_family("ent", t, {"dirichlet"}, [&t](const FieldValues& f) {
      return FamilyTerms{entropy(*t.me, f.f, EntropyVariant::ent), {dirichlet_form(*t.me, f)}};
    });
    return fit_tight_constant(fam, test_suite(t, 0, 1), 0).C;
  };
  EXPECT_LE(fit(small), fit(big) + 1e-12);
}

TEST(TwoConstant, FamiliesHoldOnHoldout) {
  for (const char* name : {"logsob-gaussian", "logsob-boltzmann"}) {
    const CheckResult r = run(name, context(build_rank_one(1.0), 2.0));
    EXPECT_FALSE(r.violated) << name;
  }
  for (const char* name : {"logsob-abs-pow", "logsob-l1", "phi-sobolev"}) {
    const CheckResult r = run(name, context(build_rank_one(1.0), 1.5));
    EXPECT_FALSE(r.violated) << name;
  }
}

TEST(PhiEntropy, ConstantGivesZero) {
  Fixture s(build_rank_one(1.0), mu_u, 2.0);
  EXPECT_NEAR(entropy(s.me, Eigen::VectorXd::Constant(s.me.point_count(), 2.0), EntropyVariant::phi, 1.0).value, 0.0, 1e-12);
  const Eigen::VectorXd f = s.me.evaluate([](const Vector& x) { return 1.0 + 0.5 * x(0); });
  EXPECT_GE(entropy(s.me, f, EntropyVariant::phi, 1.0).value, 0.0);
}

// ---- applications ----

TEST(Rothaus, DefectAtZeroAndInfinity) {
  Fixture s(build_rank_one(0.0), mu_u, 2.0);
  const Eigen::VectorXd f = s.me.evaluate([](const Vector& x) { return x(0); });
  const auto rows = rothaus_defect(s.me, f, {0.0, 1000.0});
  EXPECT_NEAR(rows[0].defect.value, 2.0 * rows[0].mass.value, 1e-10);
  // Ent((f + c)^2) -> 2 int f^2 for centred f, so the defect tends to Ent(f^2).
  EXPECT_NEAR(rows[1].shifted.value, 2.0 * rows[1].mass.value, 1e-4);
  EXPECT_NEAR(rows[1].defect.value, rows[1].ent.value, 1e-4);
}

TEST(Rothaus, SweepNonnegative) {
  Fixture s(build_rank_one(0.0), mu_u, 2.0);
  const Eigen::VectorXd f = s.me.evaluate([](const Vector& x) { return x(0); });
  std::vector<double> cs;
  for (int i = -10; i <= 10; ++i) cs.push_back(0.5 * i);
  for (const auto& r : rothaus_defect(s.me, f, cs)) EXPECT_FALSE(r.negative) << "c=" << r.c;
  EXPECT_FALSE(run("rothaus", context(build_type_b(2, 1.0, 1.0), 2.0)).violated);
}

TEST(Concentration, RankOneGaussianTails) {
  const auto rs = share(build_rank_one(0.0));
  const auto chains = sample_chains(mu_u_measure(rs, 2.0), 25000, 4, Algo::rwm, 41);
  const ConcentrationProfile prof = concentration_profile(*rs, chains, norm_field(), 1.0, {0.0, 0.5, 1.0, 2.0});
  EXPECT_TRUE(prof.satisfied());
  EXPECT_DOUBLE_EQ(prof.rows[0].bound, 1.0);
  // Closed-form tail of |x| for N(0, 1/2): P(|x| >= m + r) = erfc(m + r).
  const double m = 1.0 / std::sqrt(std::numbers::pi);
  for (const auto& row : prof.rows) EXPECT_NEAR(row.tail, std::erfc(m + row.r), 0.01) << "r=" << row.r;
}

TEST(Concentration, NonInvariantFunctionRejected) {
  const auto rs = share(build_rank_one(1.0));
  const auto chains = sample_chains(mu_u_measure(rs, 2.0), 500, 2, Algo::rwm, 42);
  ScalarField f = field_from_polynomial(var(1, 0), "x");
  f.lipschitz = 1.0;
  expect_error(ErrorKind::hypothesis_violation, [&] { concentration_profile(*rs, chains, f, 1.0, {0.5}); });
}

TEST(ExpIntegrability, ZeroTiltGivesMass) {
  const auto rs = share(build_rank_one(1.0));
  const IntegrabilityScan s = exp_integrability_scan(mu_u_measure(rs, 2.0), norm_field(), 0.0, {1, 2, 4, 8, 16});
  double prev = 0.0;
  for (const auto& row : s.rows) {
    EXPECT_GE(row.integral.value, prev - 1e-12);
    prev = row.integral.value;
  }
  EXPECT_NEAR(prev, 1.0, 1e-8);
  EXPECT_TRUE(s.converged);
}

TEST(ExpIntegrability, GaussianLimitClosedForm) {
  // E e^{b^2 x^2 / 2} under N(0, 1/2) = (1 - b^2/2)^{-1/2}.
  const auto rs = share(build_rank_one(0.0));
  const IntegrabilityScan s = exp_integrability_scan(mu_u_measure(rs, 2.0), norm_field(), 0.5, {1, 2, 4, 8, 16, 32});
  ASSERT_TRUE(s.converged);
  EXPECT_NEAR(s.rows.back().integral.value, 1.0 / std::sqrt(1.0 - 0.125), 1e-6);
  EXPECT_NEAR(radial_exp_expectation_1d(1.0, 2.0, [](double r) { return 0.125 * r * r; }), 1.0 / std::sqrt(0.875), 1e-10);
}

TEST(ExpIntegrability, DivergesBelowTwo) {
  const auto rs = share(build_rank_one(1.0));
  std::vector<double> radii;
  for (double R = 1; R <= 128; R *= 2) radii.push_back(R);
  const IntegrabilityScan s = exp_integrability_scan(mu_u_measure(rs, 1.5), norm_field(), 0.5, radii);
  EXPECT_FALSE(s.converged);
  EXPECT_TRUE(std::isinf(radial_exp_expectation_1d(rs->homogeneous_dim(), 1.5, [](double r) { return 0.125 * r * r; })));
}

TEST(ChamberInvariance, ConstantAndGaussianBump) {
  const auto rs = share(build_type_a(3, 1.0));
  MeasureSpec fs = mu_u_measure(rs, 2.0), ps = mu_u_chamber_measure(rs, 2.0);
  fs.normalized = false;
  ps.normalized = false;
  const QuadratureGrid full = build_grid(fs, 10), part = build_grid(ps, 10);
  const MeasureEstimator a = MeasureEstimator::from_grid(full), b = MeasureEstimator::from_grid(part);
  ScalarField one;
  one.name = "1";
  one.value = [](const Vector&) { return 1.0; };
  one.g_invariant = true;
  const InequalityReport r1 = chamber_invariance_check(*rs, one, a, b);
  EXPECT_FALSE(r1.violated);
  EXPECT_NEAR(r1.lhs.value / (std::pow(std::numbers::pi, 1.5) * 1.5), 1.0, 1e-6);
  ScalarField bump;
  bump.name = "|x|^2 e^{-|x|^2}";
  bump.value = [](const Vector& x) { return x.squaredNorm() * std::exp(-x.squaredNorm()); };
  bump.g_invariant = true;
  const InequalityReport r2 = chamber_invariance_check(*rs, bump, a, b);
  EXPECT_NEAR(r2.lhs.value, r2.rhs, 1e-5 * std::abs(r2.lhs.value));
  EXPECT_FALSE(run("chamber-invariance", context(build_type_b(2, 1.0, 1.0), 2.0)).violated);
}

TEST(Sobolev, ClassicalCeilingAndRescaling) {
  const CheckResult r = run("sobolev-ratio", context(build_type_a(3, 0.0), 2.0));
  EXPECT_FALSE(r.violated);
  const double lb = r.details.at("lower_bound").get<double>();
  EXPECT_DOUBLE_EQ(r.details.at("q").get<double>(), 6.0);
  EXPECT_NEAR(r.details.at("classical_constant").get<double>(), 0.42726, 1e-5);
  EXPECT_LE(lb, 0.42726);
  EXPECT_GT(lb, 0.0);
}

TEST(Sobolev, MonotoneInBasis) {
  Fixture s(build_type_b(2, 0.5, 0.5), mu_u, 2.0);
  const Tabulation small = tabulate(hermite_basis(2, 2, RadialFactor::gaussian(0.5)), s.me);
  const Tabulation big = tabulate(hermite_basis(2, 4, RadialFactor::gaussian(0.5)), s.me);
  EXPECT_LE(sobolev_ratio(small, 2.0, 0, 0).lower_bound, sobolev_ratio(big, 2.0, 0, 0).lower_bound + 1e-12);
}

TEST(LpLogSobolev, ConstantOnSupportAndMonotoneC) {
  EXPECT_GT(c_of_epsilon(0.1, 0.3, 3.0), c_of_epsilon(0.2, 0.3, 3.0));
  const CheckResult r = run("lp-logsob", context(build_rank_one(1.0), 2.0));
  EXPECT_FALSE(r.violated);
}

TEST(LpLogSobolev, NegativeFunctionRejected) {
  const auto rs = share(build_rank_one(1.0));
  MeasureSpec ms = ball_measure(rs, 2.0);
  const MeasureEstimator me = MeasureEstimator::from_grid(build_grid(ms));
  const Tabulation t = tabulate(single(var(1, 0)), me);
  expect_error(ErrorKind::hypothesis_violation, [&] { lp_logsob_check(t, Eigen::VectorXd::Ones(1), 4.0, 0.5, 0.0); });
}

// ---- catalog ----

TEST(Catalog, ContentsAndAnchors) {
  EXPECT_GE(catalog().size(), 14u);
  EXPECT_NE(find_check("keyineq").anchor.find("key inequality"), std::string::npos);
  EXPECT_NE(find_check("poincare-mu-U").anchor.find("Poincare"), std::string::npos);
  expect_error(ErrorKind::config_error, [] { find_check("nope"); });
}

TEST(Catalog, PoincareChecksHold) {
  EXPECT_FALSE(run("poincare-mu-U", context(build_type_b(2, 1.0, 1.0), 2.0)).violated);
  EXPECT_FALSE(run("poincare-ball", context(build_rank_one(1.0), 2.0)).violated);
  CheckContext ch = context(build_type_b(2, 1.0, 1.0), 2.0);
  ch.chamber = true;
  EXPECT_FALSE(run("poincare-chamber", ch).violated);
}

TEST(Catalog, Reproducible) {
  const CheckResult a = run("logsob-boltzmann", context(build_rank_one(1.0), 3.0, nlohmann::json::object(), 9));
  const CheckResult b = run("logsob-boltzmann", context(build_rank_one(1.0), 3.0, nlohmann::json::object(), 9));
  ASSERT_EQ(a.reports.size(), b.reports.size());
  for (std::size_t i = 0; i < a.reports.size(); ++i) EXPECT_EQ(a.reports[i].margin, b.reports[i].margin);
}
