#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "dunkl/diagnostics.hpp"
#include "dunkl/sampler.hpp"
#include "test_util.hpp"

using namespace dunkl;
using dunkl::testing::expect_error;

namespace {

double sum_sq(const Vector& x) { return x.squaredNorm(); }

double mean_gap(const Vector& x) {
  std::vector<double> v(x.data(), x.data() + x.size());
  std::sort(v.begin(), v.end());
  return (v.back() - v.front()) / static_cast<double>(v.size() - 1);
}

FunctionalDiagnostics summarize(const std::vector<SampleChain>& chains, const std::string& name, Functional f) {
  return diagnose(chains, {{name, std::move(f)}}, chains.size() >= 2).functionals.front();
}

}  // namespace

TEST(Sampler, RankOneSecondMoment) {
  for (double k : {0.0, 1.0, 2.5}) {
    const auto chains = sample_chains(mu_u_measure(share(build_rank_one(k)), 2.0), 25000, 4, Algo::rwm, 100 + static_cast<int>(k * 2));
    const auto d = summarize(chains, "x^2", sum_sq);
    EXPECT_LT(std::abs(d.mean - (k + 0.5)), 3.0 * d.mc_se) << "k=" << k << " mean " << d.mean << " se " << d.mc_se;
  }
}

TEST(Sampler, GaussianCovariance) {
  const auto chains = sample_chains(mu_u_measure(share(build_type_b(2, 0.0, 0.0)), 2.0), 20000, 4, Algo::langevin, 7);
  const auto xx = summarize(chains, "x1^2", [](const Vector& x) { return x(0) * x(0); });
  const auto yy = summarize(chains, "x2^2", [](const Vector& x) { return x(1) * x(1); });
  const auto xy = summarize(chains, "x1 x2", [](const Vector& x) { return x(0) * x(1); });
  EXPECT_LT(std::abs(xx.mean - 0.5), 3.0 * xx.mc_se);
  EXPECT_LT(std::abs(yy.mean - 0.5), 3.0 * yy.mc_se);
  EXPECT_LT(std::abs(xy.mean), 3.0 * xy.mc_se);
}

TEST(Sampler, ChamberDrawsStayInChamber) {
  const auto rs = share(build_type_a(3, 1.0));
  const SampleChain c = sample_mu_u(mu_u_chamber_measure(rs, 2.0), 5000, Algo::rwm, 3);
  for (Eigen::Index i = 0; i < c.points.rows(); ++i) {
    EXPECT_GT(c.points(i, 0), c.points(i, 1));
    EXPECT_GT(c.points(i, 1), c.points(i, 2));
  }
}

TEST(Sampler, DrawsAvoidWallsAndAcceptanceHealthy) {
  const auto rs = share(build_type_b(2, 1.0, 1.0));
  const SampleChain c = sample_mu_u(mu_u_measure(rs, 2.0), 5000, Algo::rwm, 4);
  EXPECT_GT(c.acceptance_rate, 0.0);
  EXPECT_LT(c.acceptance_rate, 1.0);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_TRUE(std::isfinite(c.log_density[i]));
}

TEST(Sampler, OracleMatchesMcmcTwoParticles) {
  const double k = 1.5;
  const auto mcmc = sample_chains(mu_u_measure(share(build_type_a(2, k)), 2.0), 25000, 4, Algo::rwm, 11);
  const std::vector<SampleChain> oracle = {sample_beta_hermite_oracle(2, k, 100000, 12)};
  for (auto [name, f] : std::vector<std::pair<std::string, Functional>>{{"gap", mean_gap}, {"sum_sq", sum_sq}}) {
    const auto a = summarize(mcmc, name, f), b = summarize(oracle, name, f);
    EXPECT_LT(std::abs(a.mean - b.mean), 3.0 * std::hypot(a.mc_se, b.mc_se)) << name;
  }
}

TEST(Sampler, OracleExactSecondMoment) {
  // E |x|^2 = (N + 2 gamma)/2 = (4 + 12)/2 for A_3 with k = 1.
  const std::vector<SampleChain> oracle = {sample_beta_hermite_oracle(4, 1.0, 50000, 13)};
  const auto d = summarize(oracle, "sum_sq", sum_sq);
  EXPECT_LT(std::abs(d.mean - 8.0), 3.0 * d.mc_se);
}

TEST(Sampler, OracleSingleParticleIsGaussian) {
  const std::vector<SampleChain> oracle = {sample_beta_hermite_oracle(1, 1.0, 50000, 14)};
  const auto d = summarize(oracle, "x^2", sum_sq);
  EXPECT_LT(std::abs(d.mean - 0.5), 3.0 * d.mc_se);
}

TEST(Sampler, ReproducibleFromSeed) {
  const auto ms = mu_u_measure(share(build_type_b(2, 1.0, 0.5)), 3.0);
  const SampleChain a = sample_mu_u(ms, 2000, Algo::langevin, 99), b = sample_mu_u(ms, 2000, Algo::langevin, 99);
  EXPECT_EQ(a.points, b.points);
  const SampleChain c = sample_mu_u(ms, 2000, Algo::langevin, 100);
  EXPECT_NE(a.points, c.points);
}

TEST(Sampler, ParallelChainsMatchSerial) {
  const auto ms = mu_u_measure(share(build_rank_one(1.0)), 2.0);
  const auto serial = sample_chains(ms, 3000, 3, Algo::rwm, 5, 1);
  const auto parallel = sample_chains(ms, 3000, 3, Algo::rwm, 5, 3);
  for (std::size_t i = 0; i < serial.size(); ++i) EXPECT_EQ(serial[i].points, parallel[i].points);
}

TEST(Sampler, CsvRoundTrip) {
  const SampleChain c = sample_mu_u(mu_u_measure(share(build_type_b(2, 1.0, 1.0)), 2.0), 500, Algo::rwm, 6);
  const auto path = std::filesystem::temp_directory_path() / "dunkl_chain_test.csv";
  write_chain_csv(c, path);
  const SampleChain back = read_chain_csv(path);
  EXPECT_EQ(back.points, c.points);
  const auto side = chain_sidecar(c);
  EXPECT_EQ(side.at("seed").get<std::uint64_t>(), c.seed);
  EXPECT_EQ(side.at("algo").get<std::string>(), "rwm");
  std::filesystem::remove(path);
}

TEST(Sampler, LangevinNeedsSmoothPotential) {
  expect_error(ErrorKind::unsupported, [] { sample_mu_u(mu_u_measure(share(build_rank_one(1.0)), 1.5), 100, Algo::langevin, 1); });
}

TEST(Diagnostics, RhatNearOneForGaussian) {
  const auto chains = sample_chains(mu_u_measure(share(build_type_b(2, 0.0, 0.0)), 2.0), 10000, 4, Algo::rwm, 21);
  const ChainDiagnostics d = diagnose(chains);
  for (double r : d.rhat) EXPECT_LT(r, 1.01);
}

TEST(Diagnostics, ConstantFunctionalHasZeroError) {
  const auto chains = sample_chains(mu_u_measure(share(build_rank_one(1.0)), 2.0), 2000, 2, Algo::rwm, 22);
  EXPECT_EQ(summarize(chains, "one", [](const Vector&) { return 1.0; }).mc_se, 0.0);
}

TEST(Diagnostics, ThinningRaisesEssPerDraw) {
  const auto ms = mu_u_measure(share(build_type_b(2, 1.0, 1.0)), 2.0);
  SamplerOptions thin;
  thin.thinning = 10;
  const std::vector<SampleChain> a = {sample_mu_u(ms, 5000, Algo::rwm, 23)};
  const std::vector<SampleChain> b = {sample_mu_u(ms, 5000, Algo::rwm, 23, thin)};
  // Group moves decorrelate raw coordinates, so measure an invariant functional.
  const double ea = summarize(a, "|x|^2", sum_sq).ess / static_cast<double>(a[0].size());
  const double eb = summarize(b, "|x|^2", sum_sq).ess / static_cast<double>(b[0].size());
  EXPECT_GT(eb, ea);
}

TEST(Diagnostics, RhatNeedsTwoChains) {
  const std::vector<SampleChain> one = {sample_mu_u(mu_u_measure(share(build_rank_one(1.0)), 2.0), 500, Algo::rwm, 24)};
  expect_error(ErrorKind::insufficient_chains, [&] { diagnose(one); });
}
