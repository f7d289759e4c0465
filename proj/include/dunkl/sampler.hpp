#pragma once

// MCMC for mu_U and mu_{U,H}, plus an exact tridiagonal beta-Hermite sampler
// for A_{N-1} with p = 2.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "dunkl/error.hpp"
#include "dunkl/quadrature.hpp"
#include "dunkl/root_system.hpp"

namespace dunkl {

enum class Algo { rwm, langevin, oracle };

inline std::string to_string(Algo a) {
  switch (a) {
    case Algo::rwm: return "rwm";
    case Algo::langevin: return "langevin";
    case Algo::oracle: return "beta-hermite";
  }
  return "unknown";
}

inline Algo algo_from_string(const std::string& s) {
  if (s == "rwm") return Algo::rwm;
  if (s == "langevin" || s == "mala") return Algo::langevin;
  fail(ErrorKind::invalid_argument, "unknown sampler algorithm '" + s + "'");
}

struct SampleChain {
  Matrix points;  // n x N, one draw per row
  std::vector<double> log_density;
  double acceptance_rate = 0.0;
  std::uint64_t seed = 0;
  int burn_in = 0;
  int thinning = 1;
  Algo algo = Algo::rwm;
  double step = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
};

struct SamplerOptions {
  int burn_in = -1;  // default n/10
  int thinning = 1;
  std::optional<Vector> start;
  /// Full-space targets also apply a uniformly random group element after each
  /// step. mu_U is G-invariant, so the move is always accepted and lets the
  /// chain cross walls where the density vanishes.
  bool group_moves = true;
};

/// splitmix64 finalizer.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of chain i derived from the master seed.
inline std::uint64_t chain_seed(std::uint64_t master, std::size_t i) {
  return splitmix64(master ^ ((static_cast<std::uint64_t>(i) + 1) * 0x9E3779B97F4A7C15ULL));
}

/// Unnormalized log density sum 2k log|<alpha,x>| - |x|^p; -inf on walls and,
/// for the chamber variant, outside the chamber.
inline double log_density(const MeasureSpec& ms, const Vector& x) {
  const RootSystem& rs = *ms.rs;
  double lp = -std::pow(x.norm(), ms.p);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const double ax = rs.positive_roots()[i].dot(x);
    const double k = rs.multiplicity(i);
    if (ms.chamber && ax * ms.chamber->signs[i] <= 0.0) return -std::numeric_limits<double>::infinity();
    if (k == 0.0) continue;
    if (on_wall(rs, x, i)) return -std::numeric_limits<double>::infinity();
    lp += 2.0 * k * std::log(std::abs(ax));
  }
  return lp;
}

/// sum 2k alpha/<alpha,x> - p |x|^{p-2} x.
inline Vector grad_log_density(const MeasureSpec& ms, const Vector& x) {
  const RootSystem& rs = *ms.rs;
  const double r = x.norm();
  Vector g = -ms.p * std::pow(r, ms.p - 2.0) * x;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const double k = rs.multiplicity(i);
    if (k == 0.0) continue;
    const Vector& a = rs.positive_roots()[i];
    g += 2.0 * k * a / a.dot(x);
  }
  return g;
}

namespace detail {

inline Vector default_start(const MeasureSpec& ms) {
  const RootSystem& rs = *ms.rs;
  Vector c = rs.chamber_rays().rowwise().sum();
  for (Eigen::Index j = 0; j < rs.complement_basis().cols(); ++j) c += 0.1 * (j + 1) * rs.complement_basis().col(j);
  if (c.norm() == 0.0) c = Vector::Ones(rs.dim());
  c.normalize();
  const GroupElement& g = chamber_element(rs, ms.chamber ? *ms.chamber : fundamental_chamber(rs));
  // Radius near the mode of r^{N-1+2 gamma} e^{-r^p}.
  const double r = std::pow(std::max(1.0, rs.homogeneous_dim() - 1.0) / ms.p, 1.0 / ms.p);
  return g.matrix * (r * c);
}

class Kernel {
 public:
  Kernel(const MeasureSpec& ms, Algo algo, std::mt19937_64& rng, bool group_moves)
      : ms_(ms), algo_(algo), rng_(rng), group_moves_(group_moves && !ms.chamber && ms.rs->group().size() > 1) {}

  void set_state(const Vector& x) {
    x_ = x;
    lp_ = log_density(ms_, x_);
    if (algo_ == Algo::langevin) g_ = grad_log_density(ms_, x_);
  }
  const Vector& state() const { return x_; }
  double log_prob() const { return lp_; }

  bool step(double h) {
    const Eigen::Index n = x_.size();
    Vector xi(n);
    for (Eigen::Index j = 0; j < n; ++j) xi(j) = normal_(rng_);
    bool accepted = false;
    if (algo_ == Algo::rwm) {
      const Vector y = x_ + h * xi;
      const double lpy = log_density(ms_, y);
      if (std::isfinite(lpy) && std::log(uniform_(rng_)) < lpy - lp_) {
        x_ = y;
        lp_ = lpy;
        accepted = true;
      }
    } else {
      const double tau = 0.5 * h * h;
      const Vector y = x_ + tau * g_ + h * xi;
      const double lpy = log_density(ms_, y);
      if (std::isfinite(lpy)) {
        const Vector gy = grad_log_density(ms_, y);
        const double fwd = (y - x_ - tau * g_).squaredNorm();
        const double bwd = (x_ - y - tau * gy).squaredNorm();
        const double log_alpha = lpy - lp_ - (bwd - fwd) / (2.0 * h * h);
        if (std::log(uniform_(rng_)) < log_alpha) {
          x_ = y;
          lp_ = lpy;
          g_ = gy;
          accepted = true;
        }
      }
    }
    if (group_moves_) {
      const auto& G = ms_.rs->group();
      std::uniform_int_distribution<std::size_t> pick(0, G.size() - 1);
      x_ = G[pick(rng_)].matrix * x_;
      if (algo_ == Algo::langevin) g_ = grad_log_density(ms_, x_);
    }
    return accepted;
  }

 private:
  const MeasureSpec& ms_;
  Algo algo_;
  std::mt19937_64& rng_;
  bool group_moves_;
  Vector x_;
  Vector g_;
  double lp_ = 0.0;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace detail

/// Adaptive pre-run: double or halve the step until the acceptance rate of a
/// 200-step batch lies in [lo, hi]; the factor shrinks to its square root
/// whenever the direction of adjustment flips. The step is frozen afterwards.
inline double tune_step(detail::Kernel& kernel, double h, double lo, double hi) {
  double factor = 2.0;
  int last_dir = 0;
  for (int round = 0; round < 60; ++round) {
    int acc = 0;
    for (int s = 0; s < 200; ++s) acc += kernel.step(h) ? 1 : 0;
    const double rate = acc / 200.0;
    int dir = 0;
    if (rate < lo) dir = -1;
    if (rate > hi) dir = 1;
    if (dir == 0) return h;
    if (last_dir != 0 && dir != last_dir) factor = std::sqrt(factor);
    last_dir = dir;
    h = dir > 0 ? h * factor : h / factor;
  }
  return h;
}

inline SampleChain sample_mu_u(const MeasureSpec& ms, int n, Algo algo, std::uint64_t seed, const SamplerOptions& opt = {}) {
  validate(ms);
  if (!ms.confined()) fail(ErrorKind::invalid_argument, "sampler targets mu_U or mu_U_chamber");
  if (n < 1) fail(ErrorKind::invalid_argument, "need at least one draw");
  if (algo == Algo::oracle) fail(ErrorKind::invalid_argument, "use sample_beta_hermite_oracle for the oracle sampler");
  if (algo == Algo::langevin && ms.p < 2.0) {
    fail(ErrorKind::unsupported, "langevin needs p >= 2: the drift p|x|^{p-2}x is unbounded at 0 for p < 2");
  }
  if (opt.thinning < 1) fail(ErrorKind::invalid_argument, "thinning must be positive");
  const Vector start = opt.start ? *opt.start : detail::default_start(ms);
  if (start.size() != ms.rs->dim()) fail(ErrorKind::invalid_dimension, "start point has the wrong dimension");
  if (!std::isfinite(log_density(ms, start))) {
    fail(ErrorKind::invalid_start, "start point lies on a wall or outside the chamber");
  }
  std::mt19937_64 rng(seed);
  detail::Kernel kernel(ms, algo, rng, opt.group_moves);
  kernel.set_state(start);
  const double h0 = 1.0 / std::sqrt(static_cast<double>(ms.rs->dim()));
  const double h = algo == Algo::rwm ? tune_step(kernel, h0, 0.2, 0.4) : tune_step(kernel, h0, 0.45, 0.75);

  SampleChain chain;
  chain.seed = seed;
  chain.algo = algo;
  chain.step = h;
  chain.thinning = opt.thinning;
  chain.burn_in = opt.burn_in >= 0 ? opt.burn_in : n / 10;
  for (int s = 0; s < chain.burn_in; ++s) kernel.step(h);
  chain.points.resize(n, ms.rs->dim());
  chain.log_density.resize(static_cast<std::size_t>(n));
  long accepted = 0, total = 0;
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < opt.thinning; ++t) {
      accepted += kernel.step(h) ? 1 : 0;
      ++total;
    }
    chain.points.row(i) = kernel.state().transpose();
    chain.log_density[static_cast<std::size_t>(i)] = kernel.log_prob();
  }
  chain.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(total);
  return chain;
}

/// Independent chains with seeds chain_seed(master, i), run on up to `jobs` threads.
inline std::vector<SampleChain> sample_chains(const MeasureSpec& ms, int n, int chains, Algo algo, std::uint64_t master_seed,
                                              int jobs = 1, const SamplerOptions& opt = {}) {
  if (chains < 1) fail(ErrorKind::invalid_argument, "need at least one chain");
  std::vector<SampleChain> out(static_cast<std::size_t>(chains));
  std::vector<std::exception_ptr> errors(out.size());
  auto run = [&](std::size_t i) {
    try {
      out[i] = sample_mu_u(ms, n, algo, chain_seed(master_seed, i), opt);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t width = static_cast<std::size_t>(std::max(1, jobs));
  for (std::size_t base = 0; base < out.size(); base += width) {
    std::vector<std::thread> pool;
    for (std::size_t i = base; i < std::min(out.size(), base + width); ++i) {
      if (width == 1) {
        run(i);
      } else {
        pool.emplace_back(run, i);
      }
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

/// Exact draws from mu_{U,H} for A_{N-1}, p = 2, x_1 > ... > x_N.
///
/// The Hermite beta-ensemble H = (1/sqrt 2) tridiag(a, b) with a_i ~ N(0, 2)
/// and b_i ~ chi_{beta (N - i)} has eigenvalue density proportional to
/// prod |l_i - l_j|^beta exp(-|l|^2 / 2). With beta = 2k and x = l / sqrt 2 this
/// becomes prod |x_i - x_j|^{2k} exp(-|x|^2), the target. N = 1 gives N(0, 1/2).
inline SampleChain sample_beta_hermite_oracle(int N, double k, int n, std::uint64_t seed) {
  if (!(k > 0.0)) fail(ErrorKind::unsupported, "beta-Hermite oracle needs k > 0");
  if (N < 1 || n < 1) fail(ErrorKind::invalid_argument, "oracle needs N >= 1 and n >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0));
  const double beta = 2.0 * k;
  SampleChain chain;
  chain.seed = seed;
  chain.algo = Algo::oracle;
  chain.acceptance_rate = 1.0;
  chain.points.resize(n, N);
  chain.log_density.resize(static_cast<std::size_t>(n));
  Eigen::VectorXd diag(N), sub(std::max(N - 1, 0));
  auto ms = mu_u_chamber_measure(share(N >= 2 ? build_type_a(N, k) : build_rank_one(k)), 2.0);
  for (int s = 0; s < n; ++s) {
    for (int i = 0; i < N; ++i) diag(i) = normal(rng) / std::sqrt(2.0);
    for (int i = 0; i + 1 < N; ++i) {
      std::chi_squared_distribution<double> chi2(beta * (N - 1 - i));
      sub(i) = std::sqrt(chi2(rng)) / std::sqrt(2.0);
    }
    Eigen::VectorXd lambda;
    if (N == 1) {
      lambda = diag;
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
      es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
      lambda = es.eigenvalues();
    }
    std::sort(lambda.data(), lambda.data() + N, std::greater<double>());
    const Vector x = lambda / std::sqrt(2.0);
    chain.points.row(s) = x.transpose();
    chain.log_density[static_cast<std::size_t>(s)] = N >= 2 ? log_density(ms, x) : -x.squaredNorm();
  }
  return chain;
}

inline void write_chain_csv(const SampleChain& c, const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
  const std::string tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) fail(ErrorKind::io_error, "cannot write " + tmp);
    out.precision(17);
    for (int j = 0; j < c.dim(); ++j) out << (j ? "," : "") << "x_" << (j + 1);
    out << "\n";
    for (Eigen::Index i = 0; i < c.points.rows(); ++i) {
      for (Eigen::Index j = 0; j < c.points.cols(); ++j) out << (j ? "," : "") << c.points(i, j);
      out << "\n";
    }
  }
  std::filesystem::rename(tmp, path);
}

inline nlohmann::json chain_sidecar(const SampleChain& c) {
  return {{"seed", c.seed},         {"algo", to_string(c.algo)},
          {"burn_in", c.burn_in},   {"thinning", c.thinning},
          {"acceptance_rate", c.acceptance_rate}, {"step", c.step},
          {"draws", c.size()}};
}

inline SampleChain read_chain_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io_error, "cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  const int dim = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
  std::vector<double> vals;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t pos = 0;
    for (int j = 0; j < dim; ++j) {
      std::size_t used = 0;
      vals.push_back(std::stod(line.substr(pos), &used));
      pos += used + 1;
    }
  }
  SampleChain c;
  const Eigen::Index n = static_cast<Eigen::Index>(vals.size()) / dim;
  c.points = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(vals.data(), n, dim);
  return c;
}

}  // namespace dunkl
