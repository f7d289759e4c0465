#pragma once

// Deterministic integration against mu_k, mu_U, mu_{U,H} and balls.
//
// R^N is tiled by simplicial cones g * (fundamental chamber) x (orthant of the
// complement of the root span), one per group element and complement sign
// pattern. Inside a cone with generators V = [v_1 .. v_N] we use
//
//   x = r * y(t) / |y(t)|,  y(t) = sum t_i v_i,  t in the standard simplex,
//   dx = |det V| |y|^{-N} r^{N-1} dr dt,
//
// so cone faces are walls and the integrand is smooth in every panel. The
// radial rule uses integer panel edges; the first panel substitutes r = h u^q
// with q chosen so that r^p and r^{2 gamma} become integer powers of u.

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dunkl/dunkl_ops.hpp"
#include "dunkl/error.hpp"
#include "dunkl/gauss.hpp"
#include "dunkl/polynomial.hpp"
#include "dunkl/root_system.hpp"
#include "dunkl/scalar_field.hpp"

namespace dunkl {

enum class MeasureVariant { mu_k, mu_U, mu_U_chamber, ball };

inline std::string to_string(MeasureVariant v) {
  switch (v) {
    case MeasureVariant::mu_k: return "mu_k";
    case MeasureVariant::mu_U: return "mu_U";
    case MeasureVariant::mu_U_chamber: return "mu_U_chamber";
    case MeasureVariant::ball: return "ball";
  }
  return "unknown";
}

struct MeasureSpec {
  MeasureVariant variant = MeasureVariant::mu_U;
  std::shared_ptr<const RootSystem> rs;
  double p = 2.0;
  double radius = 1.0;
  /// Required for mu_U_chamber; optional restriction for mu_k and ball.
  std::optional<ChamberId> chamber;
  /// mu_U: false gives the finite measure e^{-U} mu_k. ball: false gives mu_k on B_R.
  bool normalized = true;
  /// Radius of the integration ball; defaults from p (or R for balls).
  std::optional<double> truncation;
  std::optional<double> Z;
  std::optional<double> Z_H;

  const RootSystem& root_system() const { return *rs; }
  bool confined() const { return variant == MeasureVariant::mu_U || variant == MeasureVariant::mu_U_chamber; }
  bool probability() const { return normalized && variant != MeasureVariant::mu_k; }
};

inline std::shared_ptr<const RootSystem> share(RootSystem rs) { return std::make_shared<const RootSystem>(std::move(rs)); }

inline MeasureSpec mu_k_measure(std::shared_ptr<const RootSystem> rs) {
  MeasureSpec m;
  m.variant = MeasureVariant::mu_k;
  m.rs = std::move(rs);
  m.normalized = false;
  return m;
}

inline MeasureSpec mu_u_measure(std::shared_ptr<const RootSystem> rs, double p) {
  MeasureSpec m;
  m.variant = MeasureVariant::mu_U;
  m.rs = std::move(rs);
  m.p = p;
  return m;
}

inline MeasureSpec mu_u_chamber_measure(std::shared_ptr<const RootSystem> rs, double p,
                                        std::optional<ChamberId> chamber = std::nullopt) {
  MeasureSpec m;
  m.variant = MeasureVariant::mu_U_chamber;
  m.p = p;
  m.chamber = chamber ? *chamber : fundamental_chamber(*rs);
  m.rs = std::move(rs);
  return m;
}

inline MeasureSpec ball_measure(std::shared_ptr<const RootSystem> rs, double radius) {
  MeasureSpec m;
  m.variant = MeasureVariant::ball;
  m.rs = std::move(rs);
  m.radius = radius;
  return m;
}

inline void validate(const MeasureSpec& ms) {
  if (!ms.rs) fail(ErrorKind::invalid_argument, "measure has no root system");
  if (ms.confined() && !(ms.p > 1.0)) fail(ErrorKind::invalid_argument, "mu_U needs p > 1");
  if (ms.variant == MeasureVariant::mu_U_chamber && !ms.chamber) {
    fail(ErrorKind::invalid_argument, "chamber measure needs a chamber id");
  }
  if (ms.variant == MeasureVariant::ball && !(ms.radius > 0.0)) fail(ErrorKind::invalid_argument, "ball radius must be positive");
  if (ms.truncation && !(*ms.truncation > 0.0)) fail(ErrorKind::invalid_argument, "truncation radius must be positive");
}

/// Smallest L with e^{-L^p/2} < 1e-12, rounded up to an integer panel edge.
/// mu_k uses the Gaussian rule (p = 2): integrands against it are expected to
/// carry their own e^{-|x|^2}-type decay.
inline double truncation_radius(const MeasureSpec& ms) {
  if (ms.truncation) return *ms.truncation;
  if (ms.variant == MeasureVariant::ball) return ms.radius;
  const double p = ms.confined() ? ms.p : 2.0;
  return std::ceil(std::pow(2.0 * std::log(1e12), 1.0 / p));
}

/// Relative mass outside B_L: Q((N + 2 gamma)/p, L^p), exact by homogeneity
/// of w_k. For mu_k it refers to the reference weight e^{-|x|^2}.
inline double tail_fraction(const MeasureSpec& ms, double L) {
  if (ms.variant == MeasureVariant::ball && L >= ms.radius) return 0.0;
  const double p = ms.confined() ? ms.p : 2.0;
  const double a = ms.rs->homogeneous_dim() / p;
  return boost::math::gamma_q(a, std::pow(L, p));
}

inline int default_resolution(const RootSystem& rs) { return rs.dim() >= 3 ? 12 : 24; }

struct NodeSet {
  Matrix points;  // N x n
  Eigen::VectorXd weights;
  std::size_t size() const { return static_cast<std::size_t>(weights.size()); }
};

struct QuadratureGrid {
  MeasureSpec spec;
  int resolution = 0;
  double truncation_radius = 0.0;
  double est_tail = 0.0;
  /// Divisor applied to the raw weights: Z, Z_H, mu_k(B_R), or 1.
  double mass = 1.0;
  double coarse_mass = 1.0;
  NodeSet fine;
  /// Companion rule at half resolution, used for error estimates.
  NodeSet coarse;

  const Matrix& nodes() const { return fine.points; }
  const Eigen::VectorXd& weights() const { return fine.weights; }
  std::size_t size() const { return fine.size(); }
};

namespace detail {

inline double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 16) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

inline double pairwise_sum(const Eigen::VectorXd& v) { return pairwise_sum(v.data(), static_cast<std::size_t>(v.size())); }

/// Smallest q in [1, 16] with q*a integral for every a in values (else 1).
inline int smoothing_power(const std::vector<double>& values) {
  for (int q = 1; q <= 16; ++q) {
    bool ok = true;
    for (double a : values) {
      const double qa = q * a;
      if (std::abs(qa - std::round(qa)) > 1e-9) ok = false;
    }
    if (ok) return q;
  }
  return 1;
}

struct RadialNode {
  double r;
  double w;  // approximates r^{N-1} dr
};

inline std::vector<RadialNode> radial_rule(int m, int dim, double L, int q) {
  std::vector<RadialNode> out;
  const double h0 = std::min(1.0, L);
  // r = h0 u^q: r^{N-1} dr = q h0^N u^{qN-1} du.
  const GaussRule first = gauss_jacobi_origin(m, q * dim - 1.0, 1.0);
  for (std::size_t i = 0; i < first.nodes.size(); ++i) {
    out.push_back({h0 * std::pow(first.nodes[i], q), q * std::pow(h0, dim) * first.weights[i]});
  }
  double lo = h0;
  while (lo < L - 1e-12) {
    const double hi = std::min(lo + 1.0, L);
    const GaussRule g = gauss_legendre(m, lo, hi);
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      out.push_back({g.nodes[i], g.weights[i] * std::pow(g.nodes[i], dim - 1)});
    }
    lo = hi;
  }
  return out;
}

struct SimplexNode {
  Vector t;  // barycentric
  double w;
};

/// Rule on the standard (N-1)-simplex. `sidi` applies a - sin(2 pi a)/(2 pi)
/// per axis, which flattens |t|^{2k} endpoint behaviour for non-integer k.
inline std::vector<SimplexNode> simplex_rule(int m, int dim, bool sidi) {
  std::vector<SimplexNode> out;
  if (dim == 1) {
    out.push_back({Vector::Ones(1), 1.0});
    return out;
  }
  const GaussRule g = gauss_legendre(m, 0.0, 1.0);
  std::vector<double> a, wa;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    double x = g.nodes[i], w = g.weights[i];
    if (sidi) {
      w *= 1.0 - std::cos(2.0 * std::numbers::pi * x);
      x = x - std::sin(2.0 * std::numbers::pi * x) / (2.0 * std::numbers::pi);
    }
    a.push_back(x);
    wa.push_back(w);
  }
  if (dim == 2) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      Vector t(2);
      t << a[i], 1.0 - a[i];
      out.push_back({t, wa[i]});
    }
    return out;
  }
  if (dim == 3) {
    // Collapsed coordinates t = (a, (1-a) b, (1-a)(1-b)), dt = (1-a) da db.
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < a.size(); ++j) {
        Vector t(3);
        t << a[i], (1.0 - a[i]) * a[j], (1.0 - a[i]) * (1.0 - a[j]);
        out.push_back({t, wa[i] * wa[j] * (1.0 - a[i])});
      }
    }
    return out;
  }
  fail(ErrorKind::unsupported, "deterministic quadrature is limited to N <= 3; use the sampler");
}

/// Generator matrices of all cones, restricted to one chamber when requested.
inline std::vector<Matrix> cone_generators(const RootSystem& rs, const std::optional<ChamberId>& chamber) {
  const int n = rs.dim();
  const Matrix& W = rs.chamber_rays();
  const Matrix& U = rs.complement_basis();
  const int c = static_cast<int>(U.cols());
  std::vector<const GroupElement*> elems;
  if (chamber) {
    elems.push_back(&chamber_element(rs, *chamber));
  } else {
    for (const auto& g : rs.group()) elems.push_back(&g);
  }
  std::vector<Matrix> out;
  for (const auto* g : elems) {
    for (int mask = 0; mask < (1 << c); ++mask) {
      Matrix V(n, n);
      if (W.cols() > 0) V.leftCols(W.cols()) = g->matrix * W;
      for (int j = 0; j < c; ++j) V.col(W.cols() + j) = ((mask >> j) & 1 ? -1.0 : 1.0) * U.col(j);
      out.push_back(V);
    }
  }
  return out;
}

inline NodeSet raw_node_set(const MeasureSpec& ms, int m, double L) {
  const RootSystem& rs = *ms.rs;
  const int n = rs.dim();
  std::vector<double> powers{2.0 * rs.gamma()};
  if (ms.confined()) powers.push_back(ms.p);
  const int q = smoothing_power(powers);
  const auto radial = radial_rule(m, n, L, q);
  const auto simplex = simplex_rule(m, n, !rs.integer_multiplicities());
  const auto cones = cone_generators(rs, ms.chamber);
  const std::size_t total = cones.size() * simplex.size() * radial.size();
  NodeSet set;
  set.points.resize(n, static_cast<Eigen::Index>(total));
  set.weights.resize(static_cast<Eigen::Index>(total));
  Eigen::Index idx = 0;
  for (const auto& V : cones) {
    const double detV = std::abs(V.determinant());
    for (const auto& s : simplex) {
      const Vector y = V * s.t;
      const double ny = y.norm();
      const Vector dir = y / ny;
      const double ang = s.w * detV * std::pow(ny, -n);
      for (const auto& rn : radial) {
        const Vector x = rn.r * dir;
        double w = ang * rn.w * weight(rs, x);
        if (ms.confined()) w *= std::exp(-std::pow(rn.r, ms.p));
        set.points.col(idx) = x;
        set.weights(idx) = w;
        ++idx;
      }
    }
  }
  return set;
}

}  // namespace detail

/// Builds the grid at resolution m (Gauss nodes per axis per panel) together
/// with its companion at ceil(m/2).
inline QuadratureGrid build_grid(const MeasureSpec& ms, int resolution = 0) {
  validate(ms);
  const RootSystem& rs = *ms.rs;
  if (rs.dim() > 3) fail(ErrorKind::unsupported, "deterministic quadrature is limited to N <= 3; use the sampler");
  QuadratureGrid g;
  g.spec = ms;
  g.resolution = resolution > 0 ? resolution : default_resolution(rs);
  g.truncation_radius = truncation_radius(ms);
  g.est_tail = tail_fraction(ms, g.truncation_radius);
  g.fine = detail::raw_node_set(ms, g.resolution, g.truncation_radius);
  g.coarse = detail::raw_node_set(ms, (g.resolution + 1) / 2, g.truncation_radius);
  auto mass_of = [&](const NodeSet& s) {
    if (ms.variant == MeasureVariant::mu_k) return 1.0;
    if (ms.variant == MeasureVariant::ball) return ms.normalized ? detail::pairwise_sum(s.weights) : 1.0;
    if (!ms.normalized) return 1.0;
    return detail::pairwise_sum(s.weights) / (1.0 - g.est_tail);
  };
  g.mass = mass_of(g.fine);
  g.coarse_mass = mass_of(g.coarse);
  if (!(g.mass > 0.0) || !(g.coarse_mass > 0.0)) fail(ErrorKind::non_convergence, "measure has no mass on the grid");
  g.fine.weights /= g.mass;
  g.coarse.weights /= g.coarse_mass;
  if (ms.variant == MeasureVariant::mu_U_chamber) {
    g.spec.Z_H = g.mass;
  } else if (ms.confined() && ms.normalized) {
    g.spec.Z = g.mass;
  }
  return g;
}

struct Integral {
  double value = 0.0;
  double err = 0.0;
};

namespace detail {

template <class F>
double integrate_set(const NodeSet& s, F&& f) {
  Eigen::VectorXd terms(s.weights.size());
  for (Eigen::Index j = 0; j < s.weights.size(); ++j) {
    const Vector x = s.points.col(j);
    const double v = f(x);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "integrand is not finite at node (" << x.transpose() << ")";
      fail(ErrorKind::evaluation_error, os.str());
    }
    terms(j) = s.weights(j) * v;
  }
  return pairwise_sum(terms);
}

}  // namespace detail

/// Value at the grid resolution; err = |I_m - I_{ceil(m/2)}| + tail estimate.
template <class F>
Integral integrate_fn(const QuadratureGrid& grid, F&& f) {
  const double fine = detail::integrate_set(grid.fine, f);
  const double coarse = detail::integrate_set(grid.coarse, f);
  return {fine, std::abs(fine - coarse) + grid.est_tail * std::abs(fine)};
}

inline Integral integrate(const QuadratureGrid& grid, const ScalarField& f) {
  return integrate_fn(grid, [&](const Vector& x) { return f(x); });
}

inline Integral integrate(const QuadratureGrid& grid, const Polynomial& p) {
  const CompiledPolynomial c(p);
  return integrate_fn(grid, [&](const Vector& x) { return c(x); });
}

/// Normalizing constant (Z, Z_H or mu_k(B_R)); must agree to 1e-6 relative
/// between resolutions m and 2m.
inline double normalization(const MeasureSpec& ms, int resolution = 0) {
  validate(ms);
  if (ms.variant == MeasureVariant::mu_k) fail(ErrorKind::invalid_argument, "mu_k is not a finite measure");
  MeasureSpec spec = ms;
  spec.normalized = true;
  const int m = resolution > 0 ? resolution : default_resolution(*ms.rs);
  const double a = build_grid(spec, m).mass;
  const double b = build_grid(spec, 2 * m).mass;
  if (std::abs(a - b) > 1e-6 * std::abs(b)) {
    std::ostringstream os;
    os.precision(17);
    os << "normalization did not stabilize: " << a << " (m=" << m << ") vs " << b << " (m=" << 2 * m << ")";
    fail(ErrorKind::non_convergence, os.str());
  }
  return b;
}

struct IbpResult {
  double residual = 0.0;
  double err = 0.0;
  /// Larger of the two integrals in absolute value, for relative comparisons.
  double scale = 0.0;
};

/// |int T_i(f) G dmu_k + int f T_i(G) dmu_k| with G = g e^{-|x|^2}, using
/// T_i(G) = e^{-|x|^2} (T_i g - 2 x_i g) since e^{-|x|^2} is G-invariant.
inline IbpResult ibp_residual(const RootSystem& rs, int i, const Polynomial& f, const Polynomial& g,
                              const QuadratureGrid& grid) {
  if (grid.spec.variant != MeasureVariant::mu_k) fail(ErrorKind::invalid_argument, "ibp_residual needs a mu_k grid");
  const CompiledPolynomial cf(f), cg(g), tf(apply_T_poly(rs, i, f)), tg(apply_T_poly(rs, i, g));
  const Integral a = integrate_fn(grid, [&](const Vector& x) { return tf(x) * cg(x) * std::exp(-x.squaredNorm()); });
  const Integral b = integrate_fn(grid, [&](const Vector& x) {
    return cf(x) * (tg(x) - 2.0 * x(i) * cg(x)) * std::exp(-x.squaredNorm());
  });
  return {std::abs(a.value + b.value), a.err + b.err, std::max(std::abs(a.value), std::abs(b.value))};
}

// Grid cache: one JSON file per (root system hash, variant, L, resolution).

inline std::string grid_cache_key(const MeasureSpec& ms, int resolution) {
  nlohmann::json j;
  j["rs"] = hash(*ms.rs);
  j["variant"] = to_string(ms.variant);
  j["p"] = ms.p;
  j["radius"] = ms.radius;
  j["normalized"] = ms.normalized;
  j["L"] = truncation_radius(ms);
  j["resolution"] = resolution > 0 ? resolution : default_resolution(*ms.rs);
  j["chamber"] = ms.chamber ? ms.chamber->signs : std::vector<int>{};
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

namespace detail {

inline nlohmann::json node_set_json(const NodeSet& s) {
  return {{"points", std::vector<double>(s.points.data(), s.points.data() + s.points.size())},
          {"weights", std::vector<double>(s.weights.data(), s.weights.data() + s.weights.size())}};
}

inline NodeSet node_set_from_json(const nlohmann::json& j, int dim) {
  const auto pts = j.at("points").get<std::vector<double>>();
  const auto w = j.at("weights").get<std::vector<double>>();
  if (pts.size() != w.size() * static_cast<std::size_t>(dim)) fail(ErrorKind::io_error, "corrupt grid cache entry");
  NodeSet s;
  s.points = Eigen::Map<const Matrix>(pts.data(), dim, static_cast<Eigen::Index>(w.size()));
  s.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  return s;
}

}  // namespace detail

inline std::filesystem::path save_grid(const QuadratureGrid& g, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto path = dir / ("grid-" + grid_cache_key(g.spec, g.resolution) + ".json");
  nlohmann::json j;
  j["key"] = grid_cache_key(g.spec, g.resolution);
  j["resolution"] = g.resolution;
  j["truncation_radius"] = g.truncation_radius;
  j["est_tail"] = g.est_tail;
  j["mass"] = g.mass;
  j["coarse_mass"] = g.coarse_mass;
  j["fine"] = detail::node_set_json(g.fine);
  j["coarse"] = detail::node_set_json(g.coarse);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) fail(ErrorKind::io_error, "cannot write " + tmp);
    out << j.dump();
  }
  std::filesystem::rename(tmp, path);
  return path;
}

inline std::optional<QuadratureGrid> load_grid(const MeasureSpec& ms, int resolution, const std::filesystem::path& dir) {
  const std::string key = grid_cache_key(ms, resolution);
  const auto path = dir / ("grid-" + key + ".json");
  std::ifstream in(path);
  if (!in) return std::nullopt;
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
  if (j.value("key", std::string{}) != key) return std::nullopt;
  QuadratureGrid g;
  g.spec = ms;
  g.resolution = j.at("resolution").get<int>();
  g.truncation_radius = j.at("truncation_radius").get<double>();
  g.est_tail = j.at("est_tail").get<double>();
  g.mass = j.at("mass").get<double>();
  g.coarse_mass = j.at("coarse_mass").get<double>();
  g.fine = detail::node_set_from_json(j.at("fine"), ms.rs->dim());
  g.coarse = detail::node_set_from_json(j.at("coarse"), ms.rs->dim());
  if (ms.variant == MeasureVariant::mu_U_chamber) {
    g.spec.Z_H = g.mass;
  } else if (ms.confined() && ms.normalized) {
    g.spec.Z = g.mass;
  }
  return g;
}

/// Loads from the cache when present, otherwise builds and stores.
inline QuadratureGrid cached_grid(const MeasureSpec& ms, int resolution, const std::optional<std::filesystem::path>& dir) {
  if (dir) {
    if (auto g = load_grid(ms, resolution, *dir)) return *g;
  }
  QuadratureGrid g = build_grid(ms, resolution);
  if (dir) save_grid(g, *dir);
  return g;
}

}  // namespace dunkl
