#pragma once

// Test-function suites and their tabulation on an estimator's point cloud.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dunkl/dunkl_ops.hpp"
#include "dunkl/error.hpp"
#include "dunkl/estimator.hpp"
#include "dunkl/polynomial.hpp"
#include "dunkl/scalar_field.hpp"

namespace dunkl {

/// rho(t) with t = |x|^2. Radial factors are G-invariant, so
/// T_i(q rho) = rho T_i q + 2 x_i rho'(t) q.
struct RadialFactor {
  enum class Kind { one, gaussian, bump, outside_ball };
  Kind kind = Kind::one;
  /// gaussian: rate a in e^{-a t}; bump: support radius R.
  double param = 0.0;

  static RadialFactor one() { return {}; }
  static RadialFactor gaussian(double a) { return {Kind::gaussian, a}; }
  /// exp(-u / (1 - u)), u = t / R^2, supported on |x| < R.
  static RadialFactor bump(double R) { return {Kind::bump, R}; }
  /// (t - 1)^3 for |x| > 1, zero on the unit ball.
  static RadialFactor outside_ball() { return {Kind::outside_ball, 1.0}; }

  double value(double t) const {
    switch (kind) {
      case Kind::one: return 1.0;
      case Kind::gaussian: return std::exp(-param * t);
      case Kind::bump: {
        const double u = t / (param * param);
        return u < 1.0 ? std::exp(-u / (1.0 - u)) : 0.0;
      }
      case Kind::outside_ball: return t > 1.0 ? (t - 1.0) * (t - 1.0) * (t - 1.0) : 0.0;
    }
    return 1.0;
  }

  /// d rho / dt
  double derivative(double t) const {
    switch (kind) {
      case Kind::one: return 0.0;
      case Kind::gaussian: return -param * std::exp(-param * t);
      case Kind::bump: {
        const double u = t / (param * param);
        if (u >= 1.0) return 0.0;
        return -value(t) / ((1.0 - u) * (1.0 - u) * param * param);
      }
      case Kind::outside_ball: return t > 1.0 ? 3.0 * (t - 1.0) * (t - 1.0) : 0.0;
    }
    return 0.0;
  }

  std::string name() const {
    switch (kind) {
      case Kind::one: return "";
      case Kind::gaussian: return "exp(-" + std::to_string(param) + "|x|^2)";
      case Kind::bump: return "bump(R=" + std::to_string(param) + ")";
      case Kind::outside_ball: return "(|x|^2-1)_+^3";
    }
    return "";
  }
};

/// Either q * rho with q an exact polynomial, or a general field.
struct BasisMember {
  std::string name;
  std::optional<Polynomial> poly;
  RadialFactor rho;
  std::optional<ScalarField> field;
  bool g_invariant = false;

  static BasisMember polynomial(Polynomial q, RadialFactor rho = {}, std::string name = {}) {
    BasisMember m;
    m.name = name.empty() ? q.to_string() : std::move(name);
    if (rho.kind != RadialFactor::Kind::one) m.name = "(" + m.name + ")*" + rho.name();
    m.poly = std::move(q);
    m.rho = rho;
    return m;
  }
  static BasisMember from_field(ScalarField f) {
    BasisMember m;
    m.name = f.name;
    m.g_invariant = f.g_invariant;
    m.field = std::move(f);
    return m;
  }
};

struct FunctionBasis {
  std::vector<BasisMember> members;
  bool g_invariant_only = false;

  std::size_t size() const { return members.size(); }
  bool empty() const { return members.empty(); }
  void add(BasisMember m) { members.push_back(std::move(m)); }
  void append(const FunctionBasis& o) { members.insert(members.end(), o.members.begin(), o.members.end()); }
  FunctionBasis prefix(std::size_t n) const {
    FunctionBasis b;
    b.g_invariant_only = g_invariant_only;
    b.members.assign(members.begin(), members.begin() + static_cast<std::ptrdiff_t>(std::min(n, members.size())));
    return b;
  }
};

/// Physicists' Hermite polynomial H_n in variable i.
inline Polynomial hermite_1d(int dim, int i, int n) {
  Polynomial h0 = Polynomial::constant(dim, 1);
  if (n == 0) return h0;
  const Polynomial x = Polynomial::variable(dim, i);
  Polynomial h1 = x * Rational(2);
  for (int j = 1; j < n; ++j) {
    Polynomial h2 = x * h1 * Rational(2) - h0 * Rational(2 * j);
    h0 = std::move(h1);
    h1 = std::move(h2);
  }
  return h1;
}

/// Multi-indices of total degree <= d, ordered by degree.
inline std::vector<Exponent> multi_indices(int dim, int d) {
  std::vector<Exponent> out;
  for (int total = 0; total <= d; ++total) {
    Exponent e(static_cast<std::size_t>(dim), 0);
    std::function<void(int, int)> rec = [&](int pos, int left) {
      if (pos == dim - 1) {
        e[static_cast<std::size_t>(pos)] = left;
        out.push_back(e);
        return;
      }
      for (int v = left; v >= 0; --v) {
        e[static_cast<std::size_t>(pos)] = v;
        rec(pos + 1, left - v);
      }
    };
    rec(0, total);
  }
  return out;
}

/// Tensor Hermite products prod_j H_{e_j}(x_j) of total degree <= d, times rho.
inline FunctionBasis hermite_basis(int dim, int degree, RadialFactor rho = {}) {
  if (degree < 0) fail(ErrorKind::invalid_argument, "basis degree must be nonnegative");
  FunctionBasis b;
  for (const auto& e : multi_indices(dim, degree)) {
    Polynomial q = Polynomial::constant(dim, 1);
    std::string name = "H(";
    for (int j = 0; j < dim; ++j) {
      if (e[static_cast<std::size_t>(j)] > 0) q = q * hermite_1d(dim, j, e[static_cast<std::size_t>(j)]);
      name += (j ? "," : "") + std::to_string(e[static_cast<std::size_t>(j)]);
    }
    b.add(BasisMember::polynomial(std::move(q), rho, name + ")"));
  }
  return b;
}

/// Degree 6 up to two dimensions, 4 in three, 2 beyond.
inline int default_basis_degree(int dim) { return dim <= 2 ? 6 : (dim == 3 ? 4 : 2); }

/// (1/|G|) sum_g q(g x); requires group matrices with rational entries.
inline Polynomial symmetrize(const RootSystem& rs, const Polynomial& q) {
  Polynomial acc(q.dim());
  for (const auto& g : rs.group()) {
    RationalMatrix m(static_cast<std::size_t>(rs.dim()), RationalVector(static_cast<std::size_t>(rs.dim())));
    for (int i = 0; i < rs.dim(); ++i) {
      for (int j = 0; j < rs.dim(); ++j) {
        auto r = rationalize(g.matrix(i, j));
        if (!r) fail(ErrorKind::exactness_unavailable, "group element has irrational entries");
        m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = *r;
      }
    }
    acc += q.compose_linear(m);
  }
  return acc * Rational(1, static_cast<long>(rs.group().size()));
}

/// G-invariant members obtained by symmetrizing, keeping a linearly independent subset.
inline FunctionBasis invariant_basis(const RootSystem& rs, const FunctionBasis& b, std::uint64_t seed = 7) {
  FunctionBasis out;
  out.g_invariant_only = true;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const int probes = 400;
  Matrix pts(rs.dim(), probes);
  for (int j = 0; j < probes; ++j) {
    for (int i = 0; i < rs.dim(); ++i) pts(i, j) = normal(rng);
  }
  Matrix kept(probes, 0);
  for (const auto& m : b.members) {
    if (!m.poly) continue;
    Polynomial s = symmetrize(rs, *m.poly);
    if (s.is_zero()) continue;
    const CompiledPolynomial c(s);
    Eigen::VectorXd v(probes);
    for (int j = 0; j < probes; ++j) v(j) = c(Vector(pts.col(j)));
    Matrix trial(probes, kept.cols() + 1);
    trial << kept, v;
    Eigen::ColPivHouseholderQR<Matrix> qr(trial);
    qr.setThreshold(1e-9);
    if (qr.rank() <= kept.cols()) continue;
    kept = trial;
    BasisMember im = BasisMember::polynomial(s, m.rho, "sym" + m.name);
    im.g_invariant = true;
    out.add(std::move(im));
  }
  return out;
}

/// e^{<c,x>/2}; its square is the exponential tilt e^{<c,x>}.
inline ScalarField exponential_tilt(const Vector& c) {
  ScalarField f;
  std::ostringstream os;
  os << "exp(<c,x>/2), c=(" << c.transpose() << ")";
  f.name = os.str();
  f.value = [c](const Vector& x) { return std::exp(0.5 * c.dot(x)); };
  f.gradient = [c](const Vector& x) { return Vector(0.5 * c * std::exp(0.5 * c.dot(x))); };
  return f;
}

/// e^{s|x|/2}; G-invariant, the Herbst test function for f = |x|.
inline ScalarField radial_tilt(double s) {
  ScalarField f;
  f.name = "exp(" + std::to_string(s) + "|x|/2)";
  f.value = [s](const Vector& x) { return std::exp(0.5 * s * x.norm()); };
  f.gradient = [s](const Vector& x) {
    const double r = x.norm();
    if (r == 0.0) return Vector(Vector::Zero(x.size()));
    return Vector(0.5 * s * std::exp(0.5 * s * r) * x / r);
  };
  f.g_invariant = true;
  return f;
}

/// Columns: values, Dunkl and classical gradients, and values at sigma_alpha x,
/// one row per point of the estimator's cloud.
struct Tabulation {
  const MeasureEstimator* me = nullptr;
  std::vector<std::string> names;
  std::vector<bool> invariant;
  Matrix V;
  std::vector<Matrix> D;
  std::vector<Matrix> G;
  std::vector<Matrix> R;

  Eigen::Index rows() const { return V.rows(); }
  Eigen::Index members() const { return V.cols(); }
  bool has_dunkl() const { return !D.empty(); }
  bool has_classical() const { return !G.empty(); }
  bool has_reflected() const { return !R.empty(); }
};

struct TabulationOptions {
  bool dunkl = true;
  bool classical = false;
  bool reflected = false;
};

namespace detail {

inline void tabulate_polynomial(const RootSystem& rs, const BasisMember& m, const Matrix& pts,
                                const std::vector<Eigen::MatrixXd>& powers, const std::vector<std::vector<Eigen::MatrixXd>>& refl_powers,
                                const TabulationOptions& opt, Tabulation& t, Eigen::Index col) {
  const int N = rs.dim();
  const Polynomial& q = *m.poly;
  const Eigen::Index n = pts.cols();
  const Eigen::ArrayXd tt = pts.colwise().squaredNorm().transpose().array();
  Eigen::ArrayXd rho(n), drho(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    rho(j) = m.rho.value(tt(j));
    drho(j) = m.rho.derivative(tt(j));
  }
  const Eigen::ArrayXd qv = CompiledPolynomial(q).evaluate_many(powers).array();
  t.V.col(col) = (qv * rho).matrix();
  if (opt.classical) {
    for (int i = 0; i < N; ++i) {
      const Eigen::ArrayXd di = CompiledPolynomial(q.derivative(i)).evaluate_many(powers).array();
      t.G[static_cast<std::size_t>(i)].col(col) = (di * rho + 2.0 * pts.row(i).transpose().array() * drho * qv).matrix();
    }
  }
  if (opt.dunkl) {
    std::optional<std::vector<Polynomial>> tq;
    try {
      tq = dunkl_gradient(rs, q);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::exactness_unavailable) throw;
    }
    for (int i = 0; i < N; ++i) {
      Eigen::ArrayXd ti(n);
      if (tq) {
        ti = CompiledPolynomial((*tq)[static_cast<std::size_t>(i)]).evaluate_many(powers).array();
      } else {
        const ScalarField f = field_from_polynomial(q);
        for (Eigen::Index j = 0; j < n; ++j) ti(j) = apply_T_numeric(rs, i, f, Vector(pts.col(j)));
      }
      t.D[static_cast<std::size_t>(i)].col(col) = (ti * rho + 2.0 * pts.row(i).transpose().array() * drho * qv).matrix();
    }
  }
  if (opt.reflected) {
    const CompiledPolynomial cq(q);
    for (std::size_t a = 0; a < rs.size(); ++a) {
      t.R[a].col(col) = (cq.evaluate_many(refl_powers[a]).array() * rho).matrix();
    }
  }
}

inline void tabulate_field(const RootSystem& rs, const ScalarField& f, const Matrix& pts, const TabulationOptions& opt,
                           Tabulation& t, Eigen::Index col) {
  const int N = rs.dim();
  for (Eigen::Index j = 0; j < pts.cols(); ++j) {
    const Vector x = pts.col(j);
    t.V(j, col) = f(x);
    if (opt.classical) {
      const Vector g = f.grad(x);
      for (int i = 0; i < N; ++i) t.G[static_cast<std::size_t>(i)](j, col) = g(i);
    }
    if (opt.dunkl) {
      const Vector d = dunkl_gradient(rs, f, x);
      for (int i = 0; i < N; ++i) t.D[static_cast<std::size_t>(i)](j, col) = d(i);
    }
    if (opt.reflected) {
      for (std::size_t a = 0; a < rs.size(); ++a) t.R[a](j, col) = f(rs.reflect_by(a, x));
    }
  }
}

}  // namespace detail

inline Tabulation tabulate(const FunctionBasis& basis, const MeasureEstimator& me, const TabulationOptions& opt = {}) {
  if (basis.empty()) fail(ErrorKind::degenerate_basis, "empty basis");
  const RootSystem& rs = me.root_system();
  const Matrix& pts = me.points();
  const Eigen::Index n = pts.cols();
  const auto M = static_cast<Eigen::Index>(basis.size());
  Tabulation t;
  t.me = &me;
  t.V.resize(n, M);
  if (opt.dunkl) t.D.assign(static_cast<std::size_t>(rs.dim()), Matrix(n, M));
  if (opt.classical) t.G.assign(static_cast<std::size_t>(rs.dim()), Matrix(n, M));
  if (opt.reflected) t.R.assign(rs.size(), Matrix(n, M));
  int max_deg = 1;
  for (const auto& m : basis.members) {
    if (m.poly) max_deg = std::max(max_deg, m.poly->degree());
  }
  const auto powers = power_table(pts, max_deg);
  std::vector<std::vector<Eigen::MatrixXd>> refl_powers;
  if (opt.reflected) {
    for (std::size_t a = 0; a < rs.size(); ++a) refl_powers.push_back(power_table(rs.reflection_matrix(a) * pts, max_deg));
  }
  for (Eigen::Index c = 0; c < M; ++c) {
    const auto& m = basis.members[static_cast<std::size_t>(c)];
    t.names.push_back(m.name);
    t.invariant.push_back(m.g_invariant);
    if (m.poly) {
      detail::tabulate_polynomial(rs, m, pts, powers, refl_powers, opt, t, c);
    } else if (m.field) {
      detail::tabulate_field(rs, *m.field, pts, opt, t, c);
    } else {
      fail(ErrorKind::invalid_argument, "basis member '" + m.name + "' is empty");
    }
  }
  if (!t.V.allFinite()) fail(ErrorKind::evaluation_error, "basis values are not finite on the point cloud");
  return t;
}

/// Pointwise data of one test function f = sum_j c_j b_j (or a composite of it).
struct FieldValues {
  Eigen::VectorXd f;
  Matrix dgrad;  // n x N, Dunkl
  Matrix cgrad;  // n x N, classical
};

inline FieldValues combine(const Tabulation& t, const Eigen::VectorXd& c) {
  FieldValues out;
  out.f = t.V * c;
  if (t.has_dunkl()) {
    out.dgrad.resize(t.rows(), static_cast<Eigen::Index>(t.D.size()));
    for (std::size_t i = 0; i < t.D.size(); ++i) out.dgrad.col(static_cast<Eigen::Index>(i)) = t.D[i] * c;
  }
  if (t.has_classical()) {
    out.cgrad.resize(t.rows(), static_cast<Eigen::Index>(t.G.size()));
    for (std::size_t i = 0; i < t.G.size(); ++i) out.cgrad.col(static_cast<Eigen::Index>(i)) = t.G[i] * c;
  }
  return out;
}

inline Eigen::VectorXd unit_vector(Eigen::Index n, Eigen::Index j) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e(j) = 1.0;
  return e;
}

/// F = phi(q) * rho(|x|^2) for q = sum_j c_j b_j. Needs classical gradients and
/// reflected values; the Dunkl gradient is assembled from the definition.
template <class Phi, class DPhi>
FieldValues compose(const Tabulation& t, const Eigen::VectorXd& c, Phi phi, DPhi dphi, RadialFactor rho = {}) {
  if (!t.has_classical() || !t.has_reflected()) {
    fail(ErrorKind::invalid_argument, "composite test functions need classical gradients and reflected values");
  }
  const RootSystem& rs = t.me->root_system();
  const Matrix& pts = t.me->points();
  const int N = rs.dim();
  const Eigen::Index n = t.rows();
  const Eigen::VectorXd q = t.V * c;
  Matrix gq(n, N);
  for (int i = 0; i < N; ++i) gq.col(i) = t.G[static_cast<std::size_t>(i)] * c;
  std::vector<Eigen::VectorXd> qr;
  for (const auto& R : t.R) qr.push_back(R * c);
  FieldValues out;
  out.f.resize(n);
  out.cgrad.resize(n, N);
  out.dgrad.resize(n, N);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Vector x = pts.col(j);
    const double tt = x.squaredNorm();
    const double r = rho.value(tt), dr = rho.derivative(tt);
    const double pq = phi(q(j)), dpq = dphi(q(j));
    out.f(j) = pq * r;
    for (int i = 0; i < N; ++i) {
      const double gi = dpq * gq(j, i) * r + pq * dr * 2.0 * x(i);
      out.cgrad(j, i) = gi;
      out.dgrad(j, i) = gi;
    }
    for (std::size_t a = 0; a < rs.size(); ++a) {
      const double k = rs.multiplicity(a);
      if (k == 0.0) continue;
      const Vector& alpha = rs.positive_roots()[a];
      const double ax = alpha.dot(x);
      double quot;
      if (on_wall(rs, x, a)) {
        quot = dpq * gq.row(j).dot(alpha) * r;
      } else {
        quot = (pq - phi(qr[a](j))) * r / ax;
      }
      for (int i = 0; i < N; ++i) out.dgrad(j, i) += k * alpha(i) * quot;
    }
  }
  return out;
}

/// Gram matrix int b_a b_b on the primary set.
inline Matrix gram(const Tabulation& t) {
  const auto& s = t.me->set(0);
  const Matrix Vs = t.V.middleRows(s.begin, s.size);
  return Vs.transpose() * s.weights.asDiagonal() * Vs;
}

inline double condition_number(const Matrix& g) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

/// Random coefficient vectors with int f^2 = 1 on the primary set, drawn
/// uniformly on the unit sphere of the (numerically nondegenerate) span.
inline std::vector<Eigen::VectorXd> random_unit_combinations(const Tabulation& t, int count, std::uint64_t seed) {
  const Matrix g = gram(t);
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  const Eigen::VectorXd& lam = es.eigenvalues();
  const double cut = 1e-12 * lam.maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) > cut) keep.push_back(i);
  }
  if (keep.empty()) fail(ErrorKind::degenerate_basis, "basis has no mass on the measure");
  Matrix W(g.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    W.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]) / std::sqrt(lam(keep[j]));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<Eigen::VectorXd> out;
  for (int k = 0; k < count; ++k) {
    Eigen::VectorXd z(W.cols());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    z.normalize();
    out.push_back(W * z);
  }
  return out;
}

}  // namespace dunkl
