#pragma once

// Root systems, their reflection groups, Weyl chambers and the Dunkl weight.
//
// Roots are stored normalized to |alpha|^2 = 2. Multiplicities are stored per
// G-orbit of roots, so G-invariance of k holds by construction.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dunkl/error.hpp"
#include "dunkl/rational.hpp"

namespace dunkl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// |<alpha,x>| below this fraction of |x| counts as lying on a wall.
inline constexpr double kWallTolerance = 1e-10;
/// Entry-wise tolerance used to identify two group matrices.
inline constexpr double kGroupDedupTolerance = 1e-10;
inline constexpr std::size_t kGroupIterationCap = 1000000;

struct GroupElement {
  Matrix matrix;
  std::vector<int> word;  // indices into RootSystem::simple_roots(), applied right to left
};

struct ChamberId {
  std::vector<int> signs;  // sign of <alpha,x> for each positive root, in order

  friend bool operator==(const ChamberId&, const ChamberId&) = default;
  friend auto operator<=>(const ChamberId&, const ChamberId&) = default;
};

class RootSystem;
RootSystem build_custom(const std::vector<Vector>& positive_roots, const std::vector<double>& per_root_k,
                        std::string label = "custom");

class RootSystem {
 public:
  int dim() const { return dim_; }
  int rank() const { return static_cast<int>(simple_.size()); }
  const std::string& label() const { return label_; }

  const std::vector<Vector>& positive_roots() const { return roots_; }
  std::size_t size() const { return roots_.size(); }

  /// k_alpha for the i-th positive root.
  double multiplicity(std::size_t i) const { return orbit_k_[orbit_of_[i]]; }
  std::vector<double> multiplicities() const {
    std::vector<double> k(roots_.size());
    for (std::size_t i = 0; i < roots_.size(); ++i) k[i] = multiplicity(i);
    return k;
  }
  int orbit_of(std::size_t i) const { return orbit_of_[i]; }
  int orbit_count() const { return static_cast<int>(orbit_k_.size()); }
  double orbit_multiplicity(int orbit) const { return orbit_k_.at(static_cast<std::size_t>(orbit)); }

  double gamma() const { return gamma_; }
  /// N + 2*gamma, the homogeneous dimension of mu_k.
  double homogeneous_dim() const { return dim_ + 2.0 * gamma_; }
  bool trivial_multiplicity() const {
    return std::all_of(orbit_k_.begin(), orbit_k_.end(), [](double k) { return k == 0.0; });
  }
  bool integer_multiplicities() const {
    return std::all_of(orbit_k_.begin(), orbit_k_.end(), [](double k) { return std::floor(k) == k; });
  }

  /// Indices (into positive_roots) of the simple roots of the positive system.
  const std::vector<std::size_t>& simple_roots() const { return simple_; }
  const std::vector<GroupElement>& group() const { return group_; }

  /// Unit-length extremal rays of the fundamental chamber restricted to span(R), N x rank.
  const Matrix& chamber_rays() const { return rays_; }
  /// Orthonormal basis of span(R)^perp, N x (N - rank).
  const Matrix& complement_basis() const { return complement_; }

  /// Rational direction proportional to the i-th root, when one exists.
  const std::optional<std::vector<Rational>>& exact_direction(std::size_t i) const { return exact_dir_[i]; }
  std::optional<Rational> exact_multiplicity(std::size_t i) const { return rationalize(multiplicity(i)); }

  Vector reflect_by(std::size_t i, const Vector& x) const {
    const Vector& a = roots_[i];
    return x - a.dot(x) * a;  // |a|^2 = 2
  }
  Matrix reflection_matrix(std::size_t i) const {
    const Vector& a = roots_[i];
    return Matrix::Identity(dim_, dim_) - a * a.transpose();
  }

  /// Index of the positive root equal to +-alpha (after normalization), if any.
  std::optional<std::size_t> find_root(const Vector& alpha) const {
    if (alpha.size() != dim_ || alpha.norm() == 0.0) return std::nullopt;
    const Vector a = alpha * (std::sqrt(2.0) / alpha.norm());
    for (std::size_t i = 0; i < roots_.size(); ++i) {
      if ((roots_[i] - a).norm() < 1e-9 || (roots_[i] + a).norm() < 1e-9) return i;
    }
    return std::nullopt;
  }

  friend RootSystem build_custom(const std::vector<Vector>&, const std::vector<double>&, std::string);

 private:
  RootSystem() = default;

  int dim_ = 0;
  std::string label_;
  std::vector<Vector> roots_;
  std::vector<int> orbit_of_;
  std::vector<double> orbit_k_;
  double gamma_ = 0.0;
  std::vector<std::size_t> simple_;
  std::vector<GroupElement> group_;
  Matrix rays_;
  Matrix complement_;
  std::vector<std::optional<std::vector<Rational>>> exact_dir_;
};

namespace detail {

inline bool contains_vector(const std::vector<Vector>& set, const Vector& v, double tol = 1e-9) {
  return std::any_of(set.begin(), set.end(), [&](const Vector& w) { return (w - v).norm() < tol; });
}

inline std::optional<std::vector<Rational>> rational_direction(const Vector& a) {
  Eigen::Index imax = 0;
  a.cwiseAbs().maxCoeff(&imax);
  const Vector v = a / a(imax);
  std::vector<Rational> out(static_cast<std::size_t>(a.size()));
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    auto q = rationalize(v(j), 10000, 1e-12);
    if (!q) return std::nullopt;
    out[static_cast<std::size_t>(j)] = *q;
  }
  return out;
}

inline std::vector<GroupElement> generate_from(const std::vector<Matrix>& generators, int dim,
                                               std::size_t cap) {
  std::vector<GroupElement> elements;
  elements.push_back({Matrix::Identity(dim, dim), {}});
  std::deque<std::size_t> queue{0};
  std::size_t iterations = 0;
  auto find = [&](const Matrix& m) {
    for (const auto& e : elements) {
      if ((e.matrix - m).cwiseAbs().maxCoeff() < kGroupDedupTolerance) return true;
    }
    return false;
  };
  while (!queue.empty()) {
    const std::size_t cur = queue.front();
    queue.pop_front();
    for (std::size_t s = 0; s < generators.size(); ++s) {
      if (++iterations > cap) {
        fail(ErrorKind::group_generation_failure,
             "closure not reached within " + std::to_string(cap) + " iterations");
      }
      Matrix next = generators[s] * elements[cur].matrix;
      if (find(next)) continue;
      std::vector<int> word = elements[cur].word;
      word.insert(word.begin(), static_cast<int>(s));
      elements.push_back({std::move(next), std::move(word)});
      queue.push_back(elements.size() - 1);
    }
  }
  return elements;
}

}  // namespace detail

/// Builds and validates a root system from a list of positive roots and one
/// multiplicity per listed root. Roots are rescaled to |alpha|^2 = 2.
inline RootSystem build_custom(const std::vector<Vector>& positive_roots, const std::vector<double>& per_root_k,
                               std::string label) {
  if (positive_roots.empty()) fail(ErrorKind::not_a_root_system, "no roots given");
  const Eigen::Index n = positive_roots.front().size();
  if (n < 1) fail(ErrorKind::invalid_dimension, "roots must have dimension >= 1");
  if (per_root_k.size() != positive_roots.size()) {
    fail(ErrorKind::invalid_multiplicity, "expected one multiplicity per positive root");
  }
  for (double k : per_root_k) {
    if (!(k >= 0.0) || !std::isfinite(k)) fail(ErrorKind::invalid_multiplicity, "multiplicities must be finite and >= 0");
  }

  std::vector<Vector> roots;
  for (const auto& r : positive_roots) {
    if (r.size() != n) fail(ErrorKind::invalid_dimension, "roots have inconsistent dimensions");
    const double norm = r.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) fail(ErrorKind::not_a_root_system, "zero or non-finite root");
    roots.push_back(r * (std::sqrt(2.0) / norm));
  }

  // R cap alpha*R = {alpha, -alpha}: no two listed roots may be parallel.
  for (std::size_t i = 0; i < roots.size(); ++i) {
    for (std::size_t j = i + 1; j < roots.size(); ++j) {
      if ((roots[i] - roots[j]).norm() < 1e-9 || (roots[i] + roots[j]).norm() < 1e-9) {
        fail(ErrorKind::not_a_root_system, "roots " + std::to_string(i) + " and " + std::to_string(j) + " are parallel");
      }
    }
  }

  std::vector<Vector> full = roots;
  for (const auto& r : roots) full.push_back(-r);

  for (const auto& a : full) {
    for (const auto& b : full) {
      const Vector img = b - a.dot(b) * a;
      if (!detail::contains_vector(full, img)) fail(ErrorKind::not_a_root_system, "set is not closed under its reflections");
    }
  }

  // Make the listed half a genuine positive system with respect to some generic z.
  Vector z = Vector::Zero(n);
  for (const auto& r : roots) z += r;
  const bool consistent = std::all_of(roots.begin(), roots.end(), [&](const Vector& r) { return r.dot(z) > 1e-9; });
  if (!consistent) {
    for (Eigen::Index j = 0; j < n; ++j) z(j) = 1.0 + 0.1234567 * static_cast<double>(j + 1) + std::sqrt(2.0 + j) * 1e-3;
    for (auto& r : roots) {
      const double d = r.dot(z);
      if (std::abs(d) < 1e-9) fail(ErrorKind::not_a_root_system, "could not find a generic positive direction");
      if (d < 0) r = -r;
    }
  }

  RootSystem rs;
  rs.dim_ = static_cast<int>(n);
  rs.label_ = std::move(label);
  rs.roots_ = roots;

  auto in_negative = [&](const Vector& v) {
    return std::any_of(roots.begin(), roots.end(), [&](const Vector& r) { return (r + v).norm() < 1e-9; });
  };
  // alpha is simple iff sigma_alpha sends exactly one positive root (itself) to a negative one.
  for (std::size_t i = 0; i < roots.size(); ++i) {
    int flips = 0;
    for (const auto& b : roots) {
      if (in_negative(b - roots[i].dot(b) * roots[i])) ++flips;
    }
    if (flips == 1) rs.simple_.push_back(i);
  }

  std::vector<Matrix> generators;
  for (std::size_t i : rs.simple_) generators.push_back(rs.reflection_matrix(i));
  rs.group_ = detail::generate_from(generators, rs.dim_, kGroupIterationCap);

  // Orbits of positive roots under G (up to sign).
  rs.orbit_of_.assign(roots.size(), -1);
  int orbits = 0;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (rs.orbit_of_[i] >= 0) continue;
    const int id = orbits++;
    for (const auto& g : rs.group_) {
      const Vector img = g.matrix * roots[i];
      for (std::size_t j = 0; j < roots.size(); ++j) {
        if ((roots[j] - img).norm() < 1e-9 || (roots[j] + img).norm() < 1e-9) rs.orbit_of_[j] = id;
      }
    }
  }
  rs.orbit_k_.assign(static_cast<std::size_t>(orbits), -1.0);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    double& k = rs.orbit_k_[static_cast<std::size_t>(rs.orbit_of_[i])];
    if (k < 0) {
      k = per_root_k[i];
    } else if (std::abs(k - per_root_k[i]) > 1e-12 * std::max(1.0, k)) {
      fail(ErrorKind::invalid_multiplicity, "multiplicity is not G-invariant (roots in one orbit differ)");
    }
  }
  rs.gamma_ = 0.0;
  for (std::size_t i = 0; i < roots.size(); ++i) rs.gamma_ += rs.multiplicity(i);

  const Eigen::Index r = static_cast<Eigen::Index>(rs.simple_.size());
  Matrix simple(r, n);
  for (Eigen::Index i = 0; i < r; ++i) simple.row(i) = roots[rs.simple_[static_cast<std::size_t>(i)]].transpose();
  if (r > 0) {
    Matrix rays = simple.transpose() * (simple * simple.transpose()).inverse();
    for (Eigen::Index c = 0; c < rays.cols(); ++c) rays.col(c).normalize();
    rs.rays_ = rays;
  } else {
    rs.rays_ = Matrix(n, 0);
  }
  if (r < n) {
    Eigen::FullPivLU<Matrix> lu(simple);
    Matrix ker = r > 0 ? Matrix(lu.kernel()) : Matrix(Matrix::Identity(n, n));
    Eigen::HouseholderQR<Matrix> qr(ker);
    rs.complement_ = qr.householderQ() * Matrix::Identity(n, ker.cols());
  } else {
    rs.complement_ = Matrix(n, 0);
  }

  rs.exact_dir_.reserve(roots.size());
  for (const auto& a : roots) rs.exact_dir_.push_back(detail::rational_direction(a));
  return rs;
}

/// Per-orbit multiplicities; orbit indices follow the first appearance of an
/// orbit in the positive root list.
inline RootSystem build_custom(const std::vector<Vector>& positive_roots, const std::map<int, double>& per_orbit,
                               std::string label = "custom") {
  RootSystem probe = build_custom(positive_roots, std::vector<double>(positive_roots.size(), 0.0), label);
  std::vector<double> k(positive_roots.size());
  for (std::size_t i = 0; i < k.size(); ++i) {
    auto it = per_orbit.find(probe.orbit_of(i));
    if (it == per_orbit.end()) {
      fail(ErrorKind::invalid_multiplicity, "missing multiplicity for orbit " + std::to_string(probe.orbit_of(i)));
    }
    k[i] = it->second;
  }
  for (const auto& [orbit, value] : per_orbit) {
    if (orbit < 0 || orbit >= probe.orbit_count()) {
      fail(ErrorKind::invalid_multiplicity, "orbit index " + std::to_string(orbit) + " does not exist");
    }
  }
  return build_custom(positive_roots, k, std::move(label));
}

/// A_{N-1} in R^N: R_+ = {e_i - e_j : i < j}.
inline RootSystem build_type_a(int n, double k) {
  if (n < 2) fail(ErrorKind::invalid_dimension, "type A needs N >= 2");
  std::vector<Vector> roots;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Vector a = Vector::Zero(n);
      a(i) = 1.0;
      a(j) = -1.0;
      roots.push_back(a);
    }
  }
  return build_custom(roots, std::vector<double>(roots.size(), k), "A" + std::to_string(n - 1));
}

/// B_N in R^N: sqrt(2) e_i with multiplicity k1, e_i +- e_j with multiplicity k2.
inline RootSystem build_type_b(int n, double k1, double k2) {
  if (n < 2) fail(ErrorKind::invalid_dimension, "type B needs N >= 2");
  std::vector<Vector> roots;
  std::vector<double> k;
  for (int i = 0; i < n; ++i) {
    Vector a = Vector::Zero(n);
    a(i) = std::sqrt(2.0);
    roots.push_back(a);
    k.push_back(k1);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Vector a = Vector::Zero(n);
      a(i) = 1.0;
      a(j) = -1.0;
      roots.push_back(a);
      k.push_back(k2);
      Vector b = Vector::Zero(n);
      b(i) = 1.0;
      b(j) = 1.0;
      roots.push_back(b);
      k.push_back(k2);
    }
  }
  return build_custom(roots, k, "B" + std::to_string(n));
}

/// Rank-one system in R^1 with root sqrt(2).
inline RootSystem build_rank_one(double k) {
  Vector a(1);
  a(0) = std::sqrt(2.0);
  return build_custom({a}, std::vector<double>{k}, "A1");
}

inline Vector reflect(const RootSystem& rs, const Vector& alpha, const Vector& x) {
  if (!rs.find_root(alpha)) fail(ErrorKind::unknown_root, "vector is not a root of this system");
  const Vector a = alpha * (std::sqrt(2.0) / alpha.norm());
  return x - a.dot(x) * a;
}

inline const std::vector<GroupElement>& generate_group(const RootSystem& rs) { return rs.group(); }

inline bool on_wall(const RootSystem& rs, const Vector& x, std::size_t i) {
  return std::abs(rs.positive_roots()[i].dot(x)) < kWallTolerance * x.norm() || x.norm() == 0.0;
}

inline bool off_all_walls(const RootSystem& rs, const Vector& x) {
  for (std::size_t i = 0; i < rs.size(); ++i) {
    if (on_wall(rs, x, i)) return false;
  }
  return true;
}

inline ChamberId chamber_index(const RootSystem& rs, const Vector& x) {
  ChamberId id;
  id.signs.reserve(rs.size());
  for (std::size_t i = 0; i < rs.size(); ++i) {
    if (on_wall(rs, x, i)) fail(ErrorKind::on_wall, "point lies on the wall of root " + std::to_string(i));
    id.signs.push_back(rs.positive_roots()[i].dot(x) > 0 ? 1 : -1);
  }
  return id;
}

/// Chamber containing the positive direction of the positive system.
inline ChamberId fundamental_chamber(const RootSystem& rs) { return ChamberId{std::vector<int>(rs.size(), 1)}; }

/// Group element g with g(H_fundamental) = chamber.
inline const GroupElement& chamber_element(const RootSystem& rs, const ChamberId& chamber) {
  Vector interior = rs.chamber_rays().rowwise().sum();
  for (const auto& g : rs.group()) {
    ChamberId id;
    const Vector y = g.matrix * interior;
    for (std::size_t i = 0; i < rs.size(); ++i) id.signs.push_back(rs.positive_roots()[i].dot(y) > 0 ? 1 : -1);
    if (id == chamber) return g;
  }
  fail(ErrorKind::invalid_argument, "chamber id is not realizable for this root system");
}

/// w_k(x) = prod_{alpha in R_+} |<alpha,x>|^{2 k_alpha}.
inline double weight(const RootSystem& rs, const Vector& x) {
  double w = 1.0;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const double k = rs.multiplicity(i);
    if (k == 0.0) continue;
    w *= std::pow(std::abs(rs.positive_roots()[i].dot(x)), 2.0 * k);
  }
  return w;
}

inline double log_weight(const RootSystem& rs, const Vector& x) {
  double lw = 0.0;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const double k = rs.multiplicity(i);
    if (k == 0.0) continue;
    lw += 2.0 * k * std::log(std::abs(rs.positive_roots()[i].dot(x)));
  }
  return lw;
}

// JSON: {dim, positive_roots: [[...]], multiplicities: {orbit_index: k}}
inline nlohmann::json to_json(const RootSystem& rs) {
  nlohmann::json j;
  j["dim"] = rs.dim();
  auto roots = nlohmann::json::array();
  for (const auto& a : rs.positive_roots()) roots.push_back(std::vector<double>(a.data(), a.data() + a.size()));
  j["positive_roots"] = roots;
  nlohmann::json mult = nlohmann::json::object();
  for (int o = 0; o < rs.orbit_count(); ++o) mult[std::to_string(o)] = rs.orbit_multiplicity(o);
  j["multiplicities"] = mult;
  return j;
}

inline RootSystem root_system_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("positive_roots") || !j.contains("multiplicities")) {
    fail(ErrorKind::invalid_argument, "root system JSON needs dim, positive_roots and multiplicities");
  }
  const int dim = j.at("dim").get<int>();
  std::vector<Vector> roots;
  for (const auto& r : j.at("positive_roots")) {
    const auto v = r.get<std::vector<double>>();
    if (static_cast<int>(v.size()) != dim) fail(ErrorKind::invalid_dimension, "root dimension differs from dim");
    roots.push_back(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  std::map<int, double> per_orbit;
  for (const auto& [key, value] : j.at("multiplicities").items()) per_orbit[std::stoi(key)] = value.get<double>();
  return build_custom(roots, per_orbit);
}

/// FNV-1a over the canonical JSON form; stable across runs.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t hash(const RootSystem& rs) { return fnv1a(to_json(rs).dump()); }

}  // namespace dunkl
