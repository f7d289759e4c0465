#pragma once

// Exact multivariate polynomials with rational coefficients.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dunkl/error.hpp"
#include "dunkl/rational.hpp"

namespace dunkl {

using Exponent = std::vector<int>;
using RationalVector = std::vector<Rational>;
using RationalMatrix = std::vector<RationalVector>;  // row-major

class Polynomial {
 public:
  using Terms = std::map<Exponent, Rational>;

  explicit Polynomial(int dim = 1) : dim_(dim) {}

  static Polynomial constant(int dim, const Rational& c) {
    Polynomial p(dim);
    p.add_term(Exponent(static_cast<std::size_t>(dim), 0), c);
    return p;
  }
  static Polynomial variable(int dim, int i) {
    Exponent e(static_cast<std::size_t>(dim), 0);
    e[static_cast<std::size_t>(i)] = 1;
    return monomial(e, Rational(1));
  }
  static Polynomial monomial(const Exponent& e, const Rational& c) {
    Polynomial p(static_cast<int>(e.size()));
    p.add_term(e, c);
    return p;
  }
  /// sum_j c_j x_j
  static Polynomial linear(const RationalVector& c) {
    Polynomial p(static_cast<int>(c.size()));
    for (std::size_t j = 0; j < c.size(); ++j) {
      Exponent e(c.size(), 0);
      e[j] = 1;
      p.add_term(e, c[j]);
    }
    return p;
  }

  int dim() const { return dim_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  int degree() const {
    int d = -1;
    for (const auto& [e, c] : terms_) d = std::max(d, total(e));
    return d;
  }
  bool is_homogeneous() const {
    const int d = degree();
    return std::all_of(terms_.begin(), terms_.end(), [&](const auto& t) { return total(t.first) == d; });
  }

  void add_term(const Exponent& e, const Rational& c) {
    if (static_cast<int>(e.size()) != dim_) fail(ErrorKind::invalid_dimension, "exponent size differs from polynomial dim");
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  Rational coefficient(const Exponent& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  Polynomial& operator+=(const Polynomial& o) {
    check_dim(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    check_dim(o);
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }
  Polynomial& operator*=(const Rational& s) {
    if (s == 0) {
      terms_.clear();
      return *this;
    }
    for (auto& [e, c] : terms_) c *= s;
    return *this;
  }
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator-(Polynomial a) { return a *= Rational(-1); }
  friend Polynomial operator*(Polynomial a, const Rational& s) { return a *= s; }
  friend Polynomial operator*(const Rational& s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check_dim(b);
    Polynomial out(a.dim_);
    Exponent e(static_cast<std::size_t>(a.dim_));
    for (const auto& [ea, ca] : a.terms_) {
      for (const auto& [eb, cb] : b.terms_) {
        for (std::size_t j = 0; j < e.size(); ++j) e[j] = ea[j] + eb[j];
        out.add_term(e, ca * cb);
      }
    }
    return out;
  }
  Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }

  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.dim_ == b.dim_ && a.terms_ == b.terms_; }

  Polynomial pow(int n) const {
    Polynomial out = constant(dim_, 1);
    for (int i = 0; i < n; ++i) out *= *this;
    return out;
  }

  Polynomial derivative(int i) const {
    Polynomial out(dim_);
    for (const auto& [e, c] : terms_) {
      const int ei = e[static_cast<std::size_t>(i)];
      if (ei == 0) continue;
      Exponent d = e;
      d[static_cast<std::size_t>(i)] -= 1;
      out.add_term(d, c * ei);
    }
    return out;
  }

  /// p(Mx) for a rational matrix M.
  Polynomial compose_linear(const RationalMatrix& m) const {
    std::vector<std::vector<Polynomial>> powers(static_cast<std::size_t>(dim_));
    const int deg = std::max(degree(), 0);
    for (int j = 0; j < dim_; ++j) {
      auto& pw = powers[static_cast<std::size_t>(j)];
      pw.push_back(constant(dim_, 1));
      const Polynomial lin = linear(m[static_cast<std::size_t>(j)]);
      for (int d = 1; d <= deg; ++d) pw.push_back(pw.back() * lin);
    }
    Polynomial out(dim_);
    for (const auto& [e, c] : terms_) {
      Polynomial t = constant(dim_, c);
      for (int j = 0; j < dim_; ++j) {
        const int ej = e[static_cast<std::size_t>(j)];
        if (ej > 0) t *= powers[static_cast<std::size_t>(j)][static_cast<std::size_t>(ej)];
      }
      out += t;
    }
    return out;
  }

  double evaluate(const Eigen::VectorXd& x) const {
    double s = 0.0;
    for (const auto& [e, c] : terms_) {
      double t = c.get_d();
      for (int j = 0; j < dim_; ++j) {
        for (int k = 0; k < e[static_cast<std::size_t>(j)]; ++k) t *= x(j);
      }
      s += t;
    }
    return s;
  }

  Rational evaluate(const RationalVector& x) const {
    Rational s = 0;
    for (const auto& [e, c] : terms_) {
      Rational t = c;
      for (int j = 0; j < dim_; ++j) {
        for (int k = 0; k < e[static_cast<std::size_t>(j)]; ++k) t *= x[static_cast<std::size_t>(j)];
      }
      s += t;
    }
    return s;
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
      if (!s.empty()) s += " + ";
      s += "(" + it->second.get_str() + ")";
      for (int j = 0; j < dim_; ++j) {
        const int ej = it->first[static_cast<std::size_t>(j)];
        if (ej == 0) continue;
        s += "*x" + std::to_string(j + 1);
        if (ej > 1) s += "^" + std::to_string(ej);
      }
    }
    return s;
  }

 private:
  static int total(const Exponent& e) {
    int t = 0;
    for (int v : e) t += v;
    return t;
  }
  void check_dim(const Polynomial& o) const {
    if (o.dim_ != dim_) fail(ErrorKind::invalid_dimension, "polynomial dimensions differ");
  }

  int dim_;
  Terms terms_;
};

/// Divides p by the linear form <v,x>. Returns (quotient, remainder); the
/// remainder is free of the pivot variable (largest |v_j|).
inline std::pair<Polynomial, Polynomial> divide_by_linear(const Polynomial& p, const RationalVector& v) {
  const int n = p.dim();
  int pivot = -1;
  for (int j = 0; j < n; ++j) {
    if (v[static_cast<std::size_t>(j)] != 0 &&
        (pivot < 0 || abs(v[static_cast<std::size_t>(j)]) > abs(v[static_cast<std::size_t>(pivot)]))) {
      pivot = j;
    }
  }
  if (pivot < 0) fail(ErrorKind::invalid_argument, "division by the zero linear form");
  const auto pj = static_cast<std::size_t>(pivot);
  const Rational inv = 1 / v[pj];

  Polynomial quotient(n);
  Polynomial rest = p;
  // Peel off terms containing x_pivot, highest power first.
  while (true) {
    const Exponent* lead = nullptr;
    for (const auto& [e, c] : rest.terms()) {
      if (e[pj] > 0 && (lead == nullptr || e[pj] > (*lead)[pj])) lead = &e;
    }
    if (lead == nullptr) break;
    Exponent q = *lead;
    const Rational c = rest.coefficient(q) * inv;
    q[pj] -= 1;
    const Polynomial qt = Polynomial::monomial(q, c);
    quotient += qt;
    rest -= qt * Polynomial::linear(v);
  }
  return {quotient, rest};
}

/// Exact division by <v,x>; throws if the remainder is nonzero.
inline Polynomial divide_exact(const Polynomial& p, const RationalVector& v) {
  auto [q, r] = divide_by_linear(p, v);
  if (!r.is_zero()) fail(ErrorKind::evaluation_error, "nonzero remainder in division by a linear form: " + r.to_string());
  return q;
}

/// Double-precision copy of a polynomial for fast repeated evaluation.
class CompiledPolynomial {
 public:
  CompiledPolynomial() = default;
  explicit CompiledPolynomial(const Polynomial& p) : dim_(p.dim()), degree_(std::max(p.degree(), 0)) {
    for (const auto& [e, c] : p.terms()) {
      coef_.push_back(c.get_d());
      exps_.insert(exps_.end(), e.begin(), e.end());
    }
  }
  int dim() const { return dim_; }
  int degree() const { return degree_; }
  bool is_zero() const { return coef_.empty(); }

  double operator()(const Eigen::VectorXd& x) const {
    double s = 0.0;
    for (std::size_t t = 0; t < coef_.size(); ++t) {
      double v = coef_[t];
      for (int j = 0; j < dim_; ++j) {
        const int e = exps_[t * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(j)];
        for (int k = 0; k < e; ++k) v *= x(j);
      }
      s += v;
    }
    return s;
  }

  /// Evaluates at every column of `points` given a power table
  /// powers[d](j, col) = x_j^d.
  Eigen::VectorXd evaluate_many(const std::vector<Eigen::MatrixXd>& powers) const {
    const Eigen::Index n = powers.front().cols();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    Eigen::ArrayXd term(n);
    for (std::size_t t = 0; t < coef_.size(); ++t) {
      term.setConstant(coef_[t]);
      for (int j = 0; j < dim_; ++j) {
        const int e = exps_[t * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(j)];
        if (e > 0) term *= powers[static_cast<std::size_t>(e)].row(j).transpose().array();
      }
      out.array() += term;
    }
    return out;
  }

 private:
  int dim_ = 0;
  int degree_ = 0;
  std::vector<double> coef_;
  std::vector<int> exps_;
};

/// powers[d](j, c) = points(j, c)^d for d = 0..max_degree.
inline std::vector<Eigen::MatrixXd> power_table(const Eigen::MatrixXd& points, int max_degree) {
  std::vector<Eigen::MatrixXd> pw;
  pw.push_back(Eigen::MatrixXd::Ones(points.rows(), points.cols()));
  for (int d = 1; d <= std::max(max_degree, 1); ++d) pw.push_back(pw.back().cwiseProduct(points));
  return pw;
}

// JSON: list of {exponents: [..], numerator, denominator}
inline nlohmann::json to_json(const Polynomial& p) {
  auto out = nlohmann::json::array();
  for (const auto& [e, c] : p.terms()) {
    out.push_back({{"exponents", e}, {"numerator", c.get_num().get_str()}, {"denominator", c.get_den().get_str()}});
  }
  return out;
}

inline Polynomial polynomial_from_json(const nlohmann::json& j, int dim) {
  if (!j.is_array()) fail(ErrorKind::invalid_argument, "polynomial JSON must be an array of terms");
  Polynomial p(dim);
  auto as_string = [](const nlohmann::json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
  for (const auto& t : j) {
    const auto e = t.at("exponents").get<Exponent>();
    Rational c(mpz_class(as_string(t.at("numerator"))), mpz_class(as_string(t.at("denominator"))));
    c.canonicalize();
    p.add_term(e, c);
  }
  return p;
}

}  // namespace dunkl
