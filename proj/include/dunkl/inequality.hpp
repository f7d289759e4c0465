#pragma once

// Functionals entering the inequalities, and the report that compares two sides.

#include <nlohmann/json.hpp>

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dunkl/error.hpp"
#include "dunkl/estimator.hpp"
#include "dunkl/function_basis.hpp"

namespace dunkl {

enum class EntropyVariant { ent, ent_pow, abs_log_pow, phi, l1_log_pow };

inline std::string to_string(EntropyVariant v) {
  switch (v) {
    case EntropyVariant::ent: return "ent";
    case EntropyVariant::ent_pow: return "ent_pow";
    case EntropyVariant::abs_log_pow: return "abs_log_pow";
    case EntropyVariant::phi: return "phi";
    case EntropyVariant::l1_log_pow: return "l1_log_pow";
  }
  return "unknown";
}

namespace detail {

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

inline double phi_fn(double x, double s) { return x * std::pow(std::log1p(x), s); }

/// g = |f|^power on the segment of set s.
inline Eigen::VectorXd abs_pow_segment(const MeasureEstimator& me, std::size_t s, const Eigen::VectorXd& f, double power) {
  const auto& w = me.set(s);
  return f.segment(w.begin, w.size).array().abs().pow(power).matrix();
}

inline double integrate_segment(const MeasureEstimator& me, std::size_t s, const Eigen::VectorXd& seg) {
  return detail::pairwise_sum(Eigen::VectorXd(me.set(s).weights.cwiseProduct(seg)));
}

}  // namespace detail

/// Entropy-type functionals of f:
///   ent          Ent(f^2) = int f^2 log f^2 - (int f^2) log(int f^2)
///   ent_pow(s)   Ent(|f|^s)
///   abs_log_pow  int f^2 |log(f^2 / int f^2)|^s
///   phi          int Phi(f^2) - Phi(int f^2), Phi(x) = x log(1+x)^s
///   l1_log_pow   int f |log(|f| / int |f|)|^s
inline Estimate entropy(const MeasureEstimator& me, const Eigen::VectorXd& f, EntropyVariant variant, double s = 1.0) {
  const double power = variant == EntropyVariant::ent_pow ? s : (variant == EntropyVariant::l1_log_pow ? 1.0 : 2.0);
  {
    const double mass = detail::integrate_segment(me, 0, detail::abs_pow_segment(me, 0, f, power));
    if (!(mass > 0.0)) fail(ErrorKind::degenerate_function, "test function has no mass");
  }
  return me.functional([&](std::size_t set) {
    const Eigen::VectorXd g = detail::abs_pow_segment(me, set, f, power);
    const double m = detail::integrate_segment(me, set, g);
    if (!(m > 0.0)) return 0.0;
    switch (variant) {
      case EntropyVariant::ent:
      case EntropyVariant::ent_pow:
        return detail::integrate_segment(me, set, g.unaryExpr([](double x) { return detail::xlogx(x); })) - detail::xlogx(m);
      case EntropyVariant::abs_log_pow:
        return detail::integrate_segment(me, set, g.unaryExpr([&](double x) {
          return x > 0.0 ? x * std::pow(std::abs(std::log(x / m)), s) : 0.0;
        }));
      case EntropyVariant::phi:
        return detail::integrate_segment(me, set, g.unaryExpr([&](double x) { return detail::phi_fn(x, s); })) -
               detail::phi_fn(m, s);
      case EntropyVariant::l1_log_pow: {
        const auto& w = me.set(set);
        const Eigen::VectorXd fs = f.segment(w.begin, w.size);
        Eigen::VectorXd v(fs.size());
        for (Eigen::Index j = 0; j < fs.size(); ++j) {
          v(j) = fs(j) != 0.0 ? fs(j) * std::pow(std::abs(std::log(std::abs(fs(j)) / m)), s) : 0.0;
        }
        return detail::integrate_segment(me, set, v);
      }
    }
    return 0.0;
  });
}

enum class NormKind { l2, l1 };
enum class GradientKind { dunkl, classical };

/// Share of primary points on a wall above which gradient estimates are flagged.
inline constexpr double kWallDominatedFraction = 1e-3;

/// int |grad f|^2 (l2) or int |grad f| (l1). A wall-dominated sample inflates
/// err to the full value.
inline Estimate dirichlet_form(const MeasureEstimator& me, const FieldValues& fv, NormKind norm = NormKind::l2,
                               GradientKind gradient = GradientKind::dunkl) {
  const Matrix& g = gradient == GradientKind::dunkl ? fv.dgrad : fv.cgrad;
  if (g.rows() != fv.f.size()) fail(ErrorKind::gradient_required, "gradient not tabulated for this test function");
  Eigen::VectorXd sq = g.rowwise().squaredNorm();
  if (norm == NormKind::l1) sq = sq.cwiseSqrt();
  Estimate e = me.expect(sq);
  if (me.wall_fraction() > kWallDominatedFraction) e.err = std::max(e.err, std::abs(e.value));
  return e;
}

/// int f^2 w(x) (l2) or int |f| w(x) (l1); w = 1 when omitted.
inline Estimate weighted_norm(const MeasureEstimator& me, const Eigen::VectorXd& f, NormKind norm = NormKind::l2,
                              const std::function<double(const Vector&)>& w = {}) {
  Eigen::VectorXd v = norm == NormKind::l2 ? Eigen::VectorXd(f.array().square()) : Eigen::VectorXd(f.array().abs());
  if (w) v = v.cwiseProduct(me.evaluate(w));
  return me.expect(v);
}

inline Estimate mean_of(const MeasureEstimator& me, const Eigen::VectorXd& f) { return me.expect(f); }

/// int (f - int f)^2
inline Estimate variance(const MeasureEstimator& me, const Eigen::VectorXd& f) {
  return me.functional([&](std::size_t s) {
    const auto& w = me.set(s);
    const Eigen::VectorXd seg = f.segment(w.begin, w.size);
    const double mean = detail::integrate_segment(me, s, seg);
    return detail::integrate_segment(me, s, Eigen::VectorXd((seg.array() - mean).square()));
  });
}

struct RhsTerm {
  std::string label;
  double coefficient = 1.0;
  Estimate value;
};

/// One inequality instance lhs <= sum coefficient * value.
struct InequalityReport {
  std::string name;
  std::string anchor;
  Estimate lhs;
  std::vector<RhsTerm> rhs_terms;
  std::map<std::string, double> constants;
  double rhs = 0.0;
  double margin = 0.0;
  double combined_err = 0.0;
  bool violated = false;
  bool valid = true;
  std::string test_function;
  std::string note;
};

/// Relative floating-point floor added to every combined error, so equality
/// cases at fitted constants do not flip on the last bits.
inline constexpr double kRoundoff = 1e-10;

/// margin = rhs - lhs; violated iff margin < -(lhs.err + sum |c| err + roundoff).
/// A non-finite value makes the report invalid (and never violated).
inline InequalityReport make_report(std::string name, Estimate lhs, std::vector<RhsTerm> rhs,
                                    std::map<std::string, double> constants = {}, std::string test_function = {}) {
  InequalityReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs_terms = std::move(rhs);
  r.constants = std::move(constants);
  r.test_function = std::move(test_function);
  bool finite = std::isfinite(lhs.value) && std::isfinite(lhs.err);
  r.combined_err = lhs.err;
  for (const auto& t : r.rhs_terms) {
    r.rhs += t.coefficient * t.value.value;
    r.combined_err += std::abs(t.coefficient) * t.value.err;
    finite = finite && std::isfinite(t.coefficient) && std::isfinite(t.value.value) && std::isfinite(t.value.err);
  }
  for (const auto& [k, v] : r.constants) finite = finite && std::isfinite(v);
  double scale = std::abs(lhs.value);
  for (const auto& t : r.rhs_terms) scale += std::abs(t.coefficient * t.value.value);
  r.combined_err += kRoundoff * scale;
  r.margin = r.rhs - r.lhs.value;
  r.valid = finite && std::isfinite(r.margin);
  r.violated = r.valid && r.margin < -r.combined_err;
  if (!r.valid) r.note = "non-finite value";
  return r;
}

using TermSpec = std::function<Estimate(const MeasureEstimator&, const FieldValues&)>;

struct RhsSpec {
  std::string label;
  double coefficient = 1.0;
  TermSpec term;
};

/// Evaluates every functional on f and builds the report.
inline InequalityReport check_bound(const std::string& name, const TermSpec& lhs, const std::vector<RhsSpec>& rhs,
                                   const std::map<std::string, double>& constants, const MeasureEstimator& me,
                                   const FieldValues& f, const std::string& test_function = {}) {
  std::vector<RhsTerm> terms;
  Estimate l;
  try {
    l = lhs(me, f);
    for (const auto& t : rhs) terms.push_back({t.label, t.coefficient, t.term(me, f)});
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::evaluation_error) throw;
    InequalityReport r = make_report(name, {std::nan(""), 0.0}, {}, constants, test_function);
    r.note = e.what();
    return r;
  }
  return make_report(name, l, std::move(terms), constants, test_function);
}

/// The report with the smallest margin relative to its error bar.
inline const InequalityReport& worst(const std::vector<InequalityReport>& reports) {
  if (reports.empty()) fail(ErrorKind::invalid_argument, "no reports");
  const InequalityReport* w = &reports.front();
  auto key = [](const InequalityReport& r) { return r.valid ? r.margin + r.combined_err : std::numeric_limits<double>::infinity(); };
  for (const auto& r : reports) {
    if (key(r) < key(*w)) w = &r;
  }
  return *w;
}

inline nlohmann::json to_json(const Estimate& e) { return {{"value", e.value}, {"err", e.err}}; }

inline nlohmann::json to_json(const InequalityReport& r) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : r.rhs_terms) {
    terms.push_back({{"label", t.label}, {"coefficient", t.coefficient}, {"value", t.value.value}, {"err", t.value.err}});
  }
  nlohmann::json j = {{"name", r.name},
                      {"anchor", r.anchor},
                      {"lhs", to_json(r.lhs)},
                      {"rhs_terms", terms},
                      {"rhs", r.rhs},
                      {"constants", r.constants},
                      {"margin", r.margin},
                      {"combined_err", r.combined_err},
                      {"violated", r.violated},
                      {"valid", r.valid},
                      {"test_function", r.test_function}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

}  // namespace dunkl
