#pragma once

// Expectations against a measure, from a quadrature grid or from sample chains.
// Both sources expose the same shape: one point cloud and several weighted
// sets over it. Set 0 is the primary estimate; the others feed the error bar.

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <sstream>
#include <vector>

#include "dunkl/error.hpp"
#include "dunkl/quadrature.hpp"
#include "dunkl/sampler.hpp"

namespace dunkl {

struct Estimate {
  double value = 0.0;
  double err = 0.0;
};

inline Estimate operator+(Estimate a, Estimate b) { return {a.value + b.value, a.err + b.err}; }
inline Estimate operator-(Estimate a, Estimate b) { return {a.value - b.value, a.err + b.err}; }
inline Estimate operator*(double c, Estimate a) { return {c * a.value, std::abs(c) * a.err}; }

class MeasureEstimator {
 public:
  enum class Source { grid, chains };

  struct WeightedSet {
    Eigen::Index begin = 0;
    Eigen::Index size = 0;
    Eigen::VectorXd weights;
  };

  /// Sets {fine, coarse}; err = |fine - coarse| + est_tail |fine|.
  static MeasureEstimator from_grid(const QuadratureGrid& g) {
    MeasureEstimator e;
    e.source_ = Source::grid;
    e.spec_ = g.spec;
    e.est_tail_ = g.est_tail;
    const Eigen::Index nf = g.fine.points.cols(), nc = g.coarse.points.cols();
    e.points_.resize(g.fine.points.rows(), nf + nc);
    e.points_.leftCols(nf) = g.fine.points;
    e.points_.rightCols(nc) = g.coarse.points;
    e.sets_.push_back({0, nf, g.fine.weights});
    e.sets_.push_back({nf, nc, g.coarse.weights});
    return e;
  }

  /// Set 0 holds every draw with equal weight; sets 1..B are contiguous batches
  /// (batch means), err = sd(batch values) / sqrt(B).
  static MeasureEstimator from_chains(const MeasureSpec& ms, const std::vector<SampleChain>& chains, int batches = 20) {
    if (chains.empty()) fail(ErrorKind::insufficient_chains, "no chains given");
    if (batches < 2) fail(ErrorKind::invalid_argument, "need at least two batches");
    MeasureEstimator e;
    e.source_ = Source::chains;
    e.spec_ = ms;
    Eigen::Index total = 0;
    for (const auto& c : chains) total += static_cast<Eigen::Index>(c.size());
    if (total < batches) fail(ErrorKind::insufficient_chains, "fewer draws than batches");
    e.points_.resize(chains.front().dim(), total);
    Eigen::Index at = 0;
    for (const auto& c : chains) {
      e.points_.middleCols(at, static_cast<Eigen::Index>(c.size())) = c.points.transpose();
      at += static_cast<Eigen::Index>(c.size());
    }
    e.sets_.push_back({0, total, Eigen::VectorXd::Constant(total, 1.0 / static_cast<double>(total))});
    for (int b = 0; b < batches; ++b) {
      const Eigen::Index lo = total * b / batches, hi = total * (b + 1) / batches;
      e.sets_.push_back({lo, hi - lo, Eigen::VectorXd::Constant(hi - lo, 1.0 / static_cast<double>(hi - lo))});
    }
    return e;
  }

  /// Same sets and weights over a different point cloud (e.g. dilated points).
  MeasureEstimator with_points(Matrix points) const {
    if (points.rows() != points_.rows() || points.cols() != points_.cols()) {
      fail(ErrorKind::invalid_argument, "replacement point cloud has the wrong shape");
    }
    MeasureEstimator e = *this;
    e.points_ = std::move(points);
    return e;
  }

  Source source() const { return source_; }
  const MeasureSpec& spec() const { return spec_; }
  const RootSystem& root_system() const { return *spec_.rs; }
  const Matrix& points() const { return points_; }
  Eigen::Index point_count() const { return points_.cols(); }
  std::size_t set_count() const { return sets_.size(); }
  const WeightedSet& set(std::size_t i) const { return sets_[i]; }
  /// Points of the primary set (the ones a reader would call "the sample").
  Eigen::Index primary_size() const { return sets_.front().size; }
  bool probability() const { return source_ == Source::chains || spec_.probability(); }

  /// Integral of pointwise values over every set.
  Eigen::VectorXd per_set(const Eigen::VectorXd& values) const {
    if (values.size() != points_.cols()) fail(ErrorKind::invalid_argument, "value vector does not match the point cloud");
    Eigen::VectorXd out(static_cast<Eigen::Index>(sets_.size()));
    for (std::size_t s = 0; s < sets_.size(); ++s) {
      const auto& w = sets_[s];
      const Eigen::VectorXd terms = w.weights.cwiseProduct(values.segment(w.begin, w.size));
      out(static_cast<Eigen::Index>(s)) = detail::pairwise_sum(terms);
    }
    return out;
  }

  Estimate combine(const Eigen::VectorXd& per_set_values) const {
    const double v = per_set_values(0);
    if (source_ == Source::grid) return {v, std::abs(v - per_set_values(1)) + est_tail_ * std::abs(v)};
    const Eigen::Index b = per_set_values.size() - 1;
    const Eigen::VectorXd batch = per_set_values.tail(b);
    const double mean = batch.mean();
    const double var = (batch.array() - mean).square().sum() / static_cast<double>(b - 1);
    return {v, std::sqrt(var / static_cast<double>(b))};
  }

  Estimate expect(const Eigen::VectorXd& values) const { return combine(per_set(values)); }

  /// Integral of pointwise values over set s.
  double integrate_on(std::size_t s, const Eigen::VectorXd& values) const {
    const auto& w = sets_[s];
    return detail::pairwise_sum(Eigen::VectorXd(w.weights.cwiseProduct(values.segment(w.begin, w.size))));
  }

  /// Nonlinear functional evaluated set by set, then combined like a plain integral.
  template <class F>
  Estimate functional(F&& f) const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(sets_.size()));
    for (std::size_t s = 0; s < sets_.size(); ++s) v(static_cast<Eigen::Index>(s)) = f(s);
    return combine(v);
  }

  template <class F>
  Eigen::VectorXd evaluate(F&& f) const {
    Eigen::VectorXd v(points_.cols());
    for (Eigen::Index j = 0; j < points_.cols(); ++j) {
      v(j) = f(Vector(points_.col(j)));
      if (!std::isfinite(v(j))) {
        std::ostringstream os;
        os << "integrand is not finite at (" << points_.col(j).transpose() << ")";
        fail(ErrorKind::evaluation_error, os.str());
      }
    }
    return v;
  }

  template <class F>
  Estimate expect_fn(F&& f) const {
    return expect(evaluate(std::forward<F>(f)));
  }

  /// Fraction of primary points within the wall tolerance of some hyperplane.
  double wall_fraction() const {
    const auto& s = sets_.front();
    Eigen::Index hits = 0;
    for (Eigen::Index j = s.begin; j < s.begin + s.size; ++j) {
      if (!off_all_walls(*spec_.rs, points_.col(j))) ++hits;
    }
    return s.size > 0 ? static_cast<double>(hits) / static_cast<double>(s.size) : 0.0;
  }

 private:
  Source source_ = Source::grid;
  MeasureSpec spec_;
  double est_tail_ = 0.0;
  Matrix points_;
  std::vector<WeightedSet> sets_;
};

}  // namespace dunkl
