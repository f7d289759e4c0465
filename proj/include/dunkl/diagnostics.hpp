#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "dunkl/error.hpp"
#include "dunkl/sampler.hpp"

namespace dunkl {

/// Effective sample size of one series, Geyer's initial monotone sequence.
inline double ess(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 4) return static_cast<double>(n);
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = x[i] - mean;
  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += d[i] * d[i + lag];
    return s / static_cast<double>(n);
  };
  const double c0 = autocov(0);
  if (c0 <= 0.0) return static_cast<double>(n);
  double tau = -1.0;  // -1 + 2 sum rho_t, accumulated in pairs
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t + 1 < n; t += 2) {
    double pair = (autocov(t) + autocov(t + 1)) / c0;
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);
    prev_pair = pair;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1.0 / std::log10(static_cast<double>(n)));
  return std::min(static_cast<double>(n), static_cast<double>(n) / tau);
}

/// Split R-hat over the half-chains of all series.
inline double split_rhat(const std::vector<std::vector<double>>& series) {
  std::vector<std::vector<double>> halves;
  for (const auto& s : series) {
    const std::size_t h = s.size() / 2;
    halves.emplace_back(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(h));
    halves.emplace_back(s.begin() + static_cast<std::ptrdiff_t>(h), s.begin() + static_cast<std::ptrdiff_t>(2 * h));
  }
  const double m = static_cast<double>(halves.size());
  const double n = static_cast<double>(halves.front().size());
  if (n < 2) fail(ErrorKind::insufficient_chains, "chains too short for R-hat");
  std::vector<double> means, vars;
  for (const auto& h : halves) {
    const double mu = std::accumulate(h.begin(), h.end(), 0.0) / n;
    double v = 0.0;
    for (double x : h) v += (x - mu) * (x - mu);
    means.push_back(mu);
    vars.push_back(v / (n - 1));
  }
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
  double B = 0.0;
  for (double mu : means) B += (mu - grand) * (mu - grand);
  B *= n / (m - 1);
  const double W = std::accumulate(vars.begin(), vars.end(), 0.0) / m;
  if (W <= 0.0) return 1.0;
  const double var_plus = (n - 1) / n * W + B / n;
  return std::max(1.0, std::sqrt(var_plus / W));
}

struct FunctionalDiagnostics {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double ess = 0.0;
  double rhat = 1.0;
  double mc_se = 0.0;
};

struct ChainDiagnostics {
  std::vector<double> ess;   // per coordinate
  std::vector<double> rhat;  // per coordinate
  std::vector<FunctionalDiagnostics> functionals;
};

using Functional = std::function<double(const Vector&)>;

inline FunctionalDiagnostics diagnose_series(const std::string& name, const std::vector<std::vector<double>>& series,
                                             bool with_rhat) {
  FunctionalDiagnostics d;
  d.name = name;
  double total = 0.0, sum = 0.0;
  for (const auto& s : series) {
    total += static_cast<double>(s.size());
    sum += std::accumulate(s.begin(), s.end(), 0.0);
  }
  d.mean = sum / total;
  double ss = 0.0;
  for (const auto& s : series) {
    for (double x : s) ss += (x - d.mean) * (x - d.mean);
  }
  d.sd = total > 1 ? std::sqrt(ss / (total - 1)) : 0.0;
  d.ess = 0.0;
  for (const auto& s : series) d.ess += d.sd > 0.0 ? ess(s) : static_cast<double>(s.size());
  d.mc_se = d.sd > 0.0 ? d.sd / std::sqrt(d.ess) : 0.0;
  if (with_rhat) d.rhat = split_rhat(series);
  return d;
}

/// ESS and split R-hat per coordinate and per functional; mc_se = sd / sqrt(ess).
/// R-hat needs at least two chains.
inline ChainDiagnostics diagnose(const std::vector<SampleChain>& chains,
                                 const std::vector<std::pair<std::string, Functional>>& functionals = {},
                                 bool with_rhat = true) {
  if (chains.empty()) fail(ErrorKind::insufficient_chains, "no chains to diagnose");
  if (with_rhat && chains.size() < 2) fail(ErrorKind::insufficient_chains, "R-hat needs at least two chains");
  const int dim = chains.front().dim();
  ChainDiagnostics out;
  auto series_of = [&](const Functional& f) {
    std::vector<std::vector<double>> series;
    for (const auto& c : chains) {
      std::vector<double> s(c.size());
      for (std::size_t i = 0; i < c.size(); ++i) s[i] = f(c.points.row(static_cast<Eigen::Index>(i)).transpose());
      series.push_back(std::move(s));
    }
    return series;
  };
  for (int j = 0; j < dim; ++j) {
    const auto d = diagnose_series("x_" + std::to_string(j + 1), series_of([j](const Vector& x) { return x(j); }), with_rhat);
    out.ess.push_back(d.ess);
    out.rhat.push_back(d.rhat);
  }
  for (const auto& [name, f] : functionals) out.functionals.push_back(diagnose_series(name, series_of(f), with_rhat));
  return out;
}

}  // namespace dunkl
