#pragma once

// GW barycenter estimation of a step-function graphon from unaligned graphs.

#include "gwgraphon/gw_solver.hpp"

#include <functional>
#include <numeric>
#include <optional>
#include <span>

namespace gwgraphon {

/// K = floor(N_max / ln N_max), at least 2.
inline Eigen::Index select_partition_count(std::span<const Eigen::Index> sizes) {
  if (sizes.empty()) throw DomainError("select_partition_count: no graph sizes");
  const auto n_max = *std::max_element(sizes.begin(), sizes.end());
  if (n_max < 2) return 2;
  const double n = static_cast<double>(n_max);
  const auto k = static_cast<Eigen::Index>(std::floor(n / std::log(n)));
  return std::max<Eigen::Index>(k, 2);
}

inline Eigen::Index select_partition_count(const std::vector<ObservedGraph>& graphs) {
  std::vector<Eigen::Index> sizes;
  sizes.reserve(graphs.size());
  for (const auto& g : graphs) sizes.push_back(g.node_count());
  return select_partition_count(sizes);
}

/// Sorts `measure` in descending order, places entry n at abscissa (n+0.5)/N
/// and samples the piecewise-linear interpolant (held constant beyond the end
/// knots) at (j+0.5)/K.
inline Vector interpolate_sorted_measure(const Vector& measure, Eigen::Index k) {
  const auto n = measure.size();
  std::vector<double> sorted(measure.data(), measure.data() + n);
  std::stable_sort(sorted.begin(), sorted.end(), std::greater<>());

  Vector out(k);
  const double dn = static_cast<double>(n);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double t = (static_cast<double>(j) + 0.5) / static_cast<double>(k);
    const double pos = t * dn - 0.5;  // fractional knot index
    if (pos <= 0.0) {
      out(j) = sorted.front();
    } else if (pos >= dn - 1.0) {
      out(j) = sorted.back();
    } else {
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const double frac = pos - static_cast<double>(lo);
      out(j) = frac == 0.0 ? sorted[lo] : (1.0 - frac) * sorted[lo] + frac * sorted[lo + 1];
    }
  }
  return out;
}

/// Barycenter measure: (weighted) average of the interpolated sorted node
/// measures, renormalized. Nonincreasing and strictly positive.
inline Vector estimate_barycenter_measure(const std::vector<ObservedGraph>& graphs, Eigen::Index k,
                                          std::span<const double> weights = {}) {
  if (graphs.empty()) throw DomainError("estimate_barycenter_measure: no graphs");
  if (k < 1) throw DomainError("estimate_barycenter_measure: k must be positive");
  if (!weights.empty() && weights.size() != graphs.size())
    throw DomainError("estimate_barycenter_measure: one weight per graph required");
  Vector acc = Vector::Zero(k);
  double total = 0.0;
  for (std::size_t m = 0; m < graphs.size(); ++m) {
    const double wm = weights.empty() ? 1.0 : weights[m];
    if (wm == 0.0) continue;
    acc += wm * interpolate_sorted_measure(graphs[m].measure(), k);
    total += wm;
  }
  if (!(total > 0.0)) throw DomainError("estimate_barycenter_measure: weights sum to zero");
  acc /= acc.sum();
  return acc;
}

/// (Weighted) mean of T_m^T A_m T_m; weights are renormalized to sum 1.
inline Matrix average_pullback(const std::vector<ObservedGraph>& graphs, std::span<const Matrix> plans,
                               std::span<const double> weights = {}) {
  if (graphs.empty() || plans.size() != graphs.size())
    throw DomainError("barycenter update: one plan per graph required");
  if (!weights.empty() && weights.size() != graphs.size())
    throw DomainError("barycenter update: one weight per graph required");
  const auto k = plans.front().cols();
  Matrix acc = Matrix::Zero(k, k);
  double total = 0.0;
  for (std::size_t m = 0; m < graphs.size(); ++m) {
    const double wm = weights.empty() ? 1.0 : weights[m];
    if (wm == 0.0) continue;
    const Matrix& t = plans[m];
    if (t.rows() != graphs[m].node_count() || t.cols() != k)
      throw DomainError("barycenter update: plan shape does not match graph");
    acc.noalias() += wm * (t.transpose() * (graphs[m].adjacency() * t));
    total += wm;
  }
  if (!(total > 0.0)) throw DomainError("barycenter update: weights sum to zero");
  return acc / total;
}

/// Symmetrize, then clamp to [0,1].
inline Matrix finalize_step_values(const Matrix& w) {
  Matrix sym = 0.5 * (w + w.transpose());
  return sym.cwiseMax(0.0).cwiseMin(1.0);
}

inline Matrix barycenter_update_from_pullback(const Matrix& pullback, const Vector& mu_w) {
  if (pullback.rows() != mu_w.size()) throw DomainError("barycenter update: measure length mismatch");
  if ((mu_w.array() <= 0.0).any()) throw DomainError("barycenter update: measure must be strictly positive");
  const Matrix denom = mu_w * mu_w.transpose();
  return finalize_step_values(pullback.cwiseQuotient(denom));
}

/// Closed-form barycenter: mean of T^T A T divided elementwise by mu_w mu_w^T.
inline Matrix barycenter_update(const std::vector<ObservedGraph>& graphs, std::span<const Matrix> plans,
                                const Vector& mu_w, std::span<const double> weights = {}) {
  return barycenter_update_from_pullback(average_pullback(graphs, plans, weights), mu_w);
}

inline Matrix barycenter_update(const std::vector<ObservedGraph>& graphs, const std::vector<TransportPlan>& plans,
                                const Vector& mu_w) {
  std::vector<Matrix> couplings;
  couplings.reserve(plans.size());
  for (const auto& p : plans) couplings.push_back(p.coupling());
  return barycenter_update(graphs, couplings, mu_w);
}

// ---------------------------------------------------------------------------
// Alternating estimator

/// The barycenter update rule: (pullback average, mu_w) -> new values.
using BarycenterRule = std::function<Matrix(const Matrix& pullback, const Vector& mu_w)>;

struct BarycenterFit {
  Matrix values;
  Vector measure;
  std::vector<Matrix> plans;        // plans against the returned values
  std::vector<double> distances;    // per-graph GW objective against the returned values
  std::vector<double> objective;    // weighted mean GW objective: [initial, after update 1, ..., final]

  StepFunction step_function() const { return {values, measure}; }
};

/// Symmetrized uniform noise on [0,1], seeded.
inline Matrix random_initial_values(Eigen::Index k, std::uint64_t seed) {
  Rng rng(derive_seed(seed, stable_hash("initial-values")));
  Matrix w(k, k);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < k; ++i) w(i, j) = rng.uniform();
  return 0.5 * (w + w.transpose());
}

namespace detail {

inline double weighted_mean(const std::vector<double>& values, std::span<const double> weights) {
  if (weights.empty()) return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double acc = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    acc += weights[i] * values[i];
    total += weights[i];
  }
  return acc / total;
}

}  // namespace detail

/// Runs cfg.outer_iters alternations of (per-graph proximal GW solve, rule
/// update) from `initial`, then one final transport pass against the result.
inline BarycenterFit fit_barycenter(const std::vector<ObservedGraph>& graphs, const SolverConfig& cfg,
                                    const Vector& mu_w, Matrix initial, const BarycenterRule& rule,
                                    std::span<const double> weights = {}) {
  cfg.validate();
  if (graphs.empty()) throw DomainError("barycenter estimation needs at least one graph");
  if (initial.rows() != mu_w.size() || initial.cols() != mu_w.size())
    throw DomainError("initial values do not match the measure length");

  BarycenterFit fit;
  fit.values = std::move(initial);
  fit.measure = mu_w;
  fit.plans.resize(graphs.size());
  fit.distances.resize(graphs.size());

  auto solve_all = [&](bool warm) {
    for (std::size_t m = 0; m < graphs.size(); ++m) {
      const Matrix* init = (warm && fit.plans[m].size() > 0) ? &fit.plans[m] : nullptr;
      auto result = proximal_gw(graphs[m].adjacency(), graphs[m].measure(), fit.values, mu_w, cfg, init);
      // The fresh solve is local; keep the previous plan when it still fits
      // the updated values better, so the objective never increases.
      if (fit.plans[m].size() > 0) {
        const double kept =
            std::max(gw_objective(graphs[m].adjacency(), graphs[m].measure(), fit.values, mu_w, fit.plans[m]), 0.0);
        if (kept < result.distance_sq) {
          fit.distances[m] = kept;
          continue;
        }
      }
      fit.plans[m] = result.plan.coupling();
      fit.distances[m] = result.distance_sq;
    }
    fit.objective.push_back(detail::weighted_mean(fit.distances, weights));
  };

  for (int l = 0; l < cfg.outer_iters; ++l) {
    solve_all(cfg.warm_start && l > 0);
    fit.values = rule(average_pullback(graphs, fit.plans, weights), mu_w);
  }
  solve_all(cfg.warm_start);
  return fit;
}

inline BarycenterFit estimate_gwb_fit(const std::vector<ObservedGraph>& graphs, const SolverConfig& cfg,
                                      std::optional<Eigen::Index> k = std::nullopt) {
  if (graphs.empty()) throw DomainError("estimate_gwb: no graphs");
  const auto parts = k.value_or(select_partition_count(graphs));
  if (parts < 1) throw DomainError("estimate_gwb: k must be positive");
  const Vector mu_w = estimate_barycenter_measure(graphs, parts);
  return fit_barycenter(graphs, cfg, mu_w, random_initial_values(parts, cfg.seed), barycenter_update_from_pullback);
}

inline StepFunction estimate_gwb(const std::vector<ObservedGraph>& graphs, const SolverConfig& cfg,
                                 std::optional<Eigen::Index> k = std::nullopt) {
  return estimate_gwb_fit(graphs, cfg, k).step_function();
}

}  // namespace gwgraphon
