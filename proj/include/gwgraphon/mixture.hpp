#pragma once

// Mixtures of GW barycenters: C step functions learned jointly with a
// doubly-stochastic graph-to-component assignment.

#include "gwgraphon/barycenter.hpp"

namespace gwgraphon {

struct MixtureModel {
  std::vector<StepFunction> components;
  TransportPlan assignment;  // C x M, marginals (1/C, 1/M)
  std::vector<double> objective;  // sum_cm p_cm d^2(A_m, W_c) after each assignment update
};

struct MixtureOptions {
  int clusters = 2;
  int rounds = 5;
  std::optional<double> assignment_beta;  // defaults to cfg.beta
  std::optional<Eigen::Index> k;
};

/// C x M matrix of GW objectives between each component and each graph.
inline Matrix mixture_ground_costs(const std::vector<ObservedGraph>& graphs, const std::vector<StepFunction>& comps,
                                   const SolverConfig& cfg) {
  Matrix cost(static_cast<Eigen::Index>(comps.size()), static_cast<Eigen::Index>(graphs.size()));
  for (std::size_t c = 0; c < comps.size(); ++c)
    for (std::size_t m = 0; m < graphs.size(); ++m)
      cost(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(m)) =
          proximal_gw(graphs[m], comps[c], cfg).distance_sq;
  return cost;
}

/// Alternates (assignment update by entropic OT on the GW ground costs,
/// p-weighted barycenter refit of every component). Components start from
/// plain barycenters of seeded random disjoint shards of the graphs.
inline MixtureModel estimate_mixture(const std::vector<ObservedGraph>& graphs, const SolverConfig& cfg,
                                     const MixtureOptions& opts) {
  cfg.validate();
  const auto count = static_cast<int>(graphs.size());
  const int clusters = opts.clusters;
  if (clusters < 1) throw DomainError("estimate_mixture: need at least one cluster");
  if (clusters > count) throw DomainError("estimate_mixture: more clusters than graphs");
  if (opts.rounds < 1) throw DomainError("estimate_mixture: rounds must be positive");
  const double ot_beta = opts.assignment_beta.value_or(cfg.beta);
  const auto parts = opts.k.value_or(select_partition_count(graphs));

  const Vector row_marginal = Vector::Constant(clusters, 1.0 / clusters);
  const Vector col_marginal = Vector::Constant(count, 1.0 / count);

  if (clusters == 1) {
    // With one component the assignment is fixed by its marginals and the
    // objective is the plain barycenter objective.
    auto fit = estimate_gwb_fit(graphs, cfg, parts);
    Matrix p = col_marginal.transpose();
    return {{fit.step_function()},
            TransportPlan(std::move(p), row_marginal, col_marginal),
            {detail::weighted_mean(fit.distances, {})}};
  }

  // Seeded shuffle, then deal round-robin into disjoint shards.
  std::vector<std::size_t> order(graphs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(cfg.seed, stable_hash("mixture-shards")));
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)))]);

  std::vector<StepFunction> comps;
  for (int c = 0; c < clusters; ++c) {
    std::vector<ObservedGraph> shard;
    for (std::size_t i = static_cast<std::size_t>(c); i < order.size(); i += static_cast<std::size_t>(clusters))
      shard.push_back(graphs[order[i]]);
    SolverConfig shard_cfg = cfg;
    shard_cfg.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(c) + 1);
    comps.push_back(estimate_gwb(shard, shard_cfg, parts));
  }

  // Each half-step keeps its previous state when the candidate would raise
  // sum_cm p_cm d^2(A_m, W_c), so the alternation is a descent method.
  Matrix cost = mixture_ground_costs(graphs, comps, cfg);
  TransportPlan assignment = entropic_ot(cost, row_marginal, col_marginal, ot_beta, cfg.sinkhorn_iters);
  std::vector<double> objective{cost.cwiseProduct(assignment.coupling()).sum()};
  for (int round = 0; round < opts.rounds; ++round) {
    for (int c = 0; c < clusters; ++c) {
      const Vector row = assignment.coupling().row(c).transpose();
      std::vector<double> weights(row.data(), row.data() + row.size());
      const Vector mu_c = estimate_barycenter_measure(graphs, parts, weights);
      // Refit from the current component values under the re-estimated measure.
      auto fit = fit_barycenter(graphs, cfg, mu_c, comps[static_cast<std::size_t>(c)].values(),
                                barycenter_update_from_pullback, weights);
      // The fit's final transport pass is the ground cost against the new values.
      const Vector fitted = Eigen::Map<const Vector>(fit.distances.data(), count);
      if (fitted.dot(row) <= cost.row(c).dot(row)) {
        comps[static_cast<std::size_t>(c)] = fit.step_function();
        cost.row(c) = fitted.transpose();
      }
    }
    auto candidate = entropic_ot(cost, row_marginal, col_marginal, ot_beta, cfg.sinkhorn_iters);
    if (cost.cwiseProduct(candidate.coupling()).sum() <= cost.cwiseProduct(assignment.coupling()).sum())
      assignment = std::move(candidate);
    objective.push_back(cost.cwiseProduct(assignment.coupling()).sum());
  }
  return {std::move(comps), std::move(assignment), std::move(objective)};
}

inline MixtureModel estimate_mixture(const std::vector<ObservedGraph>& graphs, int clusters, const SolverConfig& cfg,
                                     int rounds = 5) {
  MixtureOptions opts;
  opts.clusters = clusters;
  opts.rounds = rounds;
  return estimate_mixture(graphs, cfg, opts);
}

/// argmax_c p_cm per graph; ties go to the lowest component index.
inline std::vector<int> assign_clusters(const MixtureModel& model) {
  const Matrix& p = model.assignment.coupling();
  std::vector<int> labels(static_cast<std::size_t>(p.cols()), 0);
  for (Eigen::Index m = 0; m < p.cols(); ++m) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < p.rows(); ++c)
      if (p(c, m) > p(best, m)) best = c;
    labels[static_cast<std::size_t>(m)] = static_cast<int>(best);
  }
  return labels;
}

}  // namespace gwgraphon
