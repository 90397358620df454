#pragma once

// Random graphs from a graphon: latent positions uniform on [0,1], then one
// Bernoulli draw per unordered node pair.

#include "gwgraphon/core.hpp"

namespace gwgraphon {

inline constexpr double kDegreeFloor = 1e-8;

/// Node measure proportional to max(degree, 1e-8), normalized to sum 1.
inline Vector estimate_node_measure(const SparseMatrix& adjacency) {
  const auto n = adjacency.rows();
  if (n < 1) throw DomainError("empty adjacency");
  Vector deg = Vector::Zero(n);
  for (Eigen::Index col = 0; col < adjacency.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(adjacency, col); it; ++it) deg(it.row()) += it.value();
  deg = deg.cwiseMax(kDegreeFloor);
  return deg / deg.sum();
}

/// Builds an ObservedGraph (with degree-based measure) from an edge list.
inline ObservedGraph make_graph(Eigen::Index n, const std::vector<Edge>& edges) {
  auto adj = adjacency_from_edges(n, edges);
  auto measure = estimate_node_measure(adj);
  return {std::move(adj), std::move(measure)};
}

inline ObservedGraph sample_graph(const GraphonSpec& spec, Eigen::Index n, std::uint64_t seed) {
  if (n < 2) throw DomainError("a sampled graph needs at least 2 nodes");
  Rng rng(seed);
  std::vector<double> positions(static_cast<std::size_t>(n));
  for (auto& v : positions) v = rng.uniform();

  std::vector<Edge> edges;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double p = spec.eval_unchecked(positions[static_cast<std::size_t>(i)],
                                           positions[static_cast<std::size_t>(j)]);
      if (rng.uniform() < p) edges.emplace_back(i, j);
    }
  }
  return make_graph(n, edges);
}

struct GraphDraw {
  Eigen::Index nodes;
  std::uint64_t seed;
};

/// Sizes and per-graph seeds for a population. Graph m uses the seed
/// derive_seed(seed, m), so each graph is reproducible on its own.
inline std::vector<GraphDraw> plan_population(int count, Eigen::Index n_min, Eigen::Index n_max,
                                              std::uint64_t seed) {
  if (count < 1) throw DomainError("population count must be positive");
  if (n_min < 2 || n_max < n_min) throw DomainError("invalid node-count range");
  std::vector<GraphDraw> draws;
  draws.reserve(static_cast<std::size_t>(count));
  for (int m = 0; m < count; ++m) {
    const auto graph_seed = derive_seed(seed, static_cast<std::uint64_t>(m));
    Rng size_rng(derive_seed(graph_seed, 0x5173ULL));
    draws.push_back({static_cast<Eigen::Index>(size_rng.uniform_int(n_min, n_max)), graph_seed});
  }
  return draws;
}

/// M graphs with sizes uniform on {n_min..n_max}.
inline std::vector<ObservedGraph> sample_population(const GraphonSpec& spec, int count, Eigen::Index n_min,
                                                    Eigen::Index n_max, std::uint64_t seed) {
  std::vector<ObservedGraph> graphs;
  for (const auto& draw : plan_population(count, n_min, n_max, seed))
    graphs.push_back(sample_graph(spec, draw.nodes, draw.seed));
  return graphs;
}

}  // namespace gwgraphon
