#pragma once

// Error metrics and baselines for the synthetic benchmark protocol.

#include "gwgraphon/barycenter.hpp"

#include <map>

namespace gwgraphon {

/// Piecewise-constant expansion on a uniform grid: pixel (i,j) takes
/// w[floor(i K / R)][floor(j K / R)].
inline Matrix upsample_step_function(const Matrix& w, Eigen::Index resolution) {
  const auto k = w.rows();
  if (resolution < k) throw DomainError("upsample_step_function: resolution must be at least K");
  std::vector<Eigen::Index> block(static_cast<std::size_t>(resolution));
  for (Eigen::Index i = 0; i < resolution; ++i) block[static_cast<std::size_t>(i)] = (i * k) / resolution;
  Matrix out(resolution, resolution);
  for (Eigen::Index j = 0; j < resolution; ++j)
    for (Eigen::Index i = 0; i < resolution; ++i)
      out(i, j) = w(block[static_cast<std::size_t>(i)], block[static_cast<std::size_t>(j)]);
  return out;
}

inline Matrix upsample_step_function(const StepFunction& w, Eigen::Index resolution) {
  return upsample_step_function(w.values(), resolution);
}

inline double mse_error(const Matrix& estimate, const GraphonSpec& truth, Eigen::Index resolution = 1000) {
  const Matrix diff = upsample_step_function(estimate, resolution) - discretize_graphon(truth, resolution);
  return diff.squaredNorm() / static_cast<double>(resolution * resolution);
}

inline double mse_error(const StepFunction& estimate, const GraphonSpec& truth, Eigen::Index resolution = 1000) {
  return mse_error(estimate.values(), truth, resolution);
}

/// Transport settings for measuring d_gw,2 against a ground truth.
///
/// Evaluation is a global problem while the proximal solver is local: symmetric
/// graphons (|x-y|, the block graphons) leave the product coupling at a saddle
/// point that a short run never leaves. The error is therefore the smallest GW
/// objective reached from several starts (the product coupling, a
/// degree-sorted north-west-corner coupling and seeded perturbations of the
/// product) under each listed proximal weight. Every start ends at a feasible
/// plan, so each candidate is an upper bound on the squared distance.
struct GwEvalOptions {
  Eigen::Index resolution = 1000;
  std::vector<double> betas{0.005, 0.02};
  int proximal_steps = 100;
  int scaling_iters = 5;
  int perturbed_starts = 2;
  std::uint64_t seed = 0;
};

namespace detail {

/// Rounds away summation-order noise so mirrored rows tie exactly and keep
/// their index order.
inline double tie_key(double v) { return std::nearbyint(v * 0x1.0p36) * 0x1.0p-36; }

inline std::vector<Eigen::Index> descending_order(const Vector& key) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(key.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return tie_key(key(a)) > tie_key(key(b)); });
  return order;
}

/// Greedy coupling that fills rows and columns in the given orders.
inline Matrix north_west_corner(const Vector& mu_row, const std::vector<Eigen::Index>& rows, const Vector& mu_col,
                                const std::vector<Eigen::Index>& cols) {
  Matrix t = Matrix::Zero(mu_row.size(), mu_col.size());
  Vector row_left = mu_row;
  Vector col_left = mu_col;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < rows.size() && j < cols.size()) {
    const auto r = rows[i];
    const auto c = cols[j];
    const double mass = std::min(row_left(r), col_left(c));
    t(r, c) += mass;
    row_left(r) -= mass;
    col_left(c) -= mass;
    if (row_left(r) <= col_left(c)) {
      ++i;
    } else {
      ++j;
    }
  }
  return t;
}

/// Relabels a step function into an order that depends only on its content:
/// measure, then weighted degree, then the sorted row values (all descending).
inline std::pair<Matrix, Vector> canonical_step(const Matrix& values, const Vector& measure) {
  const auto k = values.rows();
  const Vector degree = values * measure;
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    auto& row = rows[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < k; ++j) row.push_back(tie_key(values(i, j)));
    std::sort(row.begin(), row.end(), std::greater<>());
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    if (measure(a) != measure(b)) return measure(a) > measure(b);
    if (tie_key(degree(a)) != tie_key(degree(b))) return tie_key(degree(a)) > tie_key(degree(b));
    return rows[static_cast<std::size_t>(a)] > rows[static_cast<std::size_t>(b)];
  });
  Matrix v(k, k);
  Vector mu(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    mu(i) = measure(order[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < k; ++j) v(i, j) = values(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  return {std::move(v), std::move(mu)};
}

}  // namespace detail

/// Squared GW distance between a dense relation (measure mu_a) and a step
/// function, minimized over the evaluation starts.
inline double gw_distance_sq_multistart(const Matrix& a, const Vector& mu_a, const Matrix& values,
                                        const Vector& measure, const GwEvalOptions& opts) {
  const auto [w, mu_w] = detail::canonical_step(values, measure);
  std::vector<Matrix> starts;
  starts.emplace_back(mu_a * mu_w.transpose());
  starts.push_back(detail::north_west_corner(mu_a, detail::descending_order(a * mu_a), mu_w,
                                             detail::descending_order(w * mu_w)));
  Rng rng(derive_seed(opts.seed, stable_hash("gw-eval-starts")));
  for (int s = 0; s < opts.perturbed_starts; ++s) {
    Matrix t = mu_a * mu_w.transpose();
    for (Eigen::Index j = 0; j < t.cols(); ++j)
      for (Eigen::Index i = 0; i < t.rows(); ++i) t(i, j) *= 0.5 + rng.uniform();
    starts.push_back(std::move(t));
  }

  // The sorted coupling is feasible, so its own cost is already an upper bound.
  double best = std::max(gw_objective(a, mu_a, w, mu_w, starts[1]), 0.0);
  for (double beta : opts.betas) {
    SolverConfig cfg;
    cfg.beta = beta;
    cfg.sinkhorn_iters = opts.proximal_steps;
    cfg.scaling_iters = opts.scaling_iters;
    for (const auto& start : starts) {
      const Matrix init = start.cwiseMax(kKernelFloor);
      best = std::min(best, proximal_gw(a, mu_a, w, mu_w, cfg, &init).distance_sq);
    }
  }
  return best;
}

/// d_gw,2 (not squared) between an estimate with its own measure and the
/// truth discretized at opts.resolution with uniform measure.
inline double gw_error(const Matrix& values, const Vector& measure, const GraphonSpec& truth,
                       const GwEvalOptions& opts = {}) {
  const Matrix grid = discretize_graphon(truth, opts.resolution);
  const Vector uniform = Vector::Constant(opts.resolution, 1.0 / static_cast<double>(opts.resolution));
  return std::sqrt(gw_distance_sq_multistart(grid, uniform, values, measure, opts));
}

inline double gw_error(const StepFunction& estimate, const GraphonSpec& truth, const GwEvalOptions& opts = {}) {
  return gw_error(estimate.values(), estimate.measure(), truth, opts);
}

// ---------------------------------------------------------------------------
// Baselines

/// Mean of the adjacency matrices zero-padded to the largest graph.
inline Matrix padded_average(const std::vector<ObservedGraph>& graphs) {
  if (graphs.empty()) throw DomainError("baseline estimators need at least one graph");
  Eigen::Index n_max = 0;
  for (const auto& g : graphs) n_max = std::max(n_max, g.node_count());
  Matrix acc = Matrix::Zero(n_max, n_max);
  for (const auto& g : graphs) {
    const auto& adj = g.adjacency();
    for (Eigen::Index col = 0; col < adj.outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(adj, col); it; ++it) acc(it.row(), it.col()) += it.value();
  }
  return acc / static_cast<double>(graphs.size());
}

inline StepFunction naive_average_estimate(const std::vector<ObservedGraph>& graphs) {
  return StepFunction::uniform(finalize_step_values(padded_average(graphs)));
}

/// Universal singular value thresholding of the zero-padded average:
/// singular values below 2.02 sqrt(N_max / M) are dropped.
inline StepFunction usvt_estimate(const std::vector<ObservedGraph>& graphs) {
  const Matrix avg = padded_average(graphs);
  const auto n = avg.rows();
  const double threshold =
      2.02 * std::sqrt(static_cast<double>(n) / static_cast<double>(graphs.size()));
  // Symmetric input: singular values are |eigenvalues|.
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(avg);
  const Matrix& u = eig.eigenvectors();
  Vector kept = eig.eigenvalues();
  for (Eigen::Index i = 0; i < kept.size(); ++i)
    if (std::abs(kept(i)) < threshold) kept(i) = 0.0;
  const Matrix denoised = u * kept.asDiagonal() * u.transpose();
  return StepFunction::uniform(finalize_step_values(denoised));
}

// ---------------------------------------------------------------------------
// Clustering accuracy

namespace detail {

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian method
/// with potentials). Returns the column assigned to each row.
inline std::vector<int> min_cost_assignment(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<int> match(static_cast<std::size_t>(n + 1), 0), way(static_cast<std::size_t>(n + 1), 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n + 1), inf);
    std::vector<bool> used(static_cast<std::size_t>(n + 1), false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const int i0 = match[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(static_cast<std::size_t>(n), 0);
  for (int j = 1; j <= n; ++j) row_to_col[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)] = j - 1;
  return row_to_col;
}

/// Maps arbitrary labels to 0..L-1 in order of first appearance.
inline std::vector<int> compact_labels(const std::vector<int>& labels, int& count) {
  std::map<int, int> index;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    auto [it, inserted] = index.emplace(l, static_cast<int>(index.size()));
    out.push_back(it->second);
  }
  count = static_cast<int>(index.size());
  return out;
}

}  // namespace detail

/// Best agreement over one-to-one matchings of predicted to true labels.
inline double clustering_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) throw DomainError("clustering_accuracy: label vectors differ in length");
  if (predicted.empty()) throw DomainError("clustering_accuracy: no labels");
  int n_pred = 0;
  int n_true = 0;
  const auto p = detail::compact_labels(predicted, n_pred);
  const auto t = detail::compact_labels(truth, n_true);
  const int n = std::max(n_pred, n_true);
  Matrix confusion = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < p.size(); ++i) confusion(p[i], t[i]) += 1.0;
  const auto match = detail::min_cost_assignment(-confusion);
  double agree = 0.0;
  for (int r = 0; r < n; ++r) agree += confusion(r, match[static_cast<std::size_t>(r)]);
  return agree / static_cast<double>(predicted.size());
}

}  // namespace gwgraphon
