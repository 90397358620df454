#pragma once

// Gromov-Wasserstein machinery: the constant part of the GW cost, Sinkhorn
// scaling, the proximal-point GW solver, plain entropic OT, and a small exact
// solver used as a test oracle.
//
// Relation matrices are templates so that observed graphs (sparse adjacency)
// and step functions / discretized graphons (dense) share one code path.

#include "gwgraphon/core.hpp"

#include <limits>
#include <numeric>

namespace gwgraphon {

inline constexpr double kKernelFloor = 1e-300;

struct GwResult {
  TransportPlan plan;
  double distance_sq;
};

namespace detail {

template <class Rel>
void check_square(const Rel& m, const Vector& mu, const char* what) {
  if (m.rows() != m.cols() || m.rows() != mu.size())
    throw DomainError(std::string(what) + ": relation matrix and measure dimensions disagree");
}

inline void check_measure(const Vector& mu, const char* what) {
  if (mu.size() == 0 || !mu.allFinite() || (mu.array() <= 0.0).any())
    throw DomainError(std::string(what) + ": measure must be strictly positive");
}

}  // namespace detail

/// (a.*a) mu_a 1^T + 1 mu_w^T (w.*w): the part of the GW cost that does not
/// depend on the coupling, once the coupling has the right marginals.
template <class Rel>
Matrix gw_cost_offset(const Rel& a, const Vector& mu_a, const Matrix& w, const Vector& mu_w) {
  detail::check_square(a, mu_a, "gw_cost_offset");
  detail::check_square(w, mu_w, "gw_cost_offset");
  const Vector left = a.cwiseProduct(a) * mu_a;
  const Vector right = w.cwiseProduct(w).transpose() * mu_w;
  return left.replicate(1, w.rows()) + right.transpose().replicate(a.rows(), 1);
}

/// <D - 2 a T w^T, T>. Equals sum (a_ij - w_kl)^2 T_ik T_jl whenever T has
/// marginals (mu_a, mu_w).
template <class Rel>
double gw_objective(const Rel& a, const Matrix& w, const Matrix& offset, const Matrix& plan) {
  const Matrix cross = (a * plan) * w.transpose();
  return (offset - 2.0 * cross).cwiseProduct(plan).sum();
}

template <class Rel>
double gw_objective(const Rel& a, const Vector& mu_a, const Matrix& w, const Vector& mu_w, const Matrix& plan) {
  return gw_objective(a, w, gw_cost_offset(a, mu_a, w, mu_w), plan);
}

namespace detail {

/// Nearest-feasible rounding of a nonnegative matrix: scale down rows and
/// columns that carry too much mass, then spread the missing mass as a rank-one
/// correction. The result has the exact marginals up to rounding, and moves at
/// most twice the L1 marginal error.
inline Matrix round_to_marginals(Matrix t, const Vector& mu_row, const Vector& mu_col) {
  const Vector row_scale = mu_row.cwiseQuotient(t.rowwise().sum().cwiseMax(kKernelFloor)).cwiseMin(1.0);
  t = row_scale.asDiagonal() * t;
  const Vector col_scale =
      mu_col.cwiseQuotient(t.colwise().sum().transpose().cwiseMax(kKernelFloor)).cwiseMin(1.0);
  t = t * col_scale.asDiagonal();
  const Vector row_gap = (mu_row - t.rowwise().sum()).cwiseMax(0.0);
  const Vector col_gap = (mu_col - t.colwise().sum().transpose()).cwiseMax(0.0);
  const double missing = row_gap.sum();
  if (missing > 0.0) t += row_gap * col_gap.transpose() / missing;
  return t;
}

}  // namespace detail

/// Alternating Sinkhorn scalings b = mu_col/(K^T a), a = mu_row/(K b),
/// starting from a = mu_row. After `inner_iters` sweeps, keeps sweeping until
/// the column residual is at most `tol` (when tol > 0) or `max_iters` is hit.
inline TransportPlan sinkhorn_projection(const Matrix& kernel, const Vector& mu_row, const Vector& mu_col,
                                         int inner_iters, double tol = 0.0, int max_iters = 0) {
  if (kernel.rows() != mu_row.size() || kernel.cols() != mu_col.size())
    throw DomainError("sinkhorn_projection: kernel dimensions disagree with marginals");
  if (!kernel.allFinite()) throw NumericError("sinkhorn_projection: kernel has non-finite entries");
  detail::check_measure(mu_row, "sinkhorn_projection");
  detail::check_measure(mu_col, "sinkhorn_projection");
  if (inner_iters < 1) throw DomainError("sinkhorn_projection: need at least one sweep");

  const Matrix k = kernel.cwiseMax(kKernelFloor);
  Vector a = mu_row;
  Vector b(mu_col.size());
  const int cap = std::max(inner_iters, max_iters);
  for (int it = 1;; ++it) {
    b = mu_col.cwiseQuotient(k.transpose() * a);
    a = mu_row.cwiseQuotient(k * b);
    if (it < inner_iters) continue;
    if (tol <= 0.0 || it >= cap) break;
    const Vector col_sums = b.cwiseProduct(k.transpose() * a);
    if ((col_sums - mu_col).cwiseAbs().maxCoeff() <= tol) break;
  }
  Matrix plan = a.asDiagonal() * k * b.asDiagonal();
  if (!plan.allFinite()) throw NumericError("sinkhorn_projection: scaling overflowed");
  return {std::move(plan), mu_row, mu_col};
}

/// Proximal-point GW solve between relation matrix `a` (measure mu_a) and
/// step-function values `w` (measure mu_w). Each of cfg.sinkhorn_iters steps
/// builds the kernel exp(-(D - 2 a T w^T)/beta) .* T and Sinkhorn-projects it.
/// The reported distance is the GW objective at the returned plan.
template <class Rel>
GwResult proximal_gw(const Rel& a, const Vector& mu_a, const Matrix& w, const Vector& mu_w,
                     const SolverConfig& cfg, const Matrix* init = nullptr) {
  cfg.validate();
  detail::check_measure(mu_a, "proximal_gw");
  detail::check_measure(mu_w, "proximal_gw");
  const Matrix offset = gw_cost_offset(a, mu_a, w, mu_w);

  Matrix plan = (init != nullptr) ? *init : Matrix(mu_a * mu_w.transpose());
  if (plan.rows() != a.rows() || plan.cols() != w.rows())
    throw DomainError("proximal_gw: initial plan has wrong shape");

  const double inv_beta = 1.0 / cfg.beta;
  Matrix log_kernel(plan.rows(), plan.cols());
  for (int s = 0; s < cfg.sinkhorn_iters; ++s) {
    // log of exp(-cost/beta) .* T, shifted per row so the row maximum is 0.
    // The row shift is absorbed by the scaling vector a.
    log_kernel = -inv_beta * (offset - 2.0 * ((a * plan) * w.transpose()));
    log_kernel.array() += plan.array().max(kKernelFloor).log();
    const Vector row_max = log_kernel.rowwise().maxCoeff();
    log_kernel.colwise() -= row_max;
    const Matrix kernel = log_kernel.array().exp().max(kKernelFloor).matrix();

    const bool last = (s + 1 == cfg.sinkhorn_iters);
    plan = sinkhorn_projection(kernel, mu_a, mu_w, cfg.scaling_iters, last ? cfg.marginal_tol : cfg.projection_tol,
                               cfg.max_polish_iters)
               .coupling();
  }
  // Kernels with nearly empty rows or columns can stall the polish; fall back
  // to rounding so the returned plan always meets the tolerance.
  if (cfg.marginal_tol > 0.0 && TransportPlan(plan, mu_a, mu_w).max_residual() > cfg.marginal_tol)
    plan = detail::round_to_marginals(std::move(plan), mu_a, mu_w);
  const double value = gw_objective(a, w, offset, plan);
  if (!std::isfinite(value)) throw NumericError("proximal_gw: objective is not finite");
  return {TransportPlan(std::move(plan), mu_a, mu_w), std::max(value, 0.0)};
}

inline GwResult proximal_gw(const ObservedGraph& graph, const StepFunction& w, const SolverConfig& cfg) {
  return proximal_gw(graph.adjacency(), graph.measure(), w.values(), w.measure(), cfg);
}

/// Entropic OT: minimizes <cost, P> + beta <P, log P> over couplings with the
/// given marginals. Sinkhorn on exp(-cost/beta), run on log-scale potentials
/// so that small beta does not underflow. Runs at least `iters` sweeps and
/// continues until both marginals are met to 1e-10 (up to 200000 sweeps).
inline TransportPlan entropic_ot(const Matrix& cost, const Vector& mu_row, const Vector& mu_col, double beta,
                                 int iters) {
  if (!(beta > 0.0)) throw DomainError("entropic_ot: beta must be positive");
  if (cost.rows() != mu_row.size() || cost.cols() != mu_col.size())
    throw DomainError("entropic_ot: cost dimensions disagree with marginals");
  if (!cost.allFinite()) throw NumericError("entropic_ot: cost has non-finite entries");
  detail::check_measure(mu_row, "entropic_ot");
  detail::check_measure(mu_col, "entropic_ot");

  const auto rows = cost.rows();
  const auto cols = cost.cols();
  const Matrix scaled = cost / beta;
  const Vector log_row = mu_row.array().log();
  const Vector log_col = mu_col.array().log();
  Vector f = Vector::Zero(rows);
  Vector g = Vector::Zero(cols);

  auto plan_from = [&] {
    Matrix p(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) p(i, j) = std::exp(f(i) + g(j) - scaled(i, j));
    return p;
  };

  constexpr double kTol = 1e-10;
  constexpr int kMaxSweeps = 200000;
  for (int it = 1;; ++it) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      double mx = -std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < rows; ++i) mx = std::max(mx, f(i) - scaled(i, j));
      double acc = 0.0;
      for (Eigen::Index i = 0; i < rows; ++i) acc += std::exp(f(i) - scaled(i, j) - mx);
      g(j) = log_col(j) - (mx + std::log(acc));
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < cols; ++j) mx = std::max(mx, g(j) - scaled(i, j));
      double acc = 0.0;
      for (Eigen::Index j = 0; j < cols; ++j) acc += std::exp(g(j) - scaled(i, j) - mx);
      f(i) = log_row(i) - (mx + std::log(acc));
    }
    if (it < iters) continue;
    const Matrix p = plan_from();
    const double col_res = (p.colwise().sum().transpose() - mu_col).cwiseAbs().maxCoeff();
    if (col_res <= kTol || it >= kMaxSweeps) break;
  }
  TransportPlan plan(plan_from(), mu_row, mu_col);
  if (plan.max_residual() > kTol) return {detail::round_to_marginals(plan.coupling(), mu_row, mu_col), mu_row, mu_col};
  return plan;
}

// ---------------------------------------------------------------------------
// Exact small-instance oracle

namespace detail {

/// All vertices of the transportation polytope Pi(mu_a, mu_b): basic solutions
/// supported on spanning trees of the complete bipartite graph.
inline std::vector<Matrix> transport_vertices(const Vector& mu_a, const Vector& mu_b) {
  const auto n = mu_a.size();
  const auto m = mu_b.size();
  const auto cells = static_cast<int>(n * m);
  const auto basis = static_cast<int>(n + m - 1);
  std::vector<Matrix> vertices;

  std::vector<int> choose(static_cast<std::size_t>(basis));
  std::iota(choose.begin(), choose.end(), 0);
  auto next_combination = [&]() {
    int i = basis - 1;
    while (i >= 0 && choose[static_cast<std::size_t>(i)] == cells - basis + i) --i;
    if (i < 0) return false;
    ++choose[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < basis; ++j)
      choose[static_cast<std::size_t>(j)] = choose[static_cast<std::size_t>(j - 1)] + 1;
    return true;
  };

  const auto nodes = static_cast<std::size_t>(n + m);
  do {
    // Spanning-tree check with union-find over row nodes [0,n) and column nodes [n,n+m).
    std::vector<std::size_t> parent(nodes);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    bool tree = true;
    for (int c : choose) {
      const auto r = static_cast<std::size_t>(c / m);
      const auto col = static_cast<std::size_t>(n + c % m);
      const auto pr = find(r);
      const auto pc = find(col);
      if (pr == pc) {
        tree = false;
        break;
      }
      parent[pr] = pc;
    }
    if (!tree) continue;

    // Solve by peeling leaves.
    Matrix t = Matrix::Zero(n, m);
    Vector row_left = mu_a;
    Vector col_left = mu_b;
    std::vector<bool> used(static_cast<std::size_t>(basis), false);
    for (int round = 0; round < basis; ++round) {
      std::vector<int> row_deg(static_cast<std::size_t>(n), 0);
      std::vector<int> col_deg(static_cast<std::size_t>(m), 0);
      for (int e = 0; e < basis; ++e) {
        if (used[static_cast<std::size_t>(e)]) continue;
        const int c = choose[static_cast<std::size_t>(e)];
        ++row_deg[static_cast<std::size_t>(c / m)];
        ++col_deg[static_cast<std::size_t>(c % m)];
      }
      for (int e = 0; e < basis; ++e) {
        if (used[static_cast<std::size_t>(e)]) continue;
        const int c = choose[static_cast<std::size_t>(e)];
        const auto r = static_cast<Eigen::Index>(c / m);
        const auto col = static_cast<Eigen::Index>(c % m);
        if (row_deg[static_cast<std::size_t>(r)] == 1) {
          t(r, col) = row_left(r);
        } else if (col_deg[static_cast<std::size_t>(col)] == 1) {
          t(r, col) = col_left(col);
        } else {
          continue;
        }
        row_left(r) -= t(r, col);
        col_left(col) -= t(r, col);
        used[static_cast<std::size_t>(e)] = true;
        break;
      }
    }
    if ((t.array() < -1e-12).any()) continue;
    vertices.push_back(t.cwiseMax(0.0));
  } while (next_combination());
  return vertices;
}

}  // namespace detail

/// Global GW objective minimum for tiny instances (n*m <= 16): evaluates every
/// polytope vertex and runs conditional-gradient descent with exact line search
/// from each vertex, the product coupling and a set of seeded interior points.
inline double gw_distance_exact_small(const Matrix& a, const Matrix& b, const Vector& mu_a, const Vector& mu_b) {
  detail::check_square(a, mu_a, "gw_distance_exact_small");
  detail::check_square(b, mu_b, "gw_distance_exact_small");
  detail::check_measure(mu_a, "gw_distance_exact_small");
  detail::check_measure(mu_b, "gw_distance_exact_small");
  const auto n = a.rows();
  const auto m = b.rows();
  if (n * m > 16) throw DomainError("gw_distance_exact_small: n*m must not exceed 16");

  // Quadratic form over vec(T) with index (i,k) -> i*m + k.
  const auto dim = n * m;
  Matrix q(dim, dim);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < m; ++k)
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index l = 0; l < m; ++l) {
          const double r = a(i, j) - b(k, l);
          q(i * m + k, j * m + l) = r * r;
        }
  q = 0.5 * (q + q.transpose()).eval();

  auto flatten = [&](const Matrix& t) {
    Vector v(dim);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k < m; ++k) v(i * m + k) = t(i, k);
    return v;
  };

  std::vector<Vector> vertices;
  for (const auto& vtx : detail::transport_vertices(mu_a, mu_b)) vertices.push_back(flatten(vtx));

  double best = std::numeric_limits<double>::infinity();
  auto descend = [&](Vector t) {
    for (int it = 0; it < 5000; ++it) {
      const Vector grad = 2.0 * (q * t);
      std::size_t arg = 0;
      double lo = std::numeric_limits<double>::infinity();
      for (std::size_t v = 0; v < vertices.size(); ++v) {
        const double score = grad.dot(vertices[v]);
        if (score < lo) {
          lo = score;
          arg = v;
        }
      }
      const Vector dir = vertices[arg] - t;
      const double slope = grad.dot(dir);
      if (slope > -1e-15) break;
      const double curv = dir.dot(q * dir);
      double step = 1.0;
      if (curv > 0.0) step = std::min(1.0, -slope / (2.0 * curv));
      t += step * dir;
    }
    best = std::min(best, t.dot(q * t));
  };

  for (const auto& v : vertices) {
    best = std::min(best, v.dot(q * v));
    descend(v);
  }
  descend(flatten(mu_a * mu_b.transpose()));
  Rng rng(0x0DDBA11ULL);
  for (int start = 0; start < 32; ++start) {
    Vector mix = Vector::Zero(dim);
    double total = 0.0;
    for (const auto& v : vertices) {
      const double weight = -std::log(1.0 - rng.uniform());
      mix += weight * v;
      total += weight;
    }
    descend(mix / total);
  }
  return std::max(best, 0.0);
}

}  // namespace gwgraphon
