#pragma once

// Smoothed GW barycenters: the barycenter update with a curvature penalty
// alpha * ||L W L^T||_F^2 on the step-function values.

#include "gwgraphon/barycenter.hpp"

#include <complex>

namespace gwgraphon {

enum class SmoothedSolveMode {
  // W = Re(H^{-1} B H^{-H}) with H = U (sqrt(2 alpha) Lambda + i diag(mu)) U^T,
  // where L^T L = U Lambda U^T. Exact only when diag(mu) commutes with U.
  PaperClosedForm,
  // Conjugate gradient on 2 alpha X W X + diag(mu) W diag(mu) = B, X = L^T L.
  ExactIterative,
};

/// Second-difference operator with Neumann ends:
/// rows (1,-1,0..), (..,-1,2,-1,..), (..,0,-1,1).
inline Matrix build_laplacian_filter(Eigen::Index k) {
  if (k < 2) throw DomainError("build_laplacian_filter: k must be at least 2");
  Matrix l = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (i > 0) {
      l(i, i - 1) = -1.0;
      l(i, i) += 1.0;
    }
    if (i + 1 < k) {
      l(i, i + 1) = -1.0;
      l(i, i) += 1.0;
    }
  }
  return l;
}

namespace detail {

// K = 1 has no neighbours, so the filter is the zero operator.
inline Matrix curvature_gram(Eigen::Index k) {
  if (k < 2) return Matrix::Zero(k, k);
  const Matrix l = build_laplacian_filter(k);
  return l.transpose() * l;
}

}  // namespace detail

/// Applies the left side of the first-order condition:
/// 2 alpha X W X + diag(mu) W diag(mu).
inline Matrix smoothed_normal_operator(const Matrix& w, const Matrix& gram, const Vector& mu, double alpha) {
  return 2.0 * alpha * (gram * w * gram) + (mu * mu.transpose()).cwiseProduct(w);
}

inline Matrix solve_smoothed_paper(const Matrix& pullback, const Vector& mu, double alpha) {
  const auto k = pullback.rows();
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(detail::curvature_gram(k));
  const Matrix& u = eig.eigenvectors();
  const Vector& lambda = eig.eigenvalues();
  const double scale = std::sqrt(2.0 * alpha);

  // In the U basis H is diagonal with entries delta_k = scale*lambda_k + i*mu_k,
  // so H^{-1} B H^{-H} has entries Bt_kl / (delta_k * conj(delta_l)).
  const Matrix rotated = u.transpose() * pullback * u;
  Matrix real_part(k, k);
  for (Eigen::Index l = 0; l < k; ++l) {
    const std::complex<double> dl(scale * lambda(l), mu(l));
    for (Eigen::Index r = 0; r < k; ++r) {
      const std::complex<double> dr(scale * lambda(r), mu(r));
      real_part(r, l) = (rotated(r, l) / (dr * std::conj(dl))).real();
    }
  }
  return u * real_part * u.transpose();
}

struct CgReport {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Preconditioned conjugate gradient on the symmetric positive-definite
/// operator W -> 2 alpha X W X + D W D (Jacobi preconditioner).
inline Matrix solve_smoothed_exact(const Matrix& pullback, const Vector& mu, double alpha, double tol = 1e-10,
                                   CgReport* report = nullptr) {
  const auto k = pullback.rows();
  const Matrix gram = detail::curvature_gram(k);
  const double rhs_norm = pullback.norm();
  Matrix w = Matrix::Zero(k, k);
  if (rhs_norm == 0.0) {
    if (report != nullptr) *report = {};
    return w;
  }
  const Vector gdiag = gram.diagonal();
  const Matrix precond =
      (2.0 * alpha * (gdiag * gdiag.transpose()) + mu * mu.transpose()).cwiseInverse();

  Matrix r = pullback;
  Matrix z = precond.cwiseProduct(r);
  Matrix p = z;
  double rz = r.cwiseProduct(z).sum();
  const int max_iters = static_cast<int>(std::max<Eigen::Index>(10 * k * k, 10));
  for (int it = 1; it <= max_iters; ++it) {
    const Matrix ap = smoothed_normal_operator(p, gram, mu, alpha);
    const double step = rz / p.cwiseProduct(ap).sum();
    w += step * p;
    r -= step * ap;
    const double rel = r.norm() / rhs_norm;
    if (rel <= tol) {
      if (report != nullptr) *report = {it, rel};
      return w;
    }
    z = precond.cwiseProduct(r);
    const double rz_next = r.cwiseProduct(z).sum();
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  throw NumericError("smoothed barycenter: conjugate gradient did not converge");
}

/// Smoothed update from the averaged pullback B. alpha = 0 is exactly the
/// plain barycenter update.
inline Matrix smoothed_update_from_pullback(const Matrix& pullback, const Vector& mu_w, double alpha,
                                            SmoothedSolveMode mode) {
  if (!(alpha >= 0.0)) throw DomainError("smoothed update: alpha must be nonnegative");
  if (pullback.rows() != mu_w.size()) throw DomainError("smoothed update: measure length mismatch");
  if ((mu_w.array() <= 0.0).any()) throw DomainError("smoothed update: measure must be strictly positive");
  if (alpha == 0.0) return barycenter_update_from_pullback(pullback, mu_w);
  const Matrix raw = mode == SmoothedSolveMode::PaperClosedForm ? solve_smoothed_paper(pullback, mu_w, alpha)
                                                                : solve_smoothed_exact(pullback, mu_w, alpha);
  return finalize_step_values(raw);
}

inline Matrix smoothed_barycenter_update(const std::vector<ObservedGraph>& graphs, std::span<const Matrix> plans,
                                         const Vector& mu_w, double alpha, SmoothedSolveMode mode,
                                         std::span<const double> weights = {}) {
  return smoothed_update_from_pullback(average_pullback(graphs, plans, weights), mu_w, alpha, mode);
}

inline BarycenterFit estimate_sgwb_fit(const std::vector<ObservedGraph>& graphs, const SolverConfig& cfg,
                                       std::optional<Eigen::Index> k = std::nullopt,
                                       SmoothedSolveMode mode = SmoothedSolveMode::ExactIterative) {
  if (graphs.empty()) throw DomainError("estimate_sgwb: no graphs");
  const auto parts = k.value_or(select_partition_count(graphs));
  if (parts < 1) throw DomainError("estimate_sgwb: k must be positive");
  const Vector mu_w = estimate_barycenter_measure(graphs, parts);
  const double alpha = cfg.alpha;
  return fit_barycenter(graphs, cfg, mu_w, random_initial_values(parts, cfg.seed),
                        [alpha, mode](const Matrix& pullback, const Vector& mu) {
                          return smoothed_update_from_pullback(pullback, mu, alpha, mode);
                        });
}

inline StepFunction estimate_sgwb(const std::vector<ObservedGraph>& graphs, const SolverConfig& cfg,
                                  std::optional<Eigen::Index> k = std::nullopt,
                                  SmoothedSolveMode mode = SmoothedSolveMode::ExactIterative) {
  return estimate_sgwb_fit(graphs, cfg, k, mode).step_function();
}

inline std::string_view mode_name(SmoothedSolveMode mode) {
  return mode == SmoothedSolveMode::PaperClosedForm ? "paper" : "exact";
}

}  // namespace gwgraphon
