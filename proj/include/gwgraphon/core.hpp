#pragma once

// Domain types shared by every module: analytic graphons, step functions,
// observed graphs, transport plans and solver configuration.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gwgraphon {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

// ---------------------------------------------------------------------------
// Errors

struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct RangeError : DomainError {
  using DomainError::DomainError;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Deterministic random numbers.
//
// The standard distributions are implementation-defined, so uniform doubles
// are drawn directly from the 53 high bits of a splitmix64 stream. This keeps
// sampled graphs bit-identical across standard libraries.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Mixes a stream index into a master seed (counter-based derivation).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

/// Stable 64-bit FNV-1a hash, used to derive seeds from names.
inline std::uint64_t stable_hash(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [lo, hi], unbiased by rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return lo + static_cast<std::int64_t>(next_u64());
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % span);
    std::uint64_t draw = next_u64();
    while (draw >= limit) draw = next_u64();
    return lo + static_cast<std::int64_t>(draw % span);
  }

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Analytic graphons

enum class GraphonFamily {
  Product,          // xy
  ExpPower,         // exp(-(x^0.7 + y^0.7))
  QuarterMix,       // (x^2 + y^2 + sqrt(x) + sqrt(y)) / 4
  Mean,             // (x + y) / 2
  LogisticSquares,  // 1 / (1 + exp(-10 (x^2 + y^2)))
  LogisticMax,      // 1 / (1 + exp(-(max^2 + min^4)))   (reconstructed formula)
  ExpMax,           // exp(-max^{3/4})
  ExpMinSqrt,       // exp(-(min + sqrt(x) + sqrt(y)) / 2)
  LogMax,           // log(1 + max)
  AbsDiff,          // |x - y|
  OneMinusAbsDiff,  // 1 - |x - y|
  TwoBlocks,        // 0.8 I_2 (x) 1
  Bipartite,        // 0.8 flip(I_2) (x) 1
  Grid,             // arbitrary R x R matrix, nearest cell
};

struct FamilyInfo {
  GraphonFamily family;
  std::string_view name;
  std::string_view formula;
};

inline constexpr std::array<FamilyInfo, 13> kFamilies{{
    {GraphonFamily::Product, "xy", "x*y"},
    {GraphonFamily::ExpPower, "exp_power", "exp(-(x^0.7+y^0.7))"},
    {GraphonFamily::QuarterMix, "quarter_mix", "(x^2+y^2+sqrt(x)+sqrt(y))/4"},
    {GraphonFamily::Mean, "mean", "(x+y)/2"},
    {GraphonFamily::LogisticSquares, "logistic_squares", "1/(1+exp(-10(x^2+y^2)))"},
    {GraphonFamily::LogisticMax, "logistic_max",
     "1/(1+exp(-(max(x,y)^2+min(x,y)^4))) [reconstructed]"},
    {GraphonFamily::ExpMax, "exp_max", "exp(-max(x,y)^0.75)"},
    {GraphonFamily::ExpMinSqrt, "exp_min_sqrt", "exp(-(min(x,y)+sqrt(x)+sqrt(y))/2)"},
    {GraphonFamily::LogMax, "log_max", "log(1+max(x,y))"},
    {GraphonFamily::AbsDiff, "abs_diff", "|x-y|"},
    {GraphonFamily::OneMinusAbsDiff, "one_minus_abs_diff", "1-|x-y|"},
    {GraphonFamily::TwoBlocks, "two_blocks", "0.8 on [0,1/2)^2 and [1/2,1]^2"},
    {GraphonFamily::Bipartite, "bipartite", "0.8 off the diagonal blocks"},
}};

/// The four families whose graphs have no degree-based alignment.
inline constexpr std::array<GraphonFamily, 4> kHardToAlign{
    GraphonFamily::AbsDiff, GraphonFamily::OneMinusAbsDiff, GraphonFamily::TwoBlocks,
    GraphonFamily::Bipartite};

inline bool is_hard_to_align(GraphonFamily f) {
  return std::find(kHardToAlign.begin(), kHardToAlign.end(), f) != kHardToAlign.end();
}

inline std::string_view family_name(GraphonFamily f) {
  if (f == GraphonFamily::Grid) return "grid";
  for (const auto& info : kFamilies)
    if (info.family == f) return info.name;
  return "unknown";
}

inline std::optional<GraphonFamily> parse_family(std::string_view name) {
  for (const auto& info : kFamilies)
    if (info.name == name) return info.family;
  return std::nullopt;
}

inline std::string family_names_joined(std::string_view sep = ", ") {
  std::string out;
  for (const auto& info : kFamilies) {
    if (!out.empty()) out += sep;
    out += info.name;
  }
  return out;
}

/// An analytic ground-truth graphon, or a grid of values sampled as
/// nearest-cell lookups. Immutable.
class GraphonSpec {
 public:
  explicit GraphonSpec(GraphonFamily family) : family_(family) {
    if (family == GraphonFamily::Grid)
      throw DomainError("grid graphons must be constructed from a matrix");
  }

  static GraphonSpec grid(Matrix values) {
    if (values.rows() == 0 || values.rows() != values.cols())
      throw DomainError("grid graphon needs a nonempty square matrix");
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      for (Eigen::Index j = 0; j < values.cols(); ++j) {
        const double v = values(i, j);
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError("grid graphon entries must lie in [0,1]");
        if (v != values(j, i)) throw DomainError("grid graphon must be symmetric");
      }
    }
    return GraphonSpec(GraphonFamily::Grid, std::move(values));
  }

  static GraphonSpec constant(double p, Eigen::Index cells = 1) {
    return grid(Matrix::Constant(cells, cells, p));
  }

  GraphonFamily family() const { return family_; }
  const Matrix& grid_values() const { return grid_; }

  double operator()(double x, double y) const {
    if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0))
      throw DomainError("graphon arguments must lie in [0,1]");
    return eval_unchecked(x, y);
  }

  // Formulas are written in terms of (max, min) or symmetric sums so that
  // W(x,y) == W(y,x) holds bit-for-bit.
  double eval_unchecked(double x, double y) const {
    const double hi = std::max(x, y);
    const double lo = std::min(x, y);
    double v = 0.0;
    switch (family_) {
      case GraphonFamily::Product: v = lo * hi; break;
      case GraphonFamily::ExpPower: v = std::exp(-(std::pow(lo, 0.7) + std::pow(hi, 0.7))); break;
      case GraphonFamily::QuarterMix:
        v = ((lo * lo + hi * hi) + (std::sqrt(lo) + std::sqrt(hi))) / 4.0;
        break;
      case GraphonFamily::Mean: v = (lo + hi) / 2.0; break;
      case GraphonFamily::LogisticSquares:
        v = 1.0 / (1.0 + std::exp(-10.0 * (lo * lo + hi * hi)));
        break;
      case GraphonFamily::LogisticMax:
        v = 1.0 / (1.0 + std::exp(-(hi * hi + lo * lo * lo * lo)));
        break;
      case GraphonFamily::ExpMax: v = std::exp(-std::pow(hi, 0.75)); break;
      case GraphonFamily::ExpMinSqrt:
        v = std::exp(-(lo + (std::sqrt(lo) + std::sqrt(hi))) / 2.0);
        break;
      case GraphonFamily::LogMax: v = std::log1p(hi); break;
      case GraphonFamily::AbsDiff: v = hi - lo; break;
      case GraphonFamily::OneMinusAbsDiff: v = 1.0 - (hi - lo); break;
      case GraphonFamily::TwoBlocks: v = ((x < 0.5) == (y < 0.5)) ? 0.8 : 0.0; break;
      case GraphonFamily::Bipartite: v = ((x < 0.5) != (y < 0.5)) ? 0.8 : 0.0; break;
      case GraphonFamily::Grid: {
        const auto r = grid_.rows();
        const auto cell = [r](double t) {
          return std::min<Eigen::Index>(static_cast<Eigen::Index>(t * static_cast<double>(r)), r - 1);
        };
        v = grid_(cell(x), cell(y));
        break;
      }
    }
    return std::clamp(v, 0.0, 1.0);
  }

  std::string name() const { return std::string(family_name(family_)); }

 private:
  GraphonSpec(GraphonFamily family, Matrix grid) : family_(family), grid_(std::move(grid)) {}

  GraphonFamily family_;
  Matrix grid_;
};

inline double evaluate_graphon(const GraphonSpec& spec, double x, double y) { return spec(x, y); }

/// Cell (i,j) holds W((i+0.5)/R, (j+0.5)/R).
inline Matrix discretize_graphon(const GraphonSpec& spec, Eigen::Index resolution) {
  if (resolution < 1) throw DomainError("resolution must be positive");
  const double r = static_cast<double>(resolution);
  Matrix out(resolution, resolution);
  for (Eigen::Index j = 0; j < resolution; ++j) {
    const double y = (static_cast<double>(j) + 0.5) / r;
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double x = (static_cast<double>(i) + 0.5) / r;
      const double v = spec.eval_unchecked(x, y);
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Step functions

inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kMeasureSumTol = 1e-12;

/// A K x K symmetric matrix of block values in [0,1] together with the
/// (nonincreasing, strictly positive) probability of each block.
class StepFunction {
 public:
  StepFunction(Matrix values, Vector measure) : values_(std::move(values)), measure_(std::move(measure)) {
    const auto k = values_.rows();
    if (k == 0 || values_.cols() != k) throw ValidationError("step function values must be a nonempty square matrix");
    if (measure_.size() != k) throw ValidationError("step function measure length must equal K");
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) {
        if (!std::isfinite(values_(i, j))) throw ValidationError("step function values must be finite");
        if (std::abs(values_(i, j) - values_(j, i)) > kSymmetryTol)
          throw ValidationError("step function values must be symmetric");
      }
    }
    values_ = values_.cwiseMax(0.0).cwiseMin(1.0);
    double total = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      if (!(measure_(i) > 0.0) || !std::isfinite(measure_(i)))
        throw ValidationError("step function measure entries must be positive");
      if (i > 0 && measure_(i) > measure_(i - 1) * (1.0 + 1e-14))
        throw ValidationError("step function measure must be nonincreasing");
      total += measure_(i);
    }
    if (std::abs(total - 1.0) > kMeasureSumTol) throw ValidationError("step function measure must sum to 1");
  }

  static StepFunction uniform(Matrix values) {
    const auto k = values.rows();
    return {std::move(values), Vector::Constant(k, 1.0 / static_cast<double>(k))};
  }

  Eigen::Index size() const { return values_.rows(); }
  const Matrix& values() const { return values_; }
  const Vector& measure() const { return measure_; }

 private:
  Matrix values_;
  Vector measure_;
};

// ---------------------------------------------------------------------------
// Observed graphs

using Edge = std::pair<Eigen::Index, Eigen::Index>;

/// Simple undirected graph with a strictly positive node measure.
/// The adjacency is stored with both orientations of every edge.
class ObservedGraph {
 public:
  ObservedGraph(SparseMatrix adjacency, Vector measure)
      : adjacency_(std::move(adjacency)), measure_(std::move(measure)) {
    const auto n = adjacency_.rows();
    if (n < 1 || adjacency_.cols() != n) throw ValidationError("adjacency must be square and nonempty");
    if (measure_.size() != n) throw ValidationError("measure length must equal node count");
    adjacency_.makeCompressed();
    for (Eigen::Index col = 0; col < adjacency_.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(adjacency_, col); it; ++it) {
        if (it.row() == it.col()) throw ValidationError("adjacency diagonal must be zero");
        if (it.value() != 1.0) throw ValidationError("adjacency must be binary");
        if (adjacency_.coeff(it.col(), it.row()) != 1.0) throw ValidationError("adjacency must be symmetric");
      }
    }
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(measure_(i) > 0.0)) throw ValidationError("node measure must be strictly positive");
      total += measure_(i);
    }
    if (std::abs(total - 1.0) > kMeasureSumTol) throw ValidationError("node measure must sum to 1");
  }

  Eigen::Index node_count() const { return adjacency_.rows(); }
  Eigen::Index edge_count() const { return adjacency_.nonZeros() / 2; }
  const SparseMatrix& adjacency() const { return adjacency_; }
  const Vector& measure() const { return measure_; }

  Vector degrees() const {
    Vector d = Vector::Zero(node_count());
    for (Eigen::Index col = 0; col < adjacency_.outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(adjacency_, col); it; ++it) d(it.row()) += it.value();
    return d;
  }

  /// Edges with u < v, ordered by (u, v).
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(static_cast<std::size_t>(edge_count()));
    for (Eigen::Index col = 0; col < adjacency_.outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(adjacency_, col); it; ++it)
        if (it.row() < it.col()) out.emplace_back(it.row(), it.col());
    std::sort(out.begin(), out.end());
    return out;
  }

  Matrix dense() const { return Matrix(adjacency_); }

 private:
  SparseMatrix adjacency_;
  Vector measure_;
};

/// Symmetric binary adjacency from an edge list. Self-loops are rejected;
/// duplicates and both orientations collapse to one edge.
inline SparseMatrix adjacency_from_edges(Eigen::Index n, const std::vector<Edge>& edges) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(edges.size() * 2);
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n) throw DomainError("edge endpoint out of range");
    if (u == v) throw DomainError("self-loops are not allowed");
    triplets.emplace_back(u, v, 1.0);
    triplets.emplace_back(v, u, 1.0);
  }
  SparseMatrix adj(n, n);
  adj.setFromTriplets(triplets.begin(), triplets.end(), [](double, double) { return 1.0; });
  adj.makeCompressed();
  return adj;
}

// ---------------------------------------------------------------------------
// Transport plans

/// A nonnegative coupling with its intended marginals. Feasibility is not
/// enforced at construction because truncated Sinkhorn runs are legitimate
/// intermediate states; callers check `max_residual()`.
class TransportPlan {
 public:
  TransportPlan(Matrix coupling, Vector row_marginal, Vector col_marginal)
      : coupling_(std::move(coupling)), row_(std::move(row_marginal)), col_(std::move(col_marginal)) {
    if (coupling_.rows() != row_.size() || coupling_.cols() != col_.size())
      throw DomainError("transport plan dimensions do not match its marginals");
    if (!coupling_.allFinite()) throw NumericError("transport plan has non-finite entries");
    if ((coupling_.array() < 0.0).any()) throw NumericError("transport plan has negative entries");
  }

  static TransportPlan product(const Vector& row, const Vector& col) {
    return {row * col.transpose(), row, col};
  }

  const Matrix& coupling() const { return coupling_; }
  const Vector& row_marginal() const { return row_; }
  const Vector& col_marginal() const { return col_; }

  double row_residual() const { return (coupling_.rowwise().sum() - row_).cwiseAbs().maxCoeff(); }
  double col_residual() const {
    return (coupling_.colwise().sum().transpose() - col_).cwiseAbs().maxCoeff();
  }
  double max_residual() const { return std::max(row_residual(), col_residual()); }

 private:
  Matrix coupling_;
  Vector row_;
  Vector col_;
};

// ---------------------------------------------------------------------------
// Solver configuration

struct SolverConfig {
  double beta = 0.005;             // proximal (KL) weight
  int outer_iters = 5;             // barycenter alternations
  int sinkhorn_iters = 10;         // proximal steps per transport solve
  double alpha = 0.0002;           // smoothness weight (smoothed variant)
  std::uint64_t seed = 0;

  int scaling_iters = 1;           // minimum Sinkhorn sweeps per proximal step
  double projection_tol = 0.0;     // keep sweeping each step to this column residual; 0 = fixed sweeps
  double marginal_tol = 1e-9;      // feasibility polish on the returned plan; 0 disables
  int max_polish_iters = 20000;
  bool warm_start = false;         // reuse the previous outer iteration's plans

  void validate() const {
    if (!(beta > 0.0)) throw DomainError("beta must be positive");
    if (!(alpha >= 0.0)) throw DomainError("alpha must be nonnegative");
    if (outer_iters < 1 || sinkhorn_iters < 1 || scaling_iters < 1)
      throw DomainError("iteration counts must be positive");
    if (marginal_tol < 0.0 || projection_tol < 0.0) throw DomainError("marginal tolerance must be nonnegative");
  }
};

}  // namespace gwgraphon
