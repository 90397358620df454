#pragma once

// Synthetic benchmark grid: families x methods x trials, each cell sampling a
// population, estimating a step function and scoring it against the truth.

#include "gwgraphon/eval.hpp"
#include "gwgraphon/io.hpp"
#include "gwgraphon/sampling.hpp"
#include "gwgraphon/smoothed.hpp"

#include <atomic>
#include <chrono>
#include <thread>

namespace gwgraphon {

enum class Method { Gwb, Sgwb, Usvt, Naive };

inline constexpr std::array<std::pair<Method, std::string_view>, 4> kMethods{{
    {Method::Gwb, "gwb"},
    {Method::Sgwb, "sgwb"},
    {Method::Usvt, "usvt"},
    {Method::Naive, "naive"},
}};

inline std::string_view method_name(Method m) {
  for (const auto& [method, name] : kMethods)
    if (method == m) return name;
  return "?";
}

inline Method parse_method(std::string_view name) {
  for (const auto& [method, known] : kMethods)
    if (known == name) return method;
  throw DomainError("unknown method '" + std::string(name) + "' (expected gwb, sgwb, usvt or naive)");
}

struct EstimateOptions {
  SolverConfig cfg;
  std::optional<Eigen::Index> k;
  SmoothedSolveMode mode = SmoothedSolveMode::ExactIterative;
};

struct EstimateResult {
  StepFunction estimate;
  std::optional<double> objective;  // only for the barycenter methods
};

inline EstimateResult run_method(Method method, const std::vector<ObservedGraph>& graphs, const EstimateOptions& opts) {
  switch (method) {
    case Method::Gwb: {
      auto fit = estimate_gwb_fit(graphs, opts.cfg, opts.k);
      return {fit.step_function(), fit.objective.back()};
    }
    case Method::Sgwb: {
      auto fit = estimate_sgwb_fit(graphs, opts.cfg, opts.k, opts.mode);
      return {fit.step_function(), fit.objective.back()};
    }
    case Method::Usvt:
      return {usvt_estimate(graphs), std::nullopt};
    case Method::Naive:
      return {naive_average_estimate(graphs), std::nullopt};
  }
  throw DomainError("run_method: unknown method");
}

enum class MetricChoice { Auto, Mse, Gw };

struct BenchmarkOptions {
  std::vector<GraphonFamily> families;
  std::vector<Method> methods;
  int trials = 10;
  int count = 10;
  Eigen::Index n_min = 200;
  Eigen::Index n_max = 200;
  std::uint64_t seed = 0;
  EstimateOptions estimate;
  MetricChoice metric = MetricChoice::Auto;  // auto: gw for hard-to-align families, mse otherwise
  GwEvalOptions gw_eval;
  Eigen::Index mse_resolution = 1000;
  bool record_runtime = false;  // runtimes make the CSV machine dependent
  int jobs = 1;
};

struct BenchmarkCell {
  ResultRow row;
  double runtime_seconds = 0.0;  // estimation wall clock, always measured
  std::string error;
};

/// Population seed for (family, trial): shared by every method so they see
/// the same graphs.
inline std::uint64_t population_seed(std::uint64_t seed, GraphonFamily family, int trial) {
  return derive_seed(derive_seed(seed, stable_hash(family_name(family))), static_cast<std::uint64_t>(trial));
}

inline std::uint64_t cell_seed(std::uint64_t seed, GraphonFamily family, Method method, int trial) {
  return derive_seed(population_seed(seed, family, trial), stable_hash(method_name(method)));
}

inline bool uses_gw_metric(MetricChoice choice, GraphonFamily family) {
  return choice == MetricChoice::Gw || (choice == MetricChoice::Auto && is_hard_to_align(family));
}

inline BenchmarkCell run_benchmark_cell(const BenchmarkOptions& opts, GraphonFamily family, Method method, int trial) {
  BenchmarkCell cell;
  auto& row = cell.row;
  row.graphon_family = std::string(family_name(family));
  row.method = std::string(method_name(method));
  row.trial = trial;
  row.m = opts.count;
  row.n_min = opts.n_min;
  row.n_max = opts.n_max;
  row.seed = cell_seed(opts.seed, family, method, trial);
  const bool gw = uses_gw_metric(opts.metric, family);
  row.metric_name = gw ? "gw" : "mse";
  try {
    const GraphonSpec truth(family);
    const auto graphs =
        sample_population(truth, opts.count, opts.n_min, opts.n_max, population_seed(opts.seed, family, trial));
    EstimateOptions est = opts.estimate;
    est.cfg.seed = row.seed;
    const auto start = std::chrono::steady_clock::now();
    const auto result = run_method(method, graphs, est);
    cell.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (gw) {
      GwEvalOptions eval = opts.gw_eval;
      eval.seed = row.seed;
      row.value = gw_error(result.estimate, truth, eval);
    } else {
      row.value = mse_error(result.estimate, truth, opts.mse_resolution);
    }
    if (opts.record_runtime) row.runtime_seconds = cell.runtime_seconds;
  } catch (const std::exception& e) {
    row.metric_name = "error";
    row.value.reset();
    cell.error = e.what();
  }
  return cell;
}

/// Runs every cell, on up to opts.jobs threads. The result order is the grid
/// order (family, method, trial) regardless of completion order.
inline std::vector<BenchmarkCell> run_benchmark(const BenchmarkOptions& opts) {
  if (opts.families.empty() || opts.methods.empty()) throw DomainError("benchmark: empty family or method list");
  if (opts.trials < 1) throw DomainError("benchmark: trials must be positive");
  if (opts.count < 1) throw DomainError("benchmark: count must be positive");
  if (opts.n_min < 2 || opts.n_max < opts.n_min) throw DomainError("benchmark: invalid node range");
  if (opts.jobs < 1) throw DomainError("benchmark: jobs must be positive");
  opts.estimate.cfg.validate();

  struct Task {
    GraphonFamily family;
    Method method;
    int trial;
  };
  std::vector<Task> tasks;
  for (auto f : opts.families)
    for (auto m : opts.methods)
      for (int t = 0; t < opts.trials; ++t) tasks.push_back({f, m, t});

  std::vector<BenchmarkCell> cells(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++)
      cells[i] = run_benchmark_cell(opts, tasks[i].family, tasks[i].method, tasks[i].trial);
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(opts.jobs), tasks.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  return cells;
}

struct CellSummary {
  std::string family;
  std::string method;
  std::string metric;
  int completed = 0;
  int failed = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation over completed trials
  double mean_runtime = 0.0;
};

/// mean +- std of the metric per (family, method).
inline std::vector<CellSummary> summarize_benchmark(const std::vector<BenchmarkCell>& cells) {
  std::map<std::pair<std::string, std::string>, std::vector<const BenchmarkCell*>> groups;
  for (const auto& c : cells) groups[{c.row.graphon_family, c.row.method}].push_back(&c);
  std::vector<CellSummary> out;
  for (const auto& [key, members] : groups) {
    CellSummary s{key.first, key.second, "", 0, 0, 0.0, 0.0, 0.0};
    std::vector<double> values;
    for (const auto* c : members) {
      if (c->row.value) {
        values.push_back(*c->row.value);
        s.metric = c->row.metric_name;
        s.mean_runtime += c->runtime_seconds;
      } else {
        ++s.failed;
      }
    }
    s.completed = static_cast<int>(values.size());
    if (!values.empty()) {
      const double n = static_cast<double>(values.size());
      for (double v : values) s.mean += v / n;
      for (double v : values) s.stddev += (v - s.mean) * (v - s.mean) / n;
      s.stddev = std::sqrt(s.stddev);
      s.mean_runtime /= n;
    }
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<ResultRow> benchmark_rows(const std::vector<BenchmarkCell>& cells) {
  std::vector<ResultRow> rows;
  rows.reserve(cells.size());
  for (const auto& c : cells) rows.push_back(c.row);
  return rows;
}

}  // namespace gwgraphon
