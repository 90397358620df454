// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--cli PATH] [--only N[,N...]] [--allow-fail N[,N...]]
//
// Exit status is 0 when every failing criterion is listed in --allow-fail.

#include "gwgraphon/gwgraphon.hpp"

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>

#include <unistd.h>

using namespace gwgraphon;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream out;
  out.precision(precision);
  out << v;
  return out.str();
}

Matrix random_symmetric(Rng& rng, Eigen::Index n) {
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) m(i, j) = m(j, i) = rng.uniform();
  return m;
}

Vector random_measure(Rng& rng, Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = 0.2 + rng.uniform();
  return v / v.sum();
}

Vector random_sorted_measure(Rng& rng, Eigen::Index n) {
  Vector v = random_measure(rng, n);
  std::sort(v.data(), v.data() + n, std::greater<>());
  return v;
}

bool plan_ok(const TransportPlan& plan, double tol) {
  return plan.max_residual() <= tol && plan.coupling().minCoeff() >= 0.0 && plan.coupling().allFinite();
}

// Convergence-oriented solve for the transport property checks: every
// proximal step is projected onto the marginals, and there are enough steps to
// leave the saddle at the product coupling on near-symmetric instances.
SolverConfig projected_config() {
  SolverConfig cfg;
  cfg.projection_tol = 1e-6;
  cfg.sinkhorn_iters = 50;
  return cfg;
}

Outcome transport_feasibility() {
  const auto start = Clock::now();
  Rng rng(101);
  int bad = 0;
  double worst = 0.0;
  const SolverConfig cfg;
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = rng.uniform_int(2, 50);
    const auto k = rng.uniform_int(1, 20);
    const auto family = kFamilies[static_cast<std::size_t>(rng.uniform_int(0, 12))].family;
    const auto graph = sample_graph(GraphonSpec(family), n, rng.next_u64());
    const Matrix w = random_symmetric(rng, k);
    const Vector mu_w = random_sorted_measure(rng, k);
    const auto result = proximal_gw(graph.adjacency(), graph.measure(), w, mu_w, cfg);
    worst = std::max(worst, result.plan.max_residual());
    if (!plan_ok(result.plan, 1e-6)) ++bad;
  }
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = rng.uniform_int(1, 50);
    const auto k = rng.uniform_int(1, 20);
    Matrix cost(n, k);
    for (Eigen::Index i = 0; i < cost.size(); ++i) cost.data()[i] = rng.uniform();
    const double beta = 0.005 * std::pow(200.0, rng.uniform());
    const auto plan = entropic_ot(cost, random_measure(rng, n), random_measure(rng, k), beta, 10);
    worst = std::max(worst, plan.max_residual());
    if (!plan_ok(plan, 1e-6)) ++bad;
  }
  const double elapsed = seconds_since(start);
  return {bad == 0 && elapsed <= 30.0, "1000 instances, " + std::to_string(bad) + " infeasible, worst residual " +
                                           fmt(worst) + ", " + fmt(elapsed, 3) + " s"};
}

Outcome oracle_equivalence() {
  const auto start = Clock::now();
  Rng rng(202);
  const SolverConfig cfg = projected_config();
  int below = 0;
  int above = 0;
  double worst_ratio = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = rng.uniform_int(1, 4);
    const auto m = rng.uniform_int(1, 4);
    const Matrix a = random_symmetric(rng, n);
    const Matrix b = random_symmetric(rng, m);
    const Vector ma = random_measure(rng, n);
    const Vector mb = random_measure(rng, m);
    const double oracle = gw_distance_exact_small(a, b, ma, mb);
    const double prox = proximal_gw(a, ma, b, mb, cfg).distance_sq;
    if (prox < oracle - 1e-3) ++below;
    if (prox > 1.10 * oracle + 1e-3) ++above;
    worst_ratio = std::max(worst_ratio, (prox + 1e-12) / (oracle + 1e-12));
  }
  const double elapsed = seconds_since(start);
  return {below == 0 && above == 0 && elapsed <= 60.0,
          "200 instances, " + std::to_string(below) + " below band, " + std::to_string(above) +
              " above band, worst ratio " + fmt(worst_ratio) + ", " + fmt(elapsed, 3) + " s"};
}

Outcome self_distance() {
  Rng rng(303);
  const SolverConfig cfg = projected_config();
  int bad = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto k = rng.uniform_int(1, 20);
    const Matrix w = random_symmetric(rng, k);
    const Vector mu = random_sorted_measure(rng, k);
    const double d = proximal_gw(w, mu, w, mu, cfg).distance_sq;
    worst = std::max(worst, d);
    if (d > 1e-3) ++bad;
  }
  return {bad == 0, "100 step functions, " + std::to_string(bad) + " above 1e-3, worst " + fmt(worst)};
}

Outcome sgwb_reductions() {
  const auto graphs = sample_population(GraphonSpec(GraphonFamily::AbsDiff), 10, 100, 200, 404);
  SolverConfig cfg;
  cfg.seed = 404;
  const auto gwb = estimate_gwb(graphs, cfg);
  cfg.alpha = 0.0;
  double alpha_gap = 0.0;
  for (auto mode : {SmoothedSolveMode::PaperClosedForm, SmoothedSolveMode::ExactIterative})
    alpha_gap = std::max(alpha_gap, (estimate_sgwb(graphs, cfg, std::nullopt, mode).values() - gwb.values())
                                        .cwiseAbs()
                                        .maxCoeff());

  Rng rng(405);
  double worst_residual = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto k = rng.uniform_int(2, 32);
    const Matrix b = random_symmetric(rng, k) / static_cast<double>(k * k);
    const Vector mu = random_sorted_measure(rng, k);
    const double alpha = 0.0002 * std::pow(100.0, rng.uniform() - 0.5);
    const Matrix w = solve_smoothed_exact(b, mu, alpha);
    const Matrix x = build_laplacian_filter(k).transpose() * build_laplacian_filter(k);
    const Matrix lhs = 2.0 * alpha * x * w * x + mu.asDiagonal() * w * mu.asDiagonal();
    worst_residual = std::max(worst_residual, (lhs - b).norm() / b.norm());
  }

  double k1_gap = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix b = Matrix::Constant(1, 1, rng.uniform());
    const Vector mu = Vector::Ones(1);
    k1_gap = std::max(k1_gap, std::abs(smoothed_update_from_pullback(b, mu, 0.0002, SmoothedSolveMode::PaperClosedForm)(0, 0) -
                                       smoothed_update_from_pullback(b, mu, 0.0002, SmoothedSolveMode::ExactIterative)(0, 0)));
  }
  return {alpha_gap <= 1e-10 && worst_residual <= 1e-8 && k1_gap <= 1e-10,
          "alpha=0 gap " + fmt(alpha_gap) + ", exact residual " + fmt(worst_residual) + ", K=1 gap " + fmt(k1_gap)};
}

BenchmarkOptions hard_grid(std::vector<GraphonFamily> families, std::vector<Method> methods, int trials,
                           Eigen::Index n_min, Eigen::Index n_max, std::uint64_t seed) {
  BenchmarkOptions opts;
  opts.families = std::move(families);
  opts.methods = std::move(methods);
  opts.trials = trials;
  opts.count = 10;
  opts.n_min = n_min;
  opts.n_max = n_max;
  opts.seed = seed;
  opts.metric = MetricChoice::Gw;
  opts.gw_eval.resolution = 300;
  return opts;
}

struct MethodStats {
  double mean = 0.0;
  double max_runtime = 0.0;
  int failed = 0;
};

MethodStats stats_of(const std::vector<BenchmarkCell>& cells, std::string_view family, std::string_view method) {
  MethodStats s;
  int n = 0;
  for (const auto& c : cells) {
    if (c.row.graphon_family != family || c.row.method != method) continue;
    if (!c.row.value) {
      ++s.failed;
      continue;
    }
    s.mean += *c.row.value;
    s.max_runtime = std::max(s.max_runtime, c.runtime_seconds);
    ++n;
  }
  s.mean = n > 0 ? s.mean / n : std::numeric_limits<double>::infinity();
  return s;
}

Outcome hard_to_align() {
  const auto fixed =
      run_benchmark(hard_grid({GraphonFamily::AbsDiff}, {Method::Sgwb, Method::Gwb}, 10, 200, 200, 505));
  const auto mixed = run_benchmark(hard_grid({GraphonFamily::AbsDiff}, {Method::Sgwb}, 10, 100, 300, 506));
  const auto sgwb = stats_of(fixed, "abs_diff", "sgwb");
  const auto gwb = stats_of(fixed, "abs_diff", "gwb");
  const auto sgwb_mixed = stats_of(mixed, "abs_diff", "sgwb");
  const double slowest = std::max({sgwb.max_runtime, gwb.max_runtime, sgwb_mixed.max_runtime});
  const bool ok = sgwb.failed + gwb.failed + sgwb_mixed.failed == 0 && sgwb.mean <= 0.10 && gwb.mean <= 0.12 &&
                  sgwb_mixed.mean <= 0.15 && slowest <= 60.0;
  return {ok, "N=200 sgwb " + fmt(sgwb.mean) + " gwb " + fmt(gwb.mean) + ", N in [100,300] sgwb " +
                  fmt(sgwb_mixed.mean) + ", slowest trial " + fmt(slowest, 3) + " s"};
}

Outcome ranking() {
  const std::vector<GraphonFamily> families{GraphonFamily::AbsDiff, GraphonFamily::OneMinusAbsDiff};
  const auto cells =
      run_benchmark(hard_grid(families, {Method::Gwb, Method::Sgwb, Method::Usvt, Method::Naive}, 5, 100, 300, 606));
  bool ok = true;
  std::string detail;
  for (auto family : families) {
    const auto name = family_name(family);
    const auto g = stats_of(cells, name, "gwb");
    const auto s = stats_of(cells, name, "sgwb");
    const auto u = stats_of(cells, name, "usvt");
    const auto n = stats_of(cells, name, "naive");
    ok = ok && std::max(g.mean, s.mean) < std::min(u.mean, n.mean);
    detail += (detail.empty() ? "" : "; ") + std::string(name) + ": gwb " + fmt(g.mean) + " sgwb " + fmt(s.mean) +
              " usvt " + fmt(u.mean) + " naive " + fmt(n.mean);
  }
  return {ok, detail};
}

Outcome constant_graphon() {
  const auto graphs = sample_population(GraphonSpec::constant(0.5), 20, 200, 200, 707);
  SolverConfig cfg;
  cfg.seed = 707;
  const auto w = estimate_gwb(graphs, cfg);
  const double dev = (w.values().array() - 0.5).abs().maxCoeff();
  return {dev <= 0.08, "K=" + std::to_string(w.size()) + ", max |W - 0.5| = " + fmt(dev)};
}

Outcome mixture_recovery() {
  double total = 0.0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto graphs = sample_population(GraphonSpec(GraphonFamily::Product), 20, 200, 200, derive_seed(808, seed));
    const auto other =
        sample_population(GraphonSpec(GraphonFamily::OneMinusAbsDiff), 20, 200, 200, derive_seed(809, seed));
    graphs.insert(graphs.end(), other.begin(), other.end());
    std::vector<int> truth(40, 0);
    std::fill(truth.begin() + 20, truth.end(), 1);
    SolverConfig cfg;
    cfg.seed = seed;
    const double acc = clustering_accuracy(assign_clusters(estimate_mixture(graphs, 2, cfg, 5)), truth);
    total += acc;
    per_seed += (per_seed.empty() ? "" : " ") + fmt(acc, 3);
  }
  const double mean = total / 5.0;

  const auto graphs = sample_population(GraphonSpec(GraphonFamily::Mean), 6, 80, 120, 810);
  SolverConfig cfg;
  cfg.seed = 810;
  const auto single = estimate_mixture(graphs, 1, cfg);
  const double gap = (single.components[0].values() - estimate_gwb(graphs, cfg).values()).cwiseAbs().maxCoeff();
  return {mean >= 0.85 && gap <= 1e-9,
          "mean accuracy " + fmt(mean, 3) + " (" + per_seed + "), C=1 gap " + fmt(gap)};
}

double time_gwb(Eigen::Index n, std::uint64_t seed) {
  const auto graphs = sample_population(GraphonSpec(GraphonFamily::AbsDiff), 10, n, n, seed);
  SolverConfig cfg;
  cfg.seed = seed;
  const auto start = Clock::now();
  (void)estimate_gwb(graphs, cfg);
  return seconds_since(start);
}

double time_transport(Eigen::Index n, Eigen::Index k) {
  const auto graph = sample_graph(GraphonSpec(GraphonFamily::AbsDiff), n, 909);
  Rng rng(910);
  const Matrix w = random_symmetric(rng, k);
  const Vector mu = Vector::Constant(k, 1.0 / static_cast<double>(k));
  const SolverConfig cfg;
  (void)proximal_gw(graph.adjacency(), graph.measure(), w, mu, cfg);
  const int reps = 10;
  const auto start = Clock::now();
  for (int r = 0; r < reps; ++r) (void)proximal_gw(graph.adjacency(), graph.measure(), w, mu, cfg);
  return seconds_since(start) / reps;
}

Outcome runtime_envelope() {
  const double t200 = time_gwb(200, 911);
  const double t500 = time_gwb(500, 912);
  const double ratio = time_transport(500, 37) / time_transport(250, 37);
  return {t200 <= 5.0 && t500 <= 15.0 && ratio <= 5.0,
          "N=200 " + fmt(t200, 3) + " s, N=500 " + fmt(t500, 3) + " s, per-solve time ratio N 250->500 at K=37 " +
              fmt(ratio, 3)};
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

Outcome cli_determinism(const std::string& cli) {
  if (cli.empty()) return {false, "no --cli binary given"};
  const auto dir = fs::temp_directory_path() / ("gwgraphon_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto run = [&](const std::string& csv, const std::string& extra) {
    const std::string cmd = shell_quote(cli) +
                            " benchmark --families xy,abs_diff --methods gwb,sgwb,usvt --trials 2 --count 5"
                            " --nodes 60:100 --seed 10 --resolution 150 --csv " +
                            shell_quote((dir / csv).string()) + extra + " > /dev/null";
    return std::system(cmd.c_str());
  };
  const int rc1 = run("first.csv", "");
  const int rc2 = run("second.csv", " --jobs 2");
  auto slurp = [&](const char* name) {
    std::ifstream in(dir / name, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  };
  const auto a = slurp("first.csv");
  const auto b = slurp("second.csv");
  fs::remove_all(dir);
  const bool ok = rc1 == 0 && rc2 == 0 && !a.empty() && a == b;
  return {ok, "exit codes " + std::to_string(rc1) + "/" + std::to_string(rc2) + ", " + std::to_string(a.size()) +
                  " bytes, " + (a == b ? "identical" : "different")};
}

std::set<int> parse_list(const std::string& text) {
  std::set<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.insert(std::stoi(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  std::set<int> only;
  std::set<int> allowed;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (i + 1 >= argc) {
      std::cerr << "missing value for " << arg << '\n';
      return 2;
    }
    if (arg == "--cli") {
      cli = argv[++i];
    } else if (arg == "--only") {
      only = parse_list(argv[++i]);
    } else if (arg == "--allow-fail") {
      allowed = parse_list(argv[++i]);
    } else {
      std::cerr << "unknown argument " << arg << '\n';
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"transport feasibility", transport_feasibility},
      {"GW oracle equivalence", oracle_equivalence},
      {"self-distance", self_distance},
      {"SGWB reductions", sgwb_reductions},
      {"hard-to-align accuracy", hard_to_align},
      {"ranking against baselines", ranking},
      {"constant-graphon consistency", constant_graphon},
      {"mixture recovery", mixture_recovery},
      {"runtime envelope", runtime_envelope},
      {"CLI benchmark determinism", [&] { return cli_determinism(cli); }},
  };

  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.contains(id)) continue;
    const auto start = Clock::now();
    Outcome outcome{false, ""};
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (outcome.pass ? "PASS" : "FAIL") << ' ' << id << ' ' << criteria[i].first << ": " << outcome.detail
              << " [" << fmt(seconds_since(start), 3) << " s]";
    if (!outcome.pass && allowed.contains(id)) std::cout << " (known failure)";
    std::cout << std::endl;
    if (!outcome.pass && !allowed.contains(id)) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
