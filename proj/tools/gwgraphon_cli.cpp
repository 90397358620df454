// gwgraphon: sample graph populations, estimate graphons, cluster graphs and
// run the synthetic benchmark grid.
//
// Exit status: 0 success, 2 usage error, 1 runtime error. Each command prints
// a single key=value summary line on stdout (benchmark prints one per cell).

#include "gwgraphon/gwgraphon.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace gwgraphon;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

GraphonSpec parse_truth(const std::string& text) {
  if (text.rfind("grid:", 0) == 0) {
    // The values of a step-function file, read as a uniform grid.
    return GraphonSpec::grid(read_step_function(text.substr(5)).values());
  }
  const auto family = parse_family(text);
  if (!family) throw UsageError("unknown graphon '" + text + "'; expected grid:PATH or one of: " + family_names_joined());
  return GraphonSpec(*family);
}

std::string truth_label(const std::string& text) {
  return text.rfind("grid:", 0) == 0 ? std::string("grid") : text;
}

std::pair<Eigen::Index, Eigen::Index> parse_nodes(const std::string& text) {
  auto to_index = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return static_cast<Eigen::Index>(v);
    } catch (const std::exception&) {
      throw UsageError("--nodes expects N or MIN:MAX, got '" + text + "'");
    }
  };
  const auto colon = text.find(':');
  const auto lo = to_index(text.substr(0, colon));
  const auto hi = colon == std::string::npos ? lo : to_index(text.substr(colon + 1));
  if (lo < 2 || hi < lo) throw UsageError("--nodes needs 2 <= MIN <= MAX");
  return {lo, hi};
}

std::optional<Eigen::Index> parse_k(const std::string& text) {
  if (text == "auto") return std::nullopt;
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used == text.size() && v >= 1) return static_cast<Eigen::Index>(v);
  } catch (const std::exception&) {
  }
  throw UsageError("--k expects 'auto' or a positive integer, got '" + text + "'");
}

SmoothedSolveMode parse_mode(const std::string& text) {
  if (text == "paper") return SmoothedSolveMode::PaperClosedForm;
  if (text == "exact") return SmoothedSolveMode::ExactIterative;
  throw UsageError("--mode expects paper or exact");
}

/// Edge-list files (*.txt) in name order.
std::vector<fs::path> graph_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw UsageError("input directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw UsageError("no edge-list files (*.txt) in " + dir.string());
  return files;
}

std::vector<ObservedGraph> read_graph_dir(const fs::path& dir) {
  std::vector<ObservedGraph> graphs;
  for (const auto& f : graph_files(dir)) graphs.push_back(read_edge_list(f));
  return graphs;
}

std::vector<int> read_labels(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open labels file " + path.string());
  std::vector<int> labels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      labels.push_back(std::stoi(line));
    } catch (const std::exception&) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected an integer label");
    }
  }
  return labels;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

struct SolverFlags {
  double beta = 0.005;
  int outer = 5;
  int sinkhorn = 10;
  double alpha = 0.0002;
  std::uint64_t seed = 0;
  std::string k = "auto";

  void add(CLI::App* cmd, bool with_alpha) {
    cmd->add_option("--beta", beta, "proximal weight")->capture_default_str();
    cmd->add_option("--outer", outer, "barycenter alternations")->capture_default_str();
    cmd->add_option("--sinkhorn", sinkhorn, "proximal steps per transport solve")->capture_default_str();
    if (with_alpha) cmd->add_option("--alpha", alpha, "smoothness weight (sgwb)")->capture_default_str();
    cmd->add_option("--k", k, "partition count: auto or an integer")->capture_default_str();
    cmd->add_option("--seed", seed, "random seed")->capture_default_str();
  }

  SolverConfig config() const {
    SolverConfig cfg;
    cfg.beta = beta;
    cfg.outer_iters = outer;
    cfg.sinkhorn_iters = sinkhorn;
    cfg.alpha = alpha;
    cfg.seed = seed;
    try {
      cfg.validate();
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
    return cfg;
  }
};

// ---------------------------------------------------------------------------

struct SampleArgs {
  std::string graphon;
  int count = 10;
  std::string nodes = "200";
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_sample(const SampleArgs& a) {
  const auto spec = parse_truth(a.graphon);
  if (a.count < 1) throw UsageError("--count must be positive");
  const auto [n_min, n_max] = parse_nodes(a.nodes);
  const fs::path out(a.out);
  ensure_dir(out);
  const auto plan = plan_population(a.count, n_min, n_max, a.seed);
  std::ofstream manifest(out / "manifest.csv");
  if (!manifest) throw IoError("cannot write " + (out / "manifest.csv").string());
  manifest << "file,nodes,seed\n";
  std::size_t edges = 0;
  for (std::size_t m = 0; m < plan.size(); ++m) {
    char name[32];
    std::snprintf(name, sizeof name, "graph_%04zu.txt", m);
    const auto g = sample_graph(spec, plan[m].nodes, plan[m].seed);
    write_edge_list(g, out / name);
    edges += static_cast<std::size_t>(g.edge_count());
    manifest << name << ',' << plan[m].nodes << ',' << plan[m].seed << '\n';
  }
  std::cout << "command=sample graphon=" << truth_label(a.graphon) << " count=" << a.count << " nodes=" << n_min
            << ':' << n_max << " edges=" << edges << " out=" << out.string() << '\n';
  return 0;
}

struct EstimateArgs {
  std::string in;
  std::string method = "gwb";
  std::string mode = "exact";
  std::string out;
  std::string heatmap;
  Eigen::Index heatmap_size = 1000;
  SolverFlags solver;
};

int cmd_estimate(const EstimateArgs& a) {
  Method method;
  try {
    method = parse_method(a.method);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  EstimateOptions opts{a.solver.config(), parse_k(a.solver.k), parse_mode(a.mode)};
  const auto graphs = read_graph_dir(a.in);
  const auto start = std::chrono::steady_clock::now();
  const auto result = run_method(method, graphs, opts);
  const double runtime = seconds_since(start);
  write_step_function(result.estimate, a.out);
  if (!a.heatmap.empty()) {
    const auto size = std::max(a.heatmap_size, result.estimate.size());
    write_heatmap(upsample_step_function(result.estimate, size), a.heatmap);
  }
  std::cout << "command=estimate method=" << a.method << " graphs=" << graphs.size() << " K=" << result.estimate.size()
            << " runtime_seconds=" << fmt(runtime)
            << " objective=" << (result.objective ? format_double(*result.objective) : std::string("na")) << '\n';
  return 0;
}

struct ClusterArgs {
  std::string in;
  int clusters = 2;
  int rounds = 5;
  std::string out;
  std::string labels;
  int limit = 0;
  std::optional<double> assignment_beta;
  SolverFlags solver;
};

int cmd_cluster(const ClusterArgs& a) {
  std::vector<ObservedGraph> graphs;
  std::optional<std::vector<int>> truth;
  if (a.in.rfind("tu:", 0) == 0) {
    auto corpus = read_tu_dataset(a.in.substr(3), a.limit > 0 ? std::optional<std::size_t>(a.limit) : std::nullopt);
    std::vector<int> labels;
    for (auto& item : corpus) {
      graphs.push_back(std::move(item.graph));
      labels.push_back(item.label);
    }
    truth = std::move(labels);
  } else {
    graphs = read_graph_dir(a.in);
    if (a.limit > 0 && graphs.size() > static_cast<std::size_t>(a.limit)) graphs.erase(graphs.begin() + a.limit, graphs.end());
  }
  if (!a.labels.empty()) {
    auto labels = read_labels(a.labels);
    if (a.limit > 0 && labels.size() > static_cast<std::size_t>(a.limit)) labels.resize(static_cast<std::size_t>(a.limit));
    if (labels.size() != graphs.size())
      throw UsageError("--labels has " + std::to_string(labels.size()) + " entries for " +
                       std::to_string(graphs.size()) + " graphs");
    truth = std::move(labels);
  }
  if (a.clusters < 1) throw UsageError("--clusters must be positive");
  if (static_cast<std::size_t>(a.clusters) > graphs.size())
    throw UsageError("--clusters " + std::to_string(a.clusters) + " exceeds the graph count " +
                     std::to_string(graphs.size()));
  if (a.rounds < 1) throw UsageError("--rounds must be positive");

  MixtureOptions opts;
  opts.clusters = a.clusters;
  opts.rounds = a.rounds;
  opts.assignment_beta = a.assignment_beta;
  opts.k = parse_k(a.solver.k);
  const auto start = std::chrono::steady_clock::now();
  const auto model = estimate_mixture(graphs, a.solver.config(), opts);
  const double runtime = seconds_since(start);
  const auto predicted = assign_clusters(model);

  const fs::path out(a.out);
  ensure_dir(out);
  for (std::size_t c = 0; c < model.components.size(); ++c)
    write_step_function(model.components[c], out / ("component_" + std::to_string(c) + ".txt"));
  {
    std::ofstream csv(out / "assignment.csv");
    if (!csv) throw IoError("cannot write " + (out / "assignment.csv").string());
    const Matrix& p = model.assignment.coupling();
    for (Eigen::Index c = 0; c < p.rows(); ++c) {
      for (Eigen::Index m = 0; m < p.cols(); ++m) csv << (m ? "," : "") << format_double(p(c, m));
      csv << '\n';
    }
    std::ofstream lab(out / "labels.txt");
    if (!lab) throw IoError("cannot write " + (out / "labels.txt").string());
    for (int l : predicted) lab << l << '\n';
  }
  std::cout << "command=cluster graphs=" << graphs.size() << " clusters=" << a.clusters << " rounds=" << a.rounds
            << " objective=" << format_double(model.objective.back()) << " runtime_seconds=" << fmt(runtime);
  if (truth) std::cout << " accuracy=" << format_double(clustering_accuracy(predicted, *truth));
  std::cout << '\n';
  return 0;
}

struct EvalArgs {
  std::string estimate;
  std::string truth;
  std::string metric = "gw";
  Eigen::Index resolution = 1000;
  std::uint64_t seed = 0;
  std::string csv;
  std::string label;
};

void append_result(const fs::path& path, const ResultRow& row) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot append to " + path.string());
  std::ostringstream buf;
  write_results_csv({row}, buf);
  const std::string text = buf.str();
  out << (fresh ? text : text.substr(text.find('\n') + 1));
}

int cmd_eval(const EvalArgs& a) {
  if (a.metric != "mse" && a.metric != "gw") throw UsageError("--metric expects mse or gw");
  if (a.resolution < 1) throw UsageError("--resolution must be positive");
  const auto truth = parse_truth(a.truth);
  const auto estimate = read_step_function(a.estimate);
  if (a.resolution < estimate.size() && a.metric == "mse")
    throw UsageError("--resolution must be at least K=" + std::to_string(estimate.size()) + " for mse");
  const auto start = std::chrono::steady_clock::now();
  double value = 0.0;
  if (a.metric == "mse") {
    value = mse_error(estimate, truth, a.resolution);
  } else {
    GwEvalOptions opts;
    opts.resolution = a.resolution;
    opts.seed = a.seed;
    value = gw_error(estimate, truth, opts);
  }
  const double runtime = seconds_since(start);
  if (!a.csv.empty()) {
    ResultRow row;
    row.graphon_family = truth_label(a.truth);
    row.method = a.label.empty() ? fs::path(a.estimate).stem().string() : a.label;
    row.metric_name = a.metric;
    row.value = value;
    row.seed = a.seed;
    append_result(a.csv, row);
  }
  std::cout << "command=eval metric=" << a.metric << " value=" << format_double(value) << " K=" << estimate.size()
            << " resolution=" << a.resolution << " runtime_seconds=" << fmt(runtime) << '\n';
  return 0;
}

struct BenchmarkArgs {
  std::string families = "all13";
  std::string methods = "gwb,sgwb,usvt,naive";
  int trials = 10;
  int count = 10;
  std::string nodes = "200";
  std::string csv;
  std::string metric = "auto";
  std::string mode = "exact";
  Eigen::Index resolution = 1000;
  int jobs = 1;
  bool record_runtime = false;
  SolverFlags solver;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

int cmd_benchmark(const BenchmarkArgs& a) {
  BenchmarkOptions opts;
  if (a.families == "all13" || a.families == "all") {
    for (const auto& info : kFamilies) opts.families.push_back(info.family);
  } else if (a.families == "hard") {
    opts.families.assign(kHardToAlign.begin(), kHardToAlign.end());
  } else {
    for (const auto& name : split_list(a.families)) {
      const auto family = parse_family(name);
      if (!family)
        throw UsageError("unknown graphon '" + name + "'; expected all13, hard or names from: " +
                         family_names_joined());
      opts.families.push_back(*family);
    }
  }
  for (const auto& name : split_list(a.methods)) {
    try {
      opts.methods.push_back(parse_method(name));
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
  }
  if (opts.families.empty() || opts.methods.empty()) throw UsageError("empty --families or --methods");
  if (a.trials < 1 || a.count < 1 || a.jobs < 1) throw UsageError("--trials, --count and --jobs must be positive");
  if (a.resolution < 1) throw UsageError("--resolution must be positive");
  if (a.metric == "auto") {
    opts.metric = MetricChoice::Auto;
  } else if (a.metric == "mse") {
    opts.metric = MetricChoice::Mse;
  } else if (a.metric == "gw") {
    opts.metric = MetricChoice::Gw;
  } else {
    throw UsageError("--metric expects auto, mse or gw");
  }
  std::tie(opts.n_min, opts.n_max) = parse_nodes(a.nodes);
  opts.trials = a.trials;
  opts.count = a.count;
  opts.seed = a.solver.seed;
  opts.estimate = {a.solver.config(), parse_k(a.solver.k), parse_mode(a.mode)};
  opts.gw_eval.resolution = a.resolution;
  opts.mse_resolution = a.resolution;
  opts.record_runtime = a.record_runtime;
  opts.jobs = a.jobs;

  const auto cells = run_benchmark(opts);
  for (const auto& c : cells)
    if (!c.error.empty())
      std::cerr << "cell " << c.row.graphon_family << '/' << c.row.method << '/' << c.row.trial
                << " failed: " << c.error << '\n';
  if (!a.csv.empty()) write_results_csv(benchmark_rows(cells), fs::path(a.csv));
  for (const auto& s : summarize_benchmark(cells)) {
    std::cout << "command=benchmark family=" << s.family << " method=" << s.method
              << " metric=" << (s.metric.empty() ? std::string("none") : s.metric) << " mean=" << fmt(s.mean)
              << " std=" << fmt(s.stddev) << " runtime_mean_seconds=" << fmt(s.mean_runtime)
              << " completed=" << s.completed << " failed=" << s.failed << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graphon estimation from unaligned graphs via Gromov-Wasserstein barycenters"};
  app.require_subcommand(1);

  SampleArgs sample;
  auto* s = app.add_subcommand("sample", "sample a graph population from a graphon");
  s->add_option("--graphon", sample.graphon, "family name or grid:PATH")->required();
  s->add_option("--count", sample.count, "number of graphs")->capture_default_str();
  s->add_option("--nodes", sample.nodes, "N or MIN:MAX")->capture_default_str();
  s->add_option("--seed", sample.seed, "random seed")->capture_default_str();
  s->add_option("--out", sample.out, "output directory")->required();

  EstimateArgs estimate;
  auto* e = app.add_subcommand("estimate", "estimate a step function from a directory of edge lists");
  e->add_option("--in", estimate.in, "directory of edge-list files")->required();
  e->add_option("--method", estimate.method, "gwb, sgwb, usvt or naive")->capture_default_str();
  e->add_option("--mode", estimate.mode, "sgwb solve: paper or exact")->capture_default_str();
  e->add_option("--out", estimate.out, "step-function output file")->required();
  e->add_option("--heatmap", estimate.heatmap, "optional PGM output");
  e->add_option("--heatmap-size", estimate.heatmap_size, "heatmap side in pixels")->capture_default_str();
  estimate.solver.add(e, true);

  ClusterArgs cluster;
  auto* c = app.add_subcommand("cluster", "fit a mixture of barycenters and cluster the graphs");
  c->add_option("--in", cluster.in, "directory of edge lists or tu:DIR")->required();
  c->add_option("--clusters", cluster.clusters, "number of components")->capture_default_str();
  c->add_option("--rounds", cluster.rounds, "alternation rounds")->capture_default_str();
  c->add_option("--out", cluster.out, "output directory")->required();
  c->add_option("--labels", cluster.labels, "truth labels, one per line in file order");
  c->add_option("--limit", cluster.limit, "use only the first N graphs (0 = all)")->capture_default_str();
  c->add_option("--assignment-beta", cluster.assignment_beta, "entropic weight of the assignment update");
  cluster.solver.add(c, false);

  EvalArgs eval;
  auto* v = app.add_subcommand("eval", "score a step function against a ground-truth graphon");
  v->add_option("--estimate", eval.estimate, "step-function file")->required();
  v->add_option("--truth", eval.truth, "family name or grid:PATH")->required();
  v->add_option("--metric", eval.metric, "mse or gw")->capture_default_str();
  v->add_option("--resolution", eval.resolution, "truth grid resolution")->capture_default_str();
  v->add_option("--seed", eval.seed, "seed for the perturbed transport starts")->capture_default_str();
  v->add_option("--csv", eval.csv, "append the result to this CSV");
  v->add_option("--label", eval.label, "method column for --csv (default: estimate file stem)");

  BenchmarkArgs bench;
  auto* b = app.add_subcommand("benchmark", "run the families x methods x trials grid");
  b->add_option("--families", bench.families, "comma list, all13 or hard")->capture_default_str();
  b->add_option("--methods", bench.methods, "comma list of gwb, sgwb, usvt, naive")->capture_default_str();
  b->add_option("--trials", bench.trials, "trials per cell")->capture_default_str();
  b->add_option("--count", bench.count, "graphs per trial")->capture_default_str();
  b->add_option("--nodes", bench.nodes, "N or MIN:MAX")->capture_default_str();
  b->add_option("--csv", bench.csv, "results CSV");
  b->add_option("--metric", bench.metric, "auto (gw for hard-to-align families), mse or gw")->capture_default_str();
  b->add_option("--mode", bench.mode, "sgwb solve: paper or exact")->capture_default_str();
  b->add_option("--resolution", bench.resolution, "evaluation resolution")->capture_default_str();
  b->add_option("--jobs", bench.jobs, "parallel cells")->capture_default_str();
  b->add_flag("--record-runtime", bench.record_runtime, "write runtimes to the CSV (breaks byte determinism)");
  bench.solver.add(b, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 2;
  }

  try {
    if (*s) return cmd_sample(sample);
    if (*e) return cmd_estimate(estimate);
    if (*c) return cmd_cluster(cluster);
    if (*v) return cmd_eval(eval);
    if (*b) return cmd_benchmark(bench);
  } catch (const UsageError& err) {
    std::cerr << "usage error: " << err.what() << '\n';
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 2;
}
