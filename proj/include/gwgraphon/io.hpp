#pragma once

// Text formats for graphs, step functions and benchmark results; PGM heatmaps;
// TUDataset-style corpora.

#include "gwgraphon/sampling.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace gwgraphon {

namespace fs = std::filesystem;

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <class T>
std::optional<T> parse_number(std::string_view token) {
  T value{};
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

inline std::string where(const fs::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

inline std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

inline std::ofstream open_output(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace detail

/// Shortest round-trip-safe text for a double (17 significant digits).
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Edge lists: "N <count>" then one "u v" pair per line, 0-based.

inline ObservedGraph parse_edge_list(std::istream& in, const fs::path& origin = "<stream>") {
  std::string line;
  std::size_t lineno = 0;
  std::optional<Eigen::Index> n;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tokens = detail::split_ws(line);
    if (tokens.empty()) continue;
    if (!n) {
      if (tokens.size() != 2 || tokens[0] != "N") throw ParseError(detail::where(origin, lineno) + "expected 'N <count>'");
      const auto count = detail::parse_number<long long>(tokens[1]);
      if (!count || *count < 1) throw ParseError(detail::where(origin, lineno) + "invalid node count");
      n = static_cast<Eigen::Index>(*count);
      continue;
    }
    if (tokens.size() != 2) throw ParseError(detail::where(origin, lineno) + "expected 'u v'");
    const auto u = detail::parse_number<long long>(tokens[0]);
    const auto v = detail::parse_number<long long>(tokens[1]);
    if (!u || !v || *u < 0 || *v < 0) throw ParseError(detail::where(origin, lineno) + "malformed edge");
    if (*u >= *n || *v >= *n) throw RangeError(detail::where(origin, lineno) + "endpoint out of range");
    if (*u == *v) throw ParseError(detail::where(origin, lineno) + "self-loop");
    edges.emplace_back(static_cast<Eigen::Index>(*u), static_cast<Eigen::Index>(*v));
  }
  if (!n) throw ParseError(origin.string() + ": missing 'N <count>' header");
  return make_graph(*n, edges);
}

inline ObservedGraph read_edge_list(const fs::path& path) {
  auto in = detail::open_input(path);
  return parse_edge_list(in, path);
}

inline void write_edge_list(const ObservedGraph& graph, const fs::path& path) {
  auto out = detail::open_output(path);
  out << "N " << graph.node_count() << '\n';
  for (auto [u, v] : graph.edges()) out << u << ' ' << v << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// TUDataset corpora

struct LabeledGraph {
  ObservedGraph graph;
  int label;
};

/// Reads <name>_A.txt, <name>_graph_indicator.txt and <name>_graph_labels.txt
/// from `dir`. Labels are mapped to 0..L-1 in ascending order of the raw
/// label. Self-loops in the corpus are dropped. `limit` keeps the first graphs.
inline std::vector<LabeledGraph> read_tu_dataset(const fs::path& dir, std::optional<std::size_t> limit = std::nullopt) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::string name;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto file = entry.path().filename().string();
    const std::string suffix = "_A.txt";
    if (file.size() > suffix.size() && file.compare(file.size() - suffix.size(), suffix.size(), suffix) == 0) {
      name = file.substr(0, file.size() - suffix.size());
      break;
    }
  }
  if (name.empty()) throw IoError("no <name>_A.txt found in " + dir.string());

  auto read_ints = [&](const fs::path& path) {
    auto in = detail::open_input(path);
    std::vector<long long> values;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto t = detail::trim(line);
      if (t.empty()) continue;
      const auto v = detail::parse_number<long long>(t);
      if (!v) throw ParseError(detail::where(path, lineno) + "expected an integer");
      values.push_back(*v);
    }
    return values;
  };

  const auto indicator = read_ints(dir / (name + "_graph_indicator.txt"));
  const auto raw_labels = read_ints(dir / (name + "_graph_labels.txt"));
  const auto graph_count = static_cast<long long>(raw_labels.size());

  // Nodes of each graph must be contiguous and graph ids nondecreasing.
  std::vector<long long> first_node(static_cast<std::size_t>(graph_count), -1);
  std::vector<long long> node_count(static_cast<std::size_t>(graph_count), 0);
  for (std::size_t i = 0; i < indicator.size(); ++i) {
    const long long g = indicator[i];
    if (g < 1 || g > graph_count) throw ParseError("graph indicator refers to unknown graph " + std::to_string(g));
    if (i > 0 && g < indicator[i - 1]) throw ParseError("graph indicator is not sorted by graph id");
    auto& first = first_node[static_cast<std::size_t>(g - 1)];
    if (first < 0) first = static_cast<long long>(i);
    ++node_count[static_cast<std::size_t>(g - 1)];
  }
  for (long long g = 0; g < graph_count; ++g)
    if (node_count[static_cast<std::size_t>(g)] == 0) throw ParseError("graph " + std::to_string(g + 1) + " has no nodes");

  std::vector<std::vector<Edge>> edges(static_cast<std::size_t>(graph_count));
  {
    const auto path = dir / (name + "_A.txt");
    auto in = detail::open_input(path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto t = detail::trim(line);
      if (t.empty()) continue;
      const auto comma = t.find(',');
      if (comma == std::string_view::npos) throw ParseError(detail::where(path, lineno) + "expected 'u, v'");
      const auto u = detail::parse_number<long long>(detail::trim(t.substr(0, comma)));
      const auto v = detail::parse_number<long long>(detail::trim(t.substr(comma + 1)));
      if (!u || !v) throw ParseError(detail::where(path, lineno) + "malformed edge");
      const auto nodes = static_cast<long long>(indicator.size());
      if (*u < 1 || *v < 1 || *u > nodes || *v > nodes)
        throw ParseError(detail::where(path, lineno) + "edge endpoint outside the indicator range");
      const long long gu = indicator[static_cast<std::size_t>(*u - 1)];
      const long long gv = indicator[static_cast<std::size_t>(*v - 1)];
      if (gu != gv) throw ParseError(detail::where(path, lineno) + "edge joins two different graphs");
      if (*u == *v) continue;
      const long long base = first_node[static_cast<std::size_t>(gu - 1)];
      edges[static_cast<std::size_t>(gu - 1)].emplace_back(static_cast<Eigen::Index>(*u - 1 - base),
                                                           static_cast<Eigen::Index>(*v - 1 - base));
    }
  }

  std::set<long long> distinct(raw_labels.begin(), raw_labels.end());
  std::map<long long, int> label_index;
  for (long long l : distinct) label_index.emplace(l, static_cast<int>(label_index.size()));

  const auto keep = std::min<std::size_t>(limit.value_or(raw_labels.size()), raw_labels.size());
  std::vector<LabeledGraph> out;
  out.reserve(keep);
  for (std::size_t g = 0; g < keep; ++g)
    out.push_back({make_graph(static_cast<Eigen::Index>(node_count[g]), edges[g]), label_index.at(raw_labels[g])});
  return out;
}

// ---------------------------------------------------------------------------
// Step functions: "K <k>", the K measure values, then K rows of K values.

inline void write_step_function(const StepFunction& w, std::ostream& out) {
  const auto k = w.size();
  out << "K " << k << '\n';
  for (Eigen::Index i = 0; i < k; ++i) out << (i ? " " : "") << format_double(w.measure()(i));
  out << '\n';
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) out << (j ? " " : "") << format_double(w.values()(i, j));
    out << '\n';
  }
}

inline void write_step_function(const StepFunction& w, const fs::path& path) {
  auto out = detail::open_output(path);
  write_step_function(w, out);
  if (!out) throw IoError("failed writing " + path.string());
}

inline StepFunction parse_step_function(std::istream& in, const fs::path& origin = "<stream>") {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  std::optional<Eigen::Index> k;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tokens = detail::split_ws(line);
    if (tokens.empty()) continue;
    if (!k) {
      const auto parsed = tokens.size() == 2 && tokens[0] == "K" ? detail::parse_number<long long>(tokens[1])
                                                                 : std::nullopt;
      if (!parsed || *parsed < 1) throw ValidationError(detail::where(origin, lineno) + "expected 'K <k>'");
      k = static_cast<Eigen::Index>(*parsed);
      continue;
    }
    std::vector<double> row;
    for (auto t : tokens) {
      const auto v = detail::parse_number<double>(t);
      if (!v) throw ValidationError(detail::where(origin, lineno) + "malformed number");
      row.push_back(*v);
    }
    if (static_cast<Eigen::Index>(row.size()) != *k)
      throw ValidationError(detail::where(origin, lineno) + "row length does not match K");
    rows.push_back(std::move(row));
  }
  if (!k) throw ValidationError(origin.string() + ": missing 'K <k>' header");
  if (static_cast<Eigen::Index>(rows.size()) != *k + 1)
    throw ValidationError(origin.string() + ": expected a measure line and K value rows");

  Vector measure(*k);
  for (Eigen::Index i = 0; i < *k; ++i) measure(i) = rows[0][static_cast<std::size_t>(i)];
  if (std::abs(measure.sum() - 1.0) > 1e-9) throw ValidationError(origin.string() + ": measure does not sum to 1");
  Matrix values(*k, *k);
  for (Eigen::Index i = 0; i < *k; ++i)
    for (Eigen::Index j = 0; j < *k; ++j) {
      const double v = rows[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(j)];
      if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(origin.string() + ": value outside [0,1]");
      values(i, j) = v;
    }
  return {std::move(values), std::move(measure)};
}

inline StepFunction read_step_function(const fs::path& path) {
  auto in = detail::open_input(path);
  return parse_step_function(in, path);
}

// ---------------------------------------------------------------------------
// Heatmaps: binary PGM, dark = dense.

inline void write_heatmap(const Matrix& m, const fs::path& path) {
  for (Eigen::Index i = 0; i < m.size(); ++i)
    if (!(m.data()[i] >= 0.0 && m.data()[i] <= 1.0)) throw DomainError("write_heatmap: entries must lie in [0,1]");
  auto out = detail::open_output(path, std::ios::out | std::ios::binary);
  out << "P5\n" << m.cols() << ' ' << m.rows() << "\n255\n";
  std::string bytes(static_cast<std::size_t>(m.size()), '\0');
  std::size_t pos = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      bytes[pos++] = static_cast<char>(255 - std::lround(255.0 * m(i, j)));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

// ---------------------------------------------------------------------------
// Benchmark results CSV

struct ResultRow {
  std::string graphon_family;
  std::string method;
  int trial = 0;
  int m = 0;
  Eigen::Index n_min = 0;
  Eigen::Index n_max = 0;
  std::string metric_name;
  std::optional<double> value;            // empty for failed cells
  std::optional<double> runtime_seconds;  // empty when not recorded
  std::uint64_t seed = 0;

  auto key() const { return std::tie(graphon_family, method, trial, m, n_min, n_max, metric_name, seed); }
};

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline constexpr std::string_view kResultsHeader =
    "graphon_family,method,trial,M,N_min,N_max,metric_name,value,runtime_seconds,seed";

/// Header plus rows sorted by their key columns.
inline void write_results_csv(std::vector<ResultRow> rows, std::ostream& out) {
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.key() < b.key(); });
  out << kResultsHeader << '\n';
  for (const auto& r : rows) {
    out << csv_field(r.graphon_family) << ',' << csv_field(r.method) << ',' << r.trial << ',' << r.m << ','
        << r.n_min << ',' << r.n_max << ',' << csv_field(r.metric_name) << ','
        << (r.value ? format_double(*r.value) : "") << ','
        << (r.runtime_seconds ? format_double(*r.runtime_seconds) : "") << ',' << r.seed << '\n';
  }
}

inline void write_results_csv(const std::vector<ResultRow>& rows, const fs::path& path) {
  auto out = detail::open_output(path, std::ios::out | std::ios::binary);
  write_results_csv(rows, out);
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace gwgraphon
