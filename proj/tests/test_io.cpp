#include "gwgraphon/io.hpp"

#include <gtest/gtest.h>

using namespace gwgraphon;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("gwgraphon_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ObservedGraph parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_edge_list(in);
}

template <class E>
std::string error_of(std::string_view text) {
  try {
    parse(text);
  } catch (const E& e) {
    return e.what();
  }
  return "no error";
}

}  // namespace

TEST(EdgeList, ParsesTriangleAndIgnoresBlankLines) {
  const auto g = parse("N 3\n0 1\n\n1 2\n0 2\n");
  EXPECT_EQ(g.node_count(), 3);
  EXPECT_EQ(g.edge_count(), 3);
  EXPECT_EQ(g.dense(), Matrix::Ones(3, 3) - Matrix::Identity(3, 3));
}

TEST(EdgeList, DuplicateAndReversedEdgesCollapse) {
  const auto g = parse("N 2\n0 1\n1 0\n0 1\n");
  EXPECT_EQ(g.edge_count(), 1);
  EXPECT_EQ(g.dense()(0, 1), 1.0);
}

TEST(EdgeList, IsolatedNodesAreKept) {
  const auto g = parse("N 5\n0 1\n");
  EXPECT_EQ(g.node_count(), 5);
  EXPECT_EQ(g.edge_count(), 1);
}

TEST(EdgeList, ErrorsCarryLineNumbers) {
  EXPECT_NE(error_of<ParseError>("N 3\n0 1\n1 x\n").find(":3:"), std::string::npos);
  EXPECT_NE(error_of<ParseError>("0 1\n").find(":1:"), std::string::npos);
  EXPECT_NE(error_of<ParseError>("N 3\n1 1\n").find("self-loop"), std::string::npos);
  EXPECT_NE(error_of<ParseError>("N 3\n0 1 2\n").find(":2:"), std::string::npos);
  EXPECT_NE(error_of<ParseError>("N 0\n").find("node count"), std::string::npos);
  EXPECT_NE(error_of<ParseError>("").find("missing"), std::string::npos);
  EXPECT_NE(error_of<RangeError>("N 3\n\n0 3\n").find(":3:"), std::string::npos);
  EXPECT_NE(error_of<ParseError>("N 3\n-1 2\n").find(":2:"), std::string::npos);
}

TEST(EdgeList, FileRoundTrip) {
  TempDir dir;
  const auto g = parse("N 6\n0 1\n2 5\n3 4\n1 5\n");
  write_edge_list(g, dir.path / "g.txt");
  const auto back = read_edge_list(dir.path / "g.txt");
  EXPECT_EQ(back.dense(), g.dense());
  EXPECT_EQ(back.measure(), g.measure());
  EXPECT_THROW(read_edge_list(dir.path / "missing.txt"), IoError);
}

TEST(TuDataset, ToyCorpus) {
  TempDir dir;
  // Graph 1: path 1-2-3 plus a self-loop on 1. Graph 2: edge 4-5. Graph 3: lone node 6.
  write_file(dir.path / "TOY_A.txt", "1, 2\n2, 1\n2, 3\n3, 2\n1, 1\n4, 5\n5, 4\n");
  write_file(dir.path / "TOY_graph_indicator.txt", "1\n1\n1\n2\n2\n3\n");
  write_file(dir.path / "TOY_graph_labels.txt", "7\n-1\n7\n");
  const auto corpus = read_tu_dataset(dir.path);
  ASSERT_EQ(corpus.size(), 3u);
  EXPECT_EQ(corpus[0].graph.node_count(), 3);
  EXPECT_EQ(corpus[0].graph.edge_count(), 2);
  EXPECT_EQ(corpus[0].graph.dense()(0, 0), 0.0);
  EXPECT_EQ(corpus[1].graph.node_count(), 2);
  EXPECT_EQ(corpus[1].graph.edge_count(), 1);
  EXPECT_EQ(corpus[2].graph.node_count(), 1);
  EXPECT_EQ(corpus[2].graph.edge_count(), 0);
  EXPECT_NEAR(corpus[2].graph.measure().sum(), 1.0, 1e-12);
  EXPECT_EQ(corpus[0].label, 1);
  EXPECT_EQ(corpus[1].label, 0);
  EXPECT_EQ(corpus[2].label, 1);
  EXPECT_EQ(read_tu_dataset(dir.path, 2).size(), 2u);
}

TEST(TuDataset, Errors) {
  TempDir dir;
  EXPECT_THROW(read_tu_dataset(dir.path / "nope"), IoError);
  EXPECT_THROW(read_tu_dataset(dir.path), IoError);
  write_file(dir.path / "BAD_A.txt", "1, 3\n");
  write_file(dir.path / "BAD_graph_indicator.txt", "1\n1\n2\n");
  write_file(dir.path / "BAD_graph_labels.txt", "0\n1\n");
  EXPECT_THROW(read_tu_dataset(dir.path), ParseError);
}

TEST(StepFunctionFile, RoundTripIsExact) {
  TempDir dir;
  Matrix v(3, 3);
  v << 0.1, 1.0 / 3.0, 0.0, 1.0 / 3.0, 0.7, 1e-17, 0.0, 1e-17, 1.0;
  Vector mu(3);
  mu << 0.5, 1.0 / 3.0, 1.0 / 6.0;
  const StepFunction w(v, mu);
  write_step_function(w, dir.path / "w.txt");
  const auto back = read_step_function(dir.path / "w.txt");
  EXPECT_EQ(back.values(), w.values());
  EXPECT_EQ(back.measure(), w.measure());
}

TEST(StepFunctionFile, ValidationErrors) {
  auto parse_w = [](std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_step_function(in);
  };
  EXPECT_NO_THROW(parse_w("K 1\n1\n0.5\n"));
  EXPECT_THROW(parse_w("K 2\n0.5 0.5\n0 1\n1 0\n0 0\n"), ValidationError);  // extra row
  EXPECT_THROW(parse_w("K 2\n0.5 0.5\n0 1\n"), ValidationError);             // missing row
  EXPECT_THROW(parse_w("K 1\n0.9\n0.5\n"), ValidationError);                 // measure sum
  EXPECT_THROW(parse_w("K 1\n1\n1.5\n"), ValidationError);                   // value range
  EXPECT_THROW(parse_w("K 2\n0.5 0.5\n0 1 1\n1 0\n"), ValidationError);      // row length
  EXPECT_THROW(parse_w("K 1\n1\nnan\n"), ValidationError);
  EXPECT_THROW(parse_w("K x\n"), ValidationError);
  EXPECT_THROW(parse_w("K 2\n0.5 0.5\n0 1\n0 0\n"), ValidationError);  // asymmetric
}

TEST(Heatmap, GrayLevels) {
  TempDir dir;
  Matrix m(1, 3);
  m << 0.0, 1.0, 0.5;
  write_heatmap(m, dir.path / "h.pgm");
  const auto bytes = read_file(dir.path / "h.pgm");
  const std::string header = "P5\n3 1\n255\n";
  ASSERT_EQ(bytes.size(), header.size() + 3);
  EXPECT_EQ(bytes.substr(0, header.size()), header);
  EXPECT_EQ(static_cast<unsigned char>(bytes[header.size()]), 255);
  EXPECT_EQ(static_cast<unsigned char>(bytes[header.size() + 1]), 0);
  EXPECT_EQ(static_cast<unsigned char>(bytes[header.size() + 2]), 127);
  Matrix bad(1, 1);
  bad << 1.5;
  EXPECT_THROW(write_heatmap(bad, dir.path / "bad.pgm"), DomainError);
}

TEST(ResultsCsv, EmptyHasHeaderOnly) {
  std::ostringstream out;
  write_results_csv({}, out);
  EXPECT_EQ(out.str(), std::string(kResultsHeader) + "\n");
}

TEST(ResultsCsv, OneRow) {
  ResultRow r{"xy", "gwb", 0, 10, 200, 200, "mse", 0.25, std::nullopt, 42};
  std::ostringstream out;
  write_results_csv({r}, out);
  EXPECT_EQ(out.str(), std::string(kResultsHeader) + "\nxy,gwb,0,10,200,200,mse,0.25,,42\n");
}

TEST(ResultsCsv, QuotingAndEmptyValue) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  ResultRow r{"a,b", "gwb", 1, 2, 3, 4, "error", std::nullopt, 1.5, 7};
  std::ostringstream out;
  write_results_csv({r}, out);
  EXPECT_NE(out.str().find("\"a,b\",gwb,1,2,3,4,error,,1.5,7\n"), std::string::npos);
}

TEST(ResultsCsv, RowsAreSortedByKey) {
  std::vector<ResultRow> rows{
      {"xy", "usvt", 1, 10, 200, 200, "mse", 0.3, std::nullopt, 1},
      {"abs_diff", "gwb", 0, 10, 200, 200, "gw", 0.1, std::nullopt, 2},
      {"xy", "gwb", 1, 10, 200, 200, "mse", 0.2, std::nullopt, 3},
      {"xy", "gwb", 0, 10, 200, 200, "mse", 0.1, std::nullopt, 4},
  };
  std::ostringstream a;
  std::ostringstream b;
  write_results_csv(rows, a);
  std::reverse(rows.begin(), rows.end());
  write_results_csv(rows, b);
  EXPECT_EQ(a.str(), b.str());
  std::istringstream lines(a.str());
  std::string line;
  std::vector<std::string> firsts;
  std::getline(lines, line);
  while (std::getline(lines, line)) firsts.push_back(line.substr(0, line.find(',', line.find(',') + 1)));
  EXPECT_EQ(firsts, (std::vector<std::string>{"abs_diff,gwb", "xy,gwb", "xy,gwb", "xy,usvt"}));
}

TEST(FormatDouble, RoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 0.0, 123456.789}) EXPECT_EQ(std::stod(format_double(v)), v);
}
