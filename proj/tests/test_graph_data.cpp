#include "gdistill/dataset_io.hpp"
#include "gdistill/noise.hpp"
#include "gdistill/sbm.hpp"
#include "gdistill/split.hpp"
#include "support.hpp"

#include <fstream>
#include <set>

using namespace gdistill;
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& file, const std::string& text) {
  std::ofstream out(file);
  out << text;
}

fs::path write_dataset(const std::string& name, const std::string& edges, const std::string& features,
                       const std::string& labels) {
  const fs::path dir = test::temp_dir(name);
  write_file(dir / "edges.tsv", edges);
  write_file(dir / "features.csv", features);
  write_file(dir / "labels.csv", labels);
  return dir;
}

const std::string kThreeFeatures = "1,0\n0,1\n1,1\n";
const std::string kThreeLabels = "0\n1\n0\n";

}  // namespace

TEST_CASE("triangle edge file gives degree two everywhere", "[graph_data]") {
  const auto dir = write_dataset("triangle", "0\t1\n1\t2\n2\t0\n", kThreeFeatures, kThreeLabels);
  const Graph g = load_graph(dir);
  REQUIRE(g.num_nodes() == 3);
  REQUIRE(g.num_edges() == 3);
  for (NodeId v = 0; v < 3; ++v) REQUIRE(g.degree(v) == 2);
  REQUIRE(g.num_classes() == 2);
  REQUIRE_NOTHROW(g.validate());
}

TEST_CASE("reversed duplicate lines collapse to one edge", "[graph_data]") {
  const auto dir = write_dataset("dedup", "# comment\n0\t1\n1\t0\n2\t2\n", kThreeFeatures, kThreeLabels);
  const Dataset ds = load_dataset(dir);
  REQUIRE(ds.graph.num_edges() == 1);
  REQUIRE(ds.graph.degree(0) == 1);
  REQUIRE(ds.graph.degree(1) == 1);
  REQUIRE(ds.graph.degree(2) == 0);
  REQUIRE(ds.edge_stats.self_loops_dropped == 1);
  REQUIRE(ds.edge_stats.duplicates_merged == 1);
}

TEST_CASE("ingestion errors carry file, line and node", "[graph_data]") {
  using Catch::Matchers::ContainsSubstring;
  SECTION("node id out of range") {
    const auto dir = write_dataset("badnode", "0\t1\n5\t0\n", kThreeFeatures, kThreeLabels);
    REQUIRE_THROWS_WITH(load_graph(dir), ContainsSubstring("edges.tsv:2") && ContainsSubstring("5"));
  }
  SECTION("ragged features") {
    const auto dir = write_dataset("ragged", "0\t1\n", "1,0\n0\n1,1\n", kThreeLabels);
    REQUIRE_THROWS_WITH(load_graph(dir), ContainsSubstring("features.csv:2"));
  }
  SECTION("negative label") {
    const auto dir = write_dataset("badlabel", "0\t1\n", kThreeFeatures, "0\n-1\n0\n");
    REQUIRE_THROWS_WITH(load_graph(dir), ContainsSubstring("labels.csv:2"));
  }
  SECTION("label count mismatch") {
    const auto dir = write_dataset("shortlabels", "0\t1\n", kThreeFeatures, "0\n1\n");
    REQUIRE_THROWS_AS(load_graph(dir), DataError);
  }
  SECTION("missing file") {
    const auto dir = test::temp_dir("missing");
    REQUIRE_THROWS_WITH(load_graph(dir), ContainsSubstring("cannot open file"));
  }
}

TEST_CASE("dataset round trip is exact and keeps the split", "[graph_data]") {
  Rng rng(7);
  const Graph g = test::random_graph(30, 0.2, 3, 4, rng);
  const SplitAssignment split = make_split(g, 0.2, 0.25, 3);
  const auto dir = test::temp_dir("roundtrip");
  save_dataset(dir, g, &split);
  const Dataset ds = load_dataset(dir);
  REQUIRE(ds.graph.content() == g.content());
  REQUIRE(ds.graph.labels() == g.labels());
  REQUIRE(ds.graph.edges() == g.edges());
  REQUIRE(ds.split.has_value());
  REQUIRE(*ds.split == split);
}

TEST_CASE("SBM extremes give disjoint cliques", "[graph_data]") {
  const Graph g = generate_sbm({.blocks = 2, .nodes_per_block = 4, .p_in = 1.0, .p_out = 0.0}, 1);
  REQUIRE(g.num_nodes() == 8);
  REQUIRE(g.num_edges() == 12);
  for (NodeId u = 0; u < 8; ++u) {
    for (NodeId v = 0; v < 8; ++v) {
      if (u != v) REQUIRE(g.has_edge(u, v) == (u / 4 == v / 4));
    }
  }
  REQUIRE(g.labels() == std::vector<int>{0, 0, 0, 0, 1, 1, 1, 1});
}

TEST_CASE("SBM intra-block edge count matches the binomial expectation", "[graph_data]") {
  const Graph g = generate_sbm({.blocks = 2, .nodes_per_block = 100, .p_in = 0.1, .p_out = 0.01}, 42);
  std::size_t intra = 0;
  std::size_t inter = 0;
  for (const Edge& e : g.edges()) (g.labels()[e.src] == g.labels()[e.dst] ? intra : inter)++;
  const double trials_in = 2.0 * 100 * 99 / 2;
  const double mean_in = trials_in * 0.1;
  REQUIRE(mean_in == 990.0);
  REQUIRE(std::abs(static_cast<double>(intra) - mean_in) <= 4.0 * std::sqrt(trials_in * 0.1 * 0.9));
  const double trials_out = 100.0 * 100.0;
  REQUIRE(std::abs(static_cast<double>(inter) - trials_out * 0.01) <=
          4.0 * std::sqrt(trials_out * 0.01 * 0.99));
  REQUIRE_NOTHROW(g.validate());
}

TEST_CASE("SBM without signal has label-independent features", "[graph_data]") {
  const Graph g = generate_sbm({.blocks = 2, .nodes_per_block = 5000, .p_in = 0.0, .p_out = 0.0,
                                .feature_dim = 4, .feature_signal = 0.0},
                               5);
  Eigen::RowVectorXd mean0 = Eigen::RowVectorXd::Zero(4);
  Eigen::RowVectorXd mean1 = Eigen::RowVectorXd::Zero(4);
  for (NodeId v = 0; v < g.num_nodes(); ++v) (g.labels()[v] == 0 ? mean0 : mean1) += g.content().row(v);
  mean0 /= 5000.0;
  mean1 /= 5000.0;
  // Standard error of a difference of two 5000-sample means of N(0, 1).
  REQUIRE((mean0 - mean1).cwiseAbs().maxCoeff() < 4.0 * std::sqrt(2.0 / 5000.0));

  const Graph s = generate_sbm({.blocks = 2, .nodes_per_block = 5000, .p_in = 0.0, .p_out = 0.0,
                                .feature_dim = 4, .feature_signal = 1.0},
                               5);
  REQUIRE(s.content().row(0) == s.content().row(4999));
  REQUIRE(s.content().row(0) != s.content().row(5000));
}

TEST_CASE("SBM rejects disassortative and invalid probabilities", "[graph_data]") {
  REQUIRE_THROWS_AS(generate_sbm({.p_in = 0.01, .p_out = 0.1}, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(generate_sbm({.p_in = 1.5, .p_out = 0.1}, 1), std::invalid_argument);
  REQUIRE(generate_sbm({}, 9).edges() == generate_sbm({}, 9).edges());
}

TEST_CASE("split sizes follow the fractions", "[graph_data]") {
  Rng rng(11);
  const Graph g = test::random_graph(100, 0.05, 2, 3, rng);
  const SplitAssignment s = make_split(g, 0.1, 0.2, 1);
  REQUIRE(s.count(NodeRole::kLabeled) == 10);
  REQUIRE(s.count(NodeRole::kInductive) == 18);
  REQUIRE(s.count(NodeRole::kObserved) == 72);
  REQUIRE(make_split(g, 0.1, 0.0, 1).transductive());
}

TEST_CASE("split is deterministic in its seed and partitions the nodes", "[graph_data]") {
  Rng rng(12);
  const Graph g = test::random_graph(200, 0.02, 4, 3, rng);
  REQUIRE(make_split(g, 0.1, 0.2, 5) == make_split(g, 0.1, 0.2, 5));
  REQUIRE_FALSE(make_split(g, 0.1, 0.2, 5) == make_split(g, 0.1, 0.2, 6));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SplitAssignment s = make_split(g, 0.15, 0.3, seed);
    std::vector<int> seen(200, 0);
    for (NodeRole r : {NodeRole::kLabeled, NodeRole::kObserved, NodeRole::kInductive}) {
      for (NodeId v : s.nodes(r)) seen[static_cast<std::size_t>(v)]++;
    }
    REQUIRE(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
  }
}

TEST_CASE("stratified split covers every class", "[graph_data]") {
  const Graph g = generate_sbm({.blocks = 5, .nodes_per_block = 20, .p_in = 0.2, .p_out = 0.0}, 3);
  const SplitAssignment s = make_split(g, 0.1, 0.0, 4);
  std::vector<int> per_class(5, 0);
  for (NodeId v : s.nodes(NodeRole::kLabeled)) per_class[static_cast<std::size_t>(g.labels()[v])]++;
  REQUIRE(per_class == std::vector<int>(5, 2));
}

TEST_CASE("split errors on empty labeled or observed sets", "[graph_data]") {
  const Graph g = test::make_graph(4, {{0, 1}});
  REQUIRE_THROWS_AS(make_split(g, 0.05, 0.0, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(make_split(g, 0.5, 0.99, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(make_split(g, 1.0, 0.0, 1), std::invalid_argument);
}

TEST_CASE("training view drops inductive nodes and their edges", "[graph_data]") {
  SECTION("transductive view is the identity") {
    Rng rng(13);
    const Graph g = test::random_graph(20, 0.3, 2, 2, rng);
    const SplitAssignment s = make_split(g, 0.2, 0.0, 1);
    const TrainingView view = training_view(g, s);
    REQUIRE(view.graph.edges() == g.edges());
    REQUIRE(view.graph.content() == g.content());
    for (NodeId v = 0; v < 20; ++v) REQUIRE(view.to_full[static_cast<std::size_t>(v)] == v);
  }
  SECTION("path with an inductive end") {
    const Graph g = test::make_graph(3, {{0, 1}, {1, 2}});
    const auto s = SplitAssignment::from_lists(3, {0}, {1}, {2});
    const TrainingView view = training_view(g, s);
    REQUIRE(view.graph.num_nodes() == 2);
    REQUIRE(view.graph.edges() == std::vector<Edge>{{0, 1}});
    REQUIRE(view.from_full[2] == -1);
  }
  SECTION("brute-force edge scan") {
    Rng rng(14);
    for (int trial = 0; trial < 10; ++trial) {
      const Graph g = test::random_graph(40, 0.15, 3, 2, rng);
      const SplitAssignment s = make_split(g, 0.2, 0.3, static_cast<std::uint64_t>(trial));
      const TrainingView view = training_view(g, s);
      std::size_t expected = 0;
      for (const Edge& e : g.edges()) {
        if (s.role(e.src) != NodeRole::kInductive && s.role(e.dst) != NodeRole::kInductive) ++expected;
      }
      REQUIRE(view.graph.num_edges() == expected);
      for (const Edge& e : view.graph.edges()) {
        REQUIRE(g.has_edge(view.to_full[e.src], view.to_full[e.dst]));
      }
      for (NodeId full : view.to_full) REQUIRE(s.role(full) != NodeRole::kInductive);
      REQUIRE_NOTHROW(view.graph.validate());
    }
  }
}

TEST_CASE("feature noise follows (1 - alpha) C + alpha n", "[graph_data]") {
  Rng rng(15);
  const Matrix c = test::uniform_matrix(30, 5, rng);
  REQUIRE(inject_feature_noise(c, 0.0, 1) == c);
  const Matrix other = test::uniform_matrix(30, 5, rng);
  REQUIRE(inject_feature_noise(c, 1.0, 8) == inject_feature_noise(other, 1.0, 8));
  REQUIRE(inject_feature_noise(c, 0.3, 8) == inject_feature_noise(c, 0.3, 8));
  REQUIRE_THROWS_AS(inject_feature_noise(c, 1.01, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(inject_feature_noise(c, -0.1, 1), std::invalid_argument);

  const Matrix zero = Matrix::Zero(1000, 100);
  const Matrix noisy = inject_feature_noise(zero, 0.5, 3);
  const double mean = noisy.mean();
  const double var = (noisy.array() - mean).square().sum() / static_cast<double>(noisy.size() - 1);
  REQUIRE(std::abs(mean) < 0.01);
  REQUIRE(std::abs(var - 0.25) <= 0.05 * 0.25);
}
