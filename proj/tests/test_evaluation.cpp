#include "gdistill/bench.hpp"
#include "gdistill/metrics.hpp"
#include "gdistill/pipeline.hpp"
#include "gdistill/report.hpp"
#include "gdistill/runners.hpp"
#include "support.hpp"

#include <atomic>
#include <fstream>
#include <sstream>

using namespace gdistill;
using namespace gdistill::test;
using Catch::Matchers::ContainsSubstring;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig small_config() {
  RunConfig c;
  c.dataset.sbm = {.blocks = 2, .nodes_per_block = 40, .p_in = 0.2, .p_out = 0.02, .feature_dim = 6};
  c.teacher.epochs = 30;
  c.teacher.hidden_dim = 16;
  c.positions.walks_per_node = 4;
  c.positions.walk_length = 10;
  c.positions.skipgram.dim = 4;
  c.positions.skipgram.epochs = 1;
  c.distill.epochs = 10;
  c.distill.hidden_dim = 16;
  c.distill.rsd_batch = 16;
  return c;
}

}  // namespace

TEST_CASE("accuracy examples and errors", "[evaluation]") {
  const std::vector<int> pred{0, 1, 1, 0};
  const std::vector<int> labels{0, 1, 0, 0};
  const NodeId all[] = {0, 1, 2, 3};
  const NodeId some[] = {2};
  REQUIRE(accuracy(pred, labels, all) == 0.75);
  REQUIRE(accuracy(pred, labels, some) == 0.0);
  REQUIRE_THROWS_AS(accuracy(pred, labels, std::span<const NodeId>{}), std::invalid_argument);
  const NodeId bad[] = {4};
  REQUIRE_THROWS_AS(accuracy(pred, labels, bad), std::out_of_range);
}

TEST_CASE("cut value examples", "[evaluation]") {
  const Graph triangle = test::make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
  REQUIRE(cut_value(std::vector<int>{2, 2, 2}, triangle) == 1.0);
  const Graph path = test::make_graph(3, {{0, 1}, {1, 2}});
  REQUIRE(cut_value(std::vector<int>{0, 0, 1}, path) == 0.5);
  REQUIRE(cut_value(std::vector<int>{0, 1, 0}, path) == 0.0);
  REQUIRE_THROWS_AS(cut_value(std::vector<int>{0, 1}, test::make_graph(2, {})), std::invalid_argument);
  REQUIRE_THROWS_AS(cut_value(std::vector<int>{0}, path), std::invalid_argument);
}

TEST_CASE("cut value agrees with the dense trace formula", "[evaluation]") {
  Rng rng(11);
  std::uniform_int_distribution<int> size(2, 100);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const NodeId n = size(rng);
    const int classes = 1 + trial % 5;
    const Graph g = test::random_graph(n, 0.08, classes, 1, rng);
    if (g.num_edges() == 0) continue;
    std::uniform_int_distribution<int> cls(0, classes - 1);
    std::vector<int> pred(static_cast<std::size_t>(n));
    for (auto& p : pred) p = cls(rng);
    const double fast = cut_value(pred, g);
    REQUIRE(fast >= 0.0);
    REQUIRE(fast <= 1.0);
    REQUIRE(std::abs(fast - dense_cut_value(pred, g, classes)) <= 1e-12);
    std::vector<int> constant(pred.size(), cls(rng));
    REQUIRE(cut_value(constant, g) == 1.0);
    ++checked;
  }
  REQUIRE(checked > 80);
}

TEST_CASE("production accuracy interpolates by node count", "[evaluation]") {
  REQUIRE(production_accuracy(0.9, 20, 1.0, 80) == Catch::Approx(0.98).epsilon(1e-15));
  REQUIRE(production_accuracy(0.4, 0, 0.7, 10) == 0.7);
  REQUIRE(production_accuracy(0.8, 10, 0.8, 30) == Catch::Approx(0.8).epsilon(1e-15));
  REQUIRE_THROWS_AS(production_accuracy(0.5, 0, 0.5, 0), std::invalid_argument);
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double a = u(rng), b = u(rng);
    const std::size_t ni = 1 + static_cast<std::size_t>(i), nt = 1 + static_cast<std::size_t>(3 * i % 17);
    const double p = production_accuracy(a, ni, b, nt);
    REQUIRE(p >= std::min(a, b) - 1e-15);
    REQUIRE(p <= std::max(a, b) + 1e-15);
  }
}

TEST_CASE("mean and sample standard deviation", "[evaluation]") {
  const double v[] = {1.0, 2.0, 3.0, 4.0};
  const MeanStd s = mean_std(v);
  REQUIRE(s.mean == 2.5);
  REQUIRE(s.std == Catch::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-14));
  const double one[] = {0.7};
  REQUIRE(mean_std(one).std == 0.0);
}

TEST_CASE("report invariants and files", "[evaluation]") {
  EvalReport r;
  r.accuracy_tran = 1.0;
  r.accuracy_ind = 0.9;
  r.count_tran = 80;
  r.count_ind = 20;
  r.cut_value = 0.8;
  finalize_accuracies(r);
  REQUIRE(r.accuracy_prod == Catch::Approx(0.98).epsilon(1e-15));
  REQUIRE_NOTHROW(r.check());

  EvalReport bad = r;
  bad.accuracy_prod = 0.5;
  REQUIRE_THROWS_AS(bad.check(), std::logic_error);
  bad = r;
  bad.cut_value = 1.5;
  REQUIRE_THROWS_WITH(bad.check(), ContainsSubstring("cut_value"));

  EvalReport tran;
  tran.accuracy_tran = 0.6;
  tran.count_tran = 10;
  tran.cut_value = 0.5;
  finalize_accuracies(tran);
  REQUIRE(tran.accuracy_prod == 0.6);
  REQUIRE(to_json(tran)["accuracy_ind"].is_null());

  r.noise_curve = {{0.0, {0.9, 0.01}, {0.89, 0.91}}, {1.0, {0.5, 0.02}, {0.48, 0.52}}};
  const auto dir = test::temp_dir("report");
  write_report(dir, r);
  const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
  REQUIRE(j["accuracy_prod"].get<double>() == r.accuracy_prod);
  REQUIRE(j["latency"].is_null());
  REQUIRE(slurp(dir / "report.csv").rfind("metric,value\n", 0) == 0);
  const std::string curve = slurp(dir / "noise_curve.csv");
  REQUIRE(curve.rfind("alpha,mean_acc,std_acc\n", 0) == 0);
  REQUIRE(std::count(curve.begin(), curve.end(), '\n') == 3);
}

TEST_CASE("bench collects every repeat and stable checksums", "[evaluation]") {
  int calls = 0;
  const LatencyStats s = bench_inference(
      [&] {
        ++calls;
        return std::vector<int>{1, 0, 2};
      },
      10, 2);
  REQUIRE(calls == 12);
  REQUIRE(s.samples_us.size() == 10);
  REQUIRE(s.repeats == 10);
  REQUIRE(s.p50_us <= s.p95_us);
  REQUIRE(s.checksum == prediction_checksum({1, 0, 2}));
  REQUIRE_THROWS_AS(bench_inference([] { return std::vector<int>{}; }, 9), std::invalid_argument);
  int flip = 0;
  REQUIRE_THROWS_AS(bench_inference([&] { return std::vector<int>{flip++ % 2}; }, 10),
                    std::runtime_error);
}

TEST_CASE("serving modes agree", "[evaluation]") {
  Rng rng(4);
  const Graph g = test::random_graph(50, 0.1, 3, 5, rng);
  const TeacherModel t = init_teacher(5, 3, {.hidden_dim = 8}, 1);
  REQUIRE(serve_teacher(t, g, ServingMode::kNodewise) == serve_teacher(t, g, ServingMode::kBatched));
  const StudentModel s = init_student(5, 0, 3, 8, 2, 1);
  REQUIRE(serve_student(s, g.content(), ServingMode::kNodewise) ==
          serve_student(s, g.content(), ServingMode::kBatched));
}

TEST_CASE("noise sweep shape, order and error annotation", "[evaluation]") {
  const double alphas[] = {0.0, 0.5, 1.0};
  const std::uint64_t seeds[] = {0, 1, 2, 3};
  std::atomic<int> calls = 0;
  const auto curve = noise_sweep(
      [&](double a, std::uint64_t s) {
        ++calls;
        return 1.0 - a / 2.0 + 0.01 * static_cast<double>(s);
      },
      alphas, seeds, 2);
  REQUIRE(calls == 12);
  REQUIRE(curve.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    REQUIRE(curve[i].alpha == alphas[i]);
    REQUIRE(curve[i].per_seed.size() == 4);
    REQUIRE(curve[i].accuracy.mean == Catch::Approx(1.0 - alphas[i] / 2.0 + 0.015).epsilon(1e-14));
  }
  const double zero[] = {0.0};
  REQUIRE(noise_sweep([](double, std::uint64_t) { return 0.5; }, zero, seeds).size() == 1);
  REQUIRE_THROWS_WITH(noise_sweep(
                          [](double a, std::uint64_t s) -> double {
                            if (a == 0.5 && s == 2) throw std::runtime_error("boom");
                            return 0.0;
                          },
                          alphas, seeds),
                      ContainsSubstring("alpha=0.5") && ContainsSubstring("seed=2") &&
                          ContainsSubstring("boom"));
  const double bad[] = {1.5};
  REQUIRE_THROWS_AS(noise_sweep([](double, std::uint64_t) { return 0.0; }, bad, seeds),
                    std::invalid_argument);
}

TEST_CASE("ablation switches off one component per row", "[evaluation]") {
  DistillConfig base;
  base.mu = 0.3;
  base.eta = 0.2;
  const std::uint64_t seeds[] = {5, 6};
  std::vector<std::string> seen;
  const auto rows = ablation_run(
      base,
      [](const AblationVariant& v, std::uint64_t) {
        return (v.use_positions ? 0.4 : 0.0) + (v.distill.mu > 0 ? 0.2 : 0.0) +
               (v.distill.eta > 0 ? 0.1 : 0.0);
      },
      seeds);
  REQUIRE(rows.size() == 4);
  REQUIRE(rows[0].accuracy.mean == Catch::Approx(0.7));
  REQUIRE(rows[1].accuracy.mean == Catch::Approx(0.3));
  REQUIRE(rows[2].accuracy.mean == Catch::Approx(0.5));
  REQUIRE(rows[3].accuracy.mean == Catch::Approx(0.6));
  for (const auto& r : rows) REQUIRE(r.per_seed.size() == 2);
  REQUIRE(std::string(ablation_name(Ablation::kNoPositions)).find("POS") != std::string::npos);
  REQUIRE(apply_ablation(base, Ablation::kNoSimilarity).distill.lambda == base.lambda);
}

TEST_CASE("parallel_for reports the lowest failing index", "[evaluation]") {
  std::vector<int> out(20, 0);
  parallel_for(out.size(), 3, [&](std::size_t i) { out[i] = static_cast<int>(i) * 2; });
  for (std::size_t i = 0; i < out.size(); ++i) REQUIRE(out[i] == static_cast<int>(i) * 2);
  REQUIRE_THROWS_WITH(parallel_for(10, 3,
                                   [](std::size_t i) {
                                     if (i == 3 || i == 7) throw std::runtime_error(std::to_string(i));
                                   }),
                      "3");
}

TEST_CASE("scoring the ground truth gives perfect accuracy", "[evaluation]") {
  const RunConfig cfg = small_config();
  const PreparedData data = prepare_data(cfg, 1);
  const EvalReport r = score_predictions(data.graph.labels(), data);
  REQUIRE(r.accuracy_tran == 1.0);
  REQUIRE(r.accuracy_ind == 1.0);
  REQUIRE(r.accuracy_prod == 1.0);
  REQUIRE(r.count_tran == data.split.count(NodeRole::kObserved));
  REQUIRE(r.count_ind == data.split.count(NodeRole::kInductive));
  REQUIRE(r.cut_value == Catch::Approx(dense_cut_value(data.graph.labels(), data.graph, 2)));
}

TEST_CASE("student variants are deterministic and ignore inductive structure", "[evaluation]") {
  const RunConfig cfg = small_config();
  const SeedContext ctx = build_seed_context(cfg, 2);
  const AblationVariant full = apply_ablation(cfg.distill, Ablation::kFull);
  const EvalReport a = run_student_variant(ctx, full, 0.0);
  const EvalReport b = run_student_variant(ctx, full, 0.0);
  REQUIRE(to_json(a) == to_json(b));
  REQUIRE_NOTHROW(a.check());
  const EvalReport mlp = run_content_mlp(ctx, cfg.distill, 1.0);
  REQUIRE_NOTHROW(mlp.check());

  // Training inputs never contain inductive positions beyond the transfer.
  for (NodeId v : ctx.data.split.nodes(NodeRole::kInductive)) {
    REQUIRE(ctx.positions.provenance[static_cast<std::size_t>(v)] != Provenance::kTrained);
  }
  for (NodeId v : ctx.targets.nodes) REQUIRE(ctx.data.split.role(v) != NodeRole::kInductive);
}
