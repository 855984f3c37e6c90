#include "gdistill/checkpoint.hpp"
#include "gdistill/distill.hpp"
#include "gdistill/metrics.hpp"
#include "gdistill/positions.hpp"
#include "support.hpp"

using namespace gdistill;
using namespace gdistill::test;

namespace {

DistillData clique_data(NodeId size, Index position_dim, std::uint64_t seed) {
  const Graph g = test::clique_pair(size);
  Rng rng(seed);
  DistillData d;
  const Matrix content = uniform_matrix(g.num_nodes(), 4, rng);
  PositionTable positions{Matrix(g.num_nodes(), 0), {}};
  if (position_dim > 0) {
    PositionOptions opts;
    opts.skipgram.dim = position_dim;
    positions = encode_positions(g, SplitAssignment(std::vector<NodeRole>(
                                        static_cast<std::size_t>(g.num_nodes()), NodeRole::kObserved)),
                                 opts, seed);
  }
  d.features = concat_features(content, positions);
  d.content_dim = 4;
  d.labels = g.labels();
  d.num_classes = 2;
  d.labeled = {0, size};
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    d.soft_nodes.push_back(v);
    if (v != 0 && v != size) d.validation.push_back(v);
  }
  d.soft_labels = Matrix(g.num_nodes(), 2);
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    d.soft_labels.row(v) = g.labels()[v] == 0 ? Eigen::RowVector2d(0.9, 0.1) : Eigen::RowVector2d(0.1, 0.9);
  }
  d.teacher_hidden = uniform_matrix(g.num_nodes(), 5, rng);
  return d;
}

}  // namespace

TEST_CASE("concat_features examples", "[student_distill]") {
  Matrix c(1, 2);
  c << 1, 2;
  PositionTable p{Matrix::Constant(1, 1, 3.0), {Provenance::kTrained}};
  REQUIRE(concat_features(c, p) == Eigen::RowVector3d(1, 2, 3));
  REQUIRE(concat_features(c, PositionTable{Matrix(1, 0), {Provenance::kZero}}) == c);
  Rng rng(1);
  const Matrix big = uniform_matrix(7, 5, rng);
  REQUIRE(concat_features(big, PositionTable{uniform_matrix(7, 3, rng), {}}).cols() == 8);
  REQUIRE_THROWS_AS(concat_features(big, PositionTable{Matrix(6, 3), {}}), std::invalid_argument);
}

TEST_CASE("student forward matches references", "[student_distill]") {
  StudentModel zero = init_student(3, 1, 4, 5, 2, 1);
  for (auto& l : zero.layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
  Rng rng(2);
  const Matrix x = uniform_matrix(6, 4, rng);
  REQUIRE(student_forward(zero, x).logits.isZero(0.0));
  REQUIRE((softmax_rows(student_forward(zero, x).logits).array() == 0.25).all());

  const StudentModel linear = init_student(3, 1, 4, 5, 0, 2);
  REQUIRE(student_forward(linear, x).logits ==
          Matrix((matmul(x, linear.layers[0].weight)).rowwise() + linear.layers[0].bias.row(0)));

  const StudentModel deep = init_student(3, 1, 4, 5, 3, 3);
  const auto fast = student_forward(deep, x);
  const auto ref = plain_forward(deep, x);
  REQUIRE(relative_error(fast.hidden, ref.hidden) < 1e-12);
  REQUIRE(relative_error(fast.logits, ref.logits) < 1e-12);
  REQUIRE(deep.rsd_transform.rows() == 5);
  REQUIRE(deep.rsd_transform.cols() == 5);
  REQUIRE_THROWS_AS(student_forward(deep, Matrix(2, 3)), std::invalid_argument);
}

TEST_CASE("student predictions: argmax, ties and shift invariance", "[student_distill]") {
  StudentModel m = init_student(3, 0, 3, 4, 0, 1);
  m.layers[0].weight = Matrix::Identity(3, 3);
  m.layers[0].bias.setZero();
  Matrix c(2, 3);
  c << 0.2, 0.9, 0.1,  //
      0.5, 0.5, 0.0;
  const PositionTable none{Matrix(2, 0), {}};
  REQUIRE(student_predict(m, c, none) == std::vector<int>{1, 0});
  m.layers[0].bias.setConstant(7.5);
  REQUIRE(student_predict(m, c, none) == std::vector<int>{1, 0});
}

TEST_CASE("RSD loss examples", "[student_distill]") {
  Matrix h_gnn(2, 2);
  h_gnn << 1, 0, 0, 1;
  Matrix h_mlp(2, 2);
  h_mlp << 1, 0, 1, 0;
  REQUIRE(rsd_loss(h_gnn, h_mlp, Matrix::Identity(2, 2)) == 0.5);

  Rng rng(3);
  const Matrix h = uniform_matrix(8, 4, rng, 0.0, 2.0);
  REQUIRE(std::abs(rsd_loss(h, h, Matrix::Identity(4, 4))) <= 1e-12);

  const Matrix g = uniform_matrix(8, 5, rng);
  const Matrix w = uniform_matrix(4, 4, rng);
  const Matrix m = uniform_matrix(8, 4, rng);
  const double base = rsd_loss(g, m, w);
  REQUIRE(base == Catch::Approx(plain_rsd(g, m, w)).epsilon(1e-12));
  const std::int64_t perm[] = {3, 0, 7, 1, 6, 2, 5, 4};
  REQUIRE(rsd_loss(gather_rows(g, perm), gather_rows(m, perm), w) == Catch::Approx(base).epsilon(1e-12));
  REQUIRE_THROWS_AS(rsd_loss(Matrix(0, 2), Matrix(0, 2), Matrix::Identity(2, 2)), std::invalid_argument);
}

TEST_CASE("PGD perturbation contract", "[student_distill]") {
  DistillConfig cfg;
  cfg.epsilon = 0.05;
  cfg.step_size = 0.01;
  cfg.pgd_steps = 5;

  SECTION("zero gradient gives zero perturbation") {
    StudentModel m = init_student(3, 2, 2, 4, 1, 1);
    for (auto& l : m.layers) l.weight.setZero();
    Rng rng(4);
    AdversarialBatch b{uniform_matrix(5, 5, rng), {0, 2}, {0, 1}, Matrix::Constant(5, 2, 0.5)};
    REQUIRE(pgd_perturb(m, b, cfg).isZero(0.0));
  }
  SECTION("positive gradient steps by min(s, eps)") {
    StudentModel m = init_student(3, 0, 2, 4, 0, 1);
    m.layers[0].weight.col(0).setConstant(-1.0);
    m.layers[0].weight.col(1).setConstant(1.0);
    Matrix target(4, 2);
    target.col(0).setOnes();
    target.col(1).setZero();
    Rng rng(5);
    AdversarialBatch b{uniform_matrix(4, 3, rng), {0, 1, 2, 3}, {0, 0, 0, 0}, target};
    DistillConfig one = cfg;
    one.pgd_steps = 1;
    REQUIRE((pgd_perturb(m, b, one).array() == std::min(one.step_size, one.epsilon)).all());
  }
  SECTION("bounds hold on every entry of random runs") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      Rng rng(seed);
      const StudentModel m = init_student(4, 3, 3, 8, 2, seed);
      AdversarialBatch b{uniform_matrix(9, 7, rng), {1, 5}, {2, 0}, test::random_probs(9, 3, rng)};
      DistillConfig c = cfg;
      c.pgd_steps = 1 + static_cast<int>(seed % 7);
      c.step_size = 0.004 * static_cast<double>(1 + seed % 5);
      const Matrix delta = pgd_perturb(m, b, c);
      REQUIRE(delta.cols() == 4);
      REQUIRE(delta.cwiseAbs().maxCoeff() <= c.epsilon);
      REQUIRE(delta.cwiseAbs().maxCoeff() <= c.step_size * c.pgd_steps + 1e-15);
      const Matrix padded = pad_perturbation(delta, 3);
      REQUIRE(padded.rightCols(3).isZero(0.0));
      const double clean = adversarial_loss(m, b, Matrix::Zero(9, 4));
      REQUIRE(adversarial_loss(m, b, delta) >= clean - 1e-9);
    }
  }
  SECTION("model is not modified") {
    const StudentModel m = init_student(2, 1, 2, 3, 1, 2);
    const StudentModel copy = m;
    Rng rng(6);
    pgd_perturb(m, {uniform_matrix(3, 3, rng), {0}, {1}, test::random_probs(3, 2, rng)}, cfg);
    REQUIRE(m == copy);
  }
}

TEST_CASE("adversarial loss reduces to clean and soft-only cases", "[student_distill]") {
  const StudentModel m = init_student(3, 2, 3, 5, 1, 7);
  Rng rng(8);
  AdversarialBatch b{uniform_matrix(6, 5, rng), {0, 3}, {2, 1}, test::random_probs(6, 3, rng)};
  const Matrix logp = plain_log_softmax(plain_forward(m, b.x).logits);
  const double clean = mean_ce(logp, b.labeled_rows, b.labeled_targets) + mean_soft_ce(logp, b.soft_targets);
  REQUIRE(adversarial_loss(m, b, Matrix::Zero(6, 3)) == Catch::Approx(clean).epsilon(1e-12));
  b.labeled_rows.clear();
  b.labeled_targets.clear();
  REQUIRE(adversarial_loss(m, b, Matrix::Zero(6, 3)) == Catch::Approx(mean_soft_ce(logp, b.soft_targets)).epsilon(1e-12));
}

TEST_CASE("total loss arithmetic and errors", "[student_distill]") {
  DistillConfig c;
  c.lambda = 0.5;
  c.mu = 0.1;
  c.eta = 0.2;
  REQUIRE(total_loss({1, 2, 3, 4}, c) == Catch::Approx(3.1).epsilon(1e-15));
  c.lambda = c.mu = c.eta = 0.0;
  REQUIRE(total_loss({1.25, 2, 3, 4}, c) == 1.25);
  REQUIRE_THROWS_WITH(total_loss({1, 2, std::nan(""), 4}, c), Catch::Matchers::ContainsSubstring("similarity"));
  REQUIRE_THROWS_AS(total_loss({1, std::numeric_limits<double>::infinity(), 0, 0}, c), std::domain_error);
}

TEST_CASE("full objective gradient matches central differences", "[student_distill][gradient]") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Instance in = random_instance(seed);
    DistillConfig c;
    c.lambda = 0.7;
    c.mu = 0.3;
    c.eta = 0.4;
    Tape tape;
    const StudentVars vars = record_student(tape, in.model, true);
    LossComponents parts;
    const Var total = record_objective(vars, in.objective, c, parts);
    REQUIRE(total.scalar() == Catch::Approx(plain_objective(in.model, in.objective, c)).epsilon(1e-10));
    REQUIRE(total_loss(parts, c) == Catch::Approx(total.scalar()).epsilon(1e-12));
    const auto grads = tape.grad(total, vars.all());

    StudentModel probe = in.model;
    const auto slots = parameter_slots(probe);
    for (std::size_t k = 0; k < slots.size(); ++k) {
      const Matrix original = *slots[k];
      auto f = [&](const Matrix& value) {
        *slots[k] = value;
        const double v = plain_objective(probe, in.objective, c);
        *slots[k] = original;
        return v;
      };
      INFO("parameter " << k << " seed " << seed);
      REQUIRE(relative_error(grads[k], test::numeric_gradient(f, original)) < 1e-4);
    }
  }
}

TEST_CASE("adversarial batch carries labeled rows and targets", "[student_distill]") {
  const Instance in = random_instance(4);
  const AdversarialBatch b = adversarial_batch(in.objective);
  REQUIRE(b.x.rows() == 6);
  REQUIRE(b.labeled_rows == std::vector<std::int64_t>{1, 5});  // rows 4 and 7 of x
  REQUIRE(b.labeled_targets == std::vector<int>{2, 1});
}

TEST_CASE("disabled terms collapse to the plain KD trajectories", "[student_distill]") {
  const DistillData data = clique_data(6, 0, 3);
  DistillConfig c;
  c.epochs = 25;
  c.hidden_dim = 16;
  c.seed = 11;

  SECTION("all weights zero is the ground-truth MLP") {
    c.lambda = c.mu = c.eta = 0.0;
    const StudentFit a = train_student(data, c);
    const StudentFit b = train_kd_mlp(data, 0.0, c);
    REQUIRE(a.history == b.history);
    REQUIRE(a.model == b.model);
    for (std::size_t i = 0; i < a.history.size(); ++i) REQUIRE(std::isfinite(a.history[i].loss));
  }
  SECTION("lambda only is the soft-label KD objective") {
    c.lambda = 0.8;
    c.mu = c.eta = 0.0;
    const StudentFit a = train_student(data, c);
    const StudentFit b = train_kd_mlp(data, 0.8, c);
    REQUIRE(a.history == b.history);
    REQUIRE(a.model == b.model);
  }
}

TEST_CASE("student separates two cliques with position features", "[student_distill]") {
  const DistillData data = clique_data(8, 8, 5);
  DistillConfig c;
  c.epochs = 60;
  c.hidden_dim = 32;
  c.rsd_batch = 8;
  const DistillData copy = data;
  const StudentFit fit = train_student(data, c);
  const std::vector<int> pred = argmax_rows(student_forward(fit.model, data.features).logits);
  REQUIRE(accuracy(pred, data.labels, data.validation) == 1.0);
  REQUIRE(data.soft_labels == copy.soft_labels);
  REQUIRE(data.teacher_hidden == copy.teacher_hidden);
  const StudentFit again = train_student(data, c);
  REQUIRE(again.model == fit.model);
  REQUIRE(again.history == fit.history);
}

TEST_CASE("distill config and data validation", "[student_distill]") {
  DistillConfig c;
  c.epsilon = -0.1;
  REQUIRE_THROWS_WITH(c.validate(), Catch::Matchers::ContainsSubstring("distill.epsilon"));
  c.epsilon = 0.01;
  c.step_size = 0.02;
  REQUIRE_THROWS_WITH(c.validate(), Catch::Matchers::ContainsSubstring("distill.step_size"));
  DistillData d = clique_data(3, 0, 1);
  d.soft_nodes = {0, 1, 2};
  REQUIRE_THROWS_AS(d.validate(), std::invalid_argument);
}

TEST_CASE("student checkpoint stores the similarity transform", "[student_distill]") {
  const StudentModel m = init_student(3, 2, 4, 6, 2, 3);
  const auto dir = test::temp_dir("student-ckpt");
  write_checkpoint(dir / "s.bin", kStudentMagic, {m.layers, {m.rsd_transform}});
  const CheckpointPayload p = read_checkpoint(dir / "s.bin", kStudentMagic);
  REQUIRE(p.layers == m.layers);
  REQUIRE(p.extras.size() == 1);
  REQUIRE(p.extras[0] == m.rsd_transform);
  REQUIRE_THROWS_AS(read_checkpoint(dir / "s.bin", kTeacherMagic), std::runtime_error);
}
