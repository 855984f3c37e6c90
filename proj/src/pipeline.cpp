#include "gdistill/pipeline.hpp"

#include "gdistill/checkpoint.hpp"
#include "gdistill/dataset_io.hpp"
#include "gdistill/hash.hpp"
#include "gdistill/noise.hpp"
#include "gdistill/sbm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

namespace gdistill {

namespace fs = std::filesystem;
using nlohmann::json;

PreparedData prepare_data(const RunConfig& config, std::uint64_t seed) {
  PreparedData out;
  if (config.dataset.source == "sbm") {
    out.graph = generate_sbm(config.dataset.sbm, config.dataset.seed);
    out.split = make_split(out.graph, config.split.label_fraction, config.split.inductive_fraction, seed);
    return out;
  }
  Dataset ds = load_dataset(config.dataset.path);
  out.graph = std::move(ds.graph);
  out.split = ds.split ? *ds.split
                       : make_split(out.graph, config.split.label_fraction,
                                    config.split.inductive_fraction, seed);
  return out;
}

namespace {

std::vector<NodeId> to_view_ids(const TrainingView& view, const std::vector<NodeId>& full) {
  std::vector<NodeId> out;
  out.reserve(full.size());
  for (NodeId v : full) out.push_back(view.from_full[static_cast<std::size_t>(v)]);
  return out;
}

PositionTable empty_positions(NodeId n) {
  return {Matrix(n, 0), std::vector<Provenance>(static_cast<std::size_t>(n), Provenance::kZero)};
}

}  // namespace

TeacherFit fit_teacher(const PreparedData& data, const RunConfig& config, std::uint64_t seed) {
  const TrainingView view = training_view(data.graph, data.split);
  const auto labeled = to_view_ids(view, data.split.nodes(NodeRole::kLabeled));
  const auto validation = to_view_ids(view, data.split.nodes(NodeRole::kObserved));
  return train_teacher(view.graph, labeled, validation, config.teacher, seed);
}

TeacherOutputs teacher_targets(const TeacherModel& teacher, const PreparedData& data,
                               double temperature) {
  const TrainingView view = training_view(data.graph, data.split);
  std::vector<NodeId> nodes(static_cast<std::size_t>(view.graph.num_nodes()));
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] = static_cast<NodeId>(i);
  TeacherOutputs out = export_teacher_outputs(teacher, view.graph, nodes, temperature);
  out.nodes = view.to_full;
  return out;
}

PositionTable fit_positions(const PreparedData& data, const RunConfig& config, std::uint64_t seed,
                            int threads) {
  return encode_positions(data.graph, data.split, config.positions, seed, threads);
}

DistillData make_distill_data(const PreparedData& data, const Matrix& content,
                              const PositionTable& positions, const TeacherOutputs& targets) {
  DistillData d;
  d.features = concat_features(content, positions);
  d.content_dim = content.cols();
  d.labels = data.graph.labels();
  d.num_classes = data.graph.num_classes();
  d.labeled = data.split.nodes(NodeRole::kLabeled);
  d.soft_nodes = targets.nodes;
  d.soft_labels = targets.soft_labels;
  d.teacher_hidden = targets.hidden;
  d.validation = data.split.nodes(NodeRole::kObserved);
  return d;
}

EvalReport score_predictions(std::span<const int> predictions, const PreparedData& data) {
  EvalReport r;
  const auto observed = data.split.nodes(NodeRole::kObserved);
  const auto inductive = data.split.nodes(NodeRole::kInductive);
  r.accuracy_tran = accuracy(predictions, data.graph.labels(), observed);
  r.count_tran = observed.size();
  if (!inductive.empty()) {
    r.accuracy_ind = accuracy(predictions, data.graph.labels(), inductive);
    r.count_ind = inductive.size();
  }
  finalize_accuracies(r);
  r.cut_value = cut_value(predictions, data.graph);
  return r;
}

std::vector<int> teacher_predictions(const TeacherModel& teacher, const PreparedData& data) {
  return argmax_rows(teacher_forward(teacher, data.graph).logits);
}

SeedContext build_seed_context(const RunConfig& config, std::uint64_t seed, int threads) {
  SeedContext ctx;
  ctx.seed = seed;
  ctx.data = prepare_data(config, seed);
  ctx.teacher = fit_teacher(ctx.data, config, seed).model;
  ctx.targets = teacher_targets(ctx.teacher, ctx.data, config.distill.temperature);
  ctx.positions = fit_positions(ctx.data, config, seed, threads);
  return ctx;
}

EvalReport run_student_variant(const SeedContext& ctx, const AblationVariant& variant,
                               double alpha) {
  const Matrix content = inject_feature_noise(ctx.data.graph.content(), alpha, ctx.seed);
  const PositionTable positions =
      variant.use_positions ? ctx.positions : empty_positions(ctx.data.graph.num_nodes());
  const DistillData data = make_distill_data(ctx.data, content, positions, ctx.targets);
  DistillConfig cfg = variant.distill;
  cfg.seed = ctx.seed;
  const StudentFit fit = train_student(data, cfg);
  return score_predictions(argmax_rows(student_forward(fit.model, data.features).logits), ctx.data);
}

EvalReport run_content_mlp(const SeedContext& ctx, const DistillConfig& distill, double alpha) {
  const Matrix content = inject_feature_noise(ctx.data.graph.content(), alpha, ctx.seed);
  const DistillData data = make_distill_data(
      ctx.data, content, empty_positions(ctx.data.graph.num_nodes()), ctx.targets);
  DistillConfig cfg = distill;
  cfg.seed = ctx.seed;
  const StudentFit fit = train_kd_mlp(data, 0.0, cfg);
  return score_predictions(argmax_rows(student_forward(fit.model, data.features).logits), ctx.data);
}

ServingComparison compare_serving(const Graph& g, const RunConfig& config, ServingMode mode,
                                  std::uint64_t seed) {
  const TeacherModel teacher = init_teacher(g.content_dim(), g.num_classes(), config.teacher, seed);
  const Index dp = config.positions.skipgram.dim;
  const StudentModel student = init_student(g.content_dim(), dp, g.num_classes(), config.distill.hidden_dim,
                                            config.distill.num_hidden_layers, seed);
  const Matrix positions = inject_feature_noise(Matrix::Zero(g.num_nodes(), dp), 1.0, seed);
  const Matrix x = concat_cols(g.content(), positions);
  const auto& ev = config.evaluate;
  ServingComparison c;
  c.student = bench_inference([&] { return serve_student(student, x, mode); }, ev.repeats, ev.warmup);
  c.teacher = bench_inference([&] { return serve_teacher(teacher, g, mode); }, ev.repeats, ev.warmup);
  return c;
}

bool StageResult::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.second; });
}

fs::path run_directory(const RunConfig& config) {
  return fs::path(config.out) / ("run-" + config_hash(config));
}

namespace {

const char* kPreparedFiles[] = {"edges.tsv", "features.csv", "labels.csv", "split.json"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error(file.string() + ": cannot write");
  out << text;
}

json read_json(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error(file.string() + ": cannot open file");
  return json::parse(in);
}

void write_history(const fs::path& file, const std::vector<EpochRecord>& history) {
  std::string text = "epoch,loss,validation_accuracy\n";
  for (const auto& r : history) {
    text += std::to_string(r.epoch) + ',' + fmt(r.loss) + ',' + fmt(r.validation_accuracy) + '\n';
  }
  write_text(file, text);
}

bool layers_finite(const std::vector<DenseLayer>& layers) {
  return std::all_of(layers.begin(), layers.end(), [](const DenseLayer& l) {
    return l.weight.allFinite() && l.bias.allFinite();
  });
}

json history_summary(const std::vector<EpochRecord>& history, int best_epoch) {
  double best = 0.0;
  for (const auto& r : history) {
    if (r.epoch == best_epoch) best = r.validation_accuracy;
  }
  return {{"best_epoch", best_epoch}, {"best_validation_accuracy", best}, {"epochs_run", history.size()}};
}

json report_accuracies(const EvalReport& r) {
  return {{"accuracy_tran", r.accuracy_tran},
          {"accuracy_ind", r.accuracy_ind ? json(*r.accuracy_ind) : json(nullptr)},
          {"accuracy_prod", r.accuracy_prod},
          {"cut_value", r.cut_value}};
}

json curve_json(const std::vector<NoisePoint>& curve) {
  json out = json::array();
  for (const auto& p : curve) {
    out.push_back({{"alpha", p.alpha},
                   {"mean_acc", p.accuracy.mean},
                   {"std_acc", p.accuracy.std},
                   {"per_seed", p.per_seed}});
  }
  return out;
}

// What a stage reads and what it wrote.
struct Input {
  fs::path path;
  std::string what;
};

struct Outcome {
  std::vector<std::string> outputs;      // hashed in the manifest
  std::vector<std::string> timing_outputs;  // wall-clock content, not hashed
  std::vector<std::pair<std::string, bool>> checks;
  json seeds;
};

struct Stage {
  fs::path run_dir;
  fs::path dir;
  const RunConfig& config;
  const StageOptions& options;
  std::ostream& log;
};

PreparedData load_prepared(const fs::path& run_dir) {
  Dataset ds = load_dataset(run_dir / "prepare");
  if (!ds.split) throw std::runtime_error((run_dir / "prepare" / "split.json").string() + ": missing");
  return {std::move(ds.graph), *ds.split};
}

std::vector<Input> prepared_inputs(const fs::path& run_dir) {
  std::vector<Input> out;
  for (const char* f : kPreparedFiles) out.push_back({run_dir / "prepare" / f, "prepared dataset file"});
  return out;
}

std::vector<Input> dataset_inputs(const RunConfig& config) {
  std::vector<Input> out;
  if (config.dataset.source != "path") return out;
  const fs::path dir = config.dataset.path;
  for (const char* f : {"edges.tsv", "features.csv", "labels.csv"}) out.push_back({dir / f, "dataset file"});
  if (fs::exists(dir / "split.json")) out.push_back({dir / "split.json", "dataset file"});
  return out;
}

std::vector<Input> stage_inputs(const std::string& stage, const RunConfig& config,
                                const fs::path& run_dir) {
  const fs::path teacher = run_dir / "train-teacher" / "teacher.bin";
  const fs::path positions = run_dir / "encode-positions";
  const fs::path student = run_dir / "distill";
  if (stage == "prepare" || stage == "noise-sweep" || stage == "ablate" || stage == "bench") {
    return dataset_inputs(config);
  }
  std::vector<Input> in = prepared_inputs(run_dir);
  if (stage == "train-teacher" || stage == "encode-positions") return in;
  in.push_back({teacher, "teacher checkpoint"});
  in.push_back({positions / "positions.csv", "position table"});
  in.push_back({positions / "positions.meta.json", "position table metadata"});
  if (stage == "distill") return in;
  in.push_back({student / "student.bin", "student checkpoint"});
  in.push_back({student / "student.meta.json", "student metadata"});
  return in;  // evaluate
}

TeacherModel load_teacher(const fs::path& file) {
  return TeacherModel{read_checkpoint(file, kTeacherMagic).layers};
}

StudentModel load_student(const fs::path& dir) {
  const CheckpointPayload payload = read_checkpoint(dir / "student.bin", kStudentMagic);
  const json meta = read_json(dir / "student.meta.json");
  if (payload.extras.size() != 1) throw std::runtime_error("student checkpoint: expected one transform");
  StudentModel model;
  model.layers = payload.layers;
  model.rsd_transform = payload.extras[0];
  model.content_dim = meta.at("content_dim").get<Index>();
  model.position_dim = meta.at("position_dim").get<Index>();
  if (model.layers.empty() || model.layers.front().in_dim() != model.input_dim()) {
    throw std::runtime_error("student checkpoint: input width disagrees with student.meta.json");
  }
  return model;
}

std::vector<SeedContext> build_contexts(const RunConfig& config, int threads) {
  const auto& seeds = config.evaluate.seeds;
  std::vector<SeedContext> out(seeds.size());
  parallel_for(seeds.size(), threads, [&](std::size_t i) { out[i] = build_seed_context(config, seeds[i]); });
  return out;
}

const SeedContext& context_for(const std::vector<SeedContext>& contexts, std::uint64_t seed) {
  for (const auto& c : contexts) {
    if (c.seed == seed) return c;
  }
  throw std::logic_error("no context for seed " + std::to_string(seed));
}

Outcome stage_prepare(const Stage& s) {
  const PreparedData data = prepare_data(s.config, s.config.seed);
  save_dataset(s.dir, data.graph, &data.split);
  bool valid = true;
  try {
    data.graph.validate();
  } catch (const std::logic_error&) {
    valid = false;
  }
  s.log << "prepared " << data.graph.num_nodes() << " nodes, " << data.graph.num_edges()
        << " edges, " << data.graph.num_classes() << " classes; labeled "
        << data.split.count(NodeRole::kLabeled) << ", observed "
        << data.split.count(NodeRole::kObserved) << ", inductive "
        << data.split.count(NodeRole::kInductive) << '\n';
  return {{kPreparedFiles, kPreparedFiles + 4}, {}, {{"graph_valid", valid}}, {{"split", s.config.seed}}};
}

Outcome stage_train_teacher(const Stage& s) {
  const PreparedData data = load_prepared(s.run_dir);
  const TeacherFit fit = fit_teacher(data, s.config, s.config.seed);
  write_checkpoint(s.dir / "teacher.bin", kTeacherMagic, {fit.model.layers, {}});
  write_history(s.dir / "history.csv", fit.history);
  const json cfg = to_json(s.config);
  json meta = {{"config", cfg["teacher"]},
               {"seed", s.config.seed},
               {"input_dim", fit.model.input_dim()},
               {"num_classes", fit.model.num_classes()},
               {"training", history_summary(fit.history, fit.best_epoch)}};
  write_text(s.dir / "teacher.meta.json", meta.dump(2) + '\n');
  s.log << "teacher best epoch " << fit.best_epoch << '\n';
  return {{"teacher.bin", "teacher.meta.json", "history.csv"},
          {},
          {{"weights_finite", layers_finite(fit.model.layers)}},
          {{"teacher_init", s.config.seed}}};
}

Outcome stage_encode_positions(const Stage& s) {
  const PreparedData data = load_prepared(s.run_dir);
  const PositionTable table = fit_positions(data, s.config, s.config.seed, s.options.threads);
  const json cfg = to_json(s.config);
  save_positions(s.dir, table, {{"hyperparameters", cfg["positions"]}, {"seed", s.config.seed}});
  bool zero_rows = true;
  bool trained_in_view = true;
  for (NodeId v = 0; v < table.num_nodes(); ++v) {
    const auto p = table.provenance[static_cast<std::size_t>(v)];
    if (p == Provenance::kZero && !table.embeddings.row(v).isZero(0.0)) zero_rows = false;
    if (p == Provenance::kTrained && data.split.role(v) == NodeRole::kInductive) trained_in_view = false;
  }
  s.log << "positions: " << table.count(Provenance::kTrained) << " trained, "
        << table.count(Provenance::kTransferred) << " transferred, "
        << table.count(Provenance::kZero) << " zero\n";
  return {{"positions.csv", "positions.meta.json"},
          {},
          {{"zero_rows_exact", zero_rows}, {"trained_only_in_view", trained_in_view}},
          {{"walks_and_skipgram", s.config.seed}}};
}

Outcome stage_distill(const Stage& s) {
  const PreparedData data = load_prepared(s.run_dir);
  const fs::path teacher_file = s.run_dir / "train-teacher" / "teacher.bin";
  const TeacherModel teacher = load_teacher(teacher_file);
  const TeacherOutputs targets = teacher_targets(teacher, data, s.config.distill.temperature);
  const PositionTable positions = load_positions(s.run_dir / "encode-positions");
  const DistillData dd = make_distill_data(data, data.graph.content(), positions, targets);
  DistillConfig cfg = s.config.distill;
  cfg.seed = s.config.seed;
  const StudentFit fit = train_student(dd, cfg);
  write_checkpoint(s.dir / "student.bin", kStudentMagic,
                   {fit.model.layers, {fit.model.rsd_transform}});
  write_history(s.dir / "history.csv", fit.history);
  json distill = to_json(s.config)["distill"];
  distill["seed"] = cfg.seed;
  json meta = {
      {"config", distill},
      {"content_dim", fit.model.content_dim},
      {"position_dim", fit.model.position_dim},
      {"hidden_dim", fit.model.hidden_dim()},
      {"num_classes", fit.model.num_classes()},
      {"training", history_summary(fit.history, fit.best_epoch)},
      {"provenance",
       {{"dataset", s.config.dataset.source == "path" ? s.config.dataset.path : "sbm"},
        {"features_hash", hash_file(s.run_dir / "prepare" / "features.csv")},
        {"teacher_checkpoint_hash", hash_file(teacher_file)},
        {"positions_hash", hash_file(s.run_dir / "encode-positions" / "positions.csv")}}}};
  write_text(s.dir / "student.meta.json", meta.dump(2) + '\n');
  s.log << "student best epoch " << fit.best_epoch << '\n';
  return {{"student.bin", "student.meta.json", "history.csv"},
          {},
          {{"weights_finite", layers_finite(fit.model.layers) && fit.model.rsd_transform.allFinite()}},
          {{"student", cfg.seed}}};
}

Outcome stage_evaluate(const Stage& s) {
  const PreparedData data = load_prepared(s.run_dir);
  const PositionTable positions = load_positions(s.run_dir / "encode-positions");
  const StudentModel student = load_student(s.run_dir / "distill");
  const TeacherModel teacher = load_teacher(s.run_dir / "train-teacher" / "teacher.bin");
  const std::vector<int> pred = student_predict(student, data.graph.content(), positions);
  EvalReport report = score_predictions(pred, data);
  const EvalReport teacher_report = score_predictions(teacher_predictions(teacher, data), data);
  report.metadata = {{"config_hash", config_hash(s.config)},
                     {"seeds", {{"run", s.config.seed}, {"dataset", s.config.dataset.seed}}},
                     {"accuracy_prod_weighting", "node-count weighted mean of ind and tran"},
                     {"teacher", report_accuracies(teacher_report)},
                     {"student_checkpoint_hash", hash_file(s.run_dir / "distill" / "student.bin")}};
  write_report(s.dir, report);
  std::string lines;
  for (int p : pred) lines += std::to_string(p) + '\n';
  write_text(s.dir / "predictions.csv", lines);
  bool invariants = true;
  try {
    report.check();
  } catch (const std::logic_error& e) {
    s.log << "report invariant violated: " << e.what() << '\n';
    invariants = false;
  }
  s.log << "student prod accuracy " << report.accuracy_prod << ", teacher "
        << teacher_report.accuracy_prod << ", cut value " << report.cut_value << '\n';
  return {{"report.json", "report.csv", "predictions.csv"},
          {},
          {{"report_invariants", invariants}},
          {{"run", s.config.seed}}};
}

Outcome stage_noise_sweep(const Stage& s) {
  const auto contexts = build_contexts(s.config, s.options.threads);
  const auto& seeds = s.config.evaluate.seeds;
  const auto& alphas = s.config.evaluate.alphas;
  const AblationVariant full = apply_ablation(s.config.distill, Ablation::kFull);
  const auto student_curve = noise_sweep(
      [&](double a, std::uint64_t seed) {
        return run_student_variant(context_for(contexts, seed), full, a).accuracy_prod;
      },
      alphas, seeds, s.options.threads);
  const auto mlp = noise_sweep(
      [&](double a, std::uint64_t seed) {
        return run_content_mlp(context_for(contexts, seed), s.config.distill, a).accuracy_prod;
      },
      alphas, seeds, s.options.threads);
  write_noise_curve_csv(s.dir / "noise_curve.csv", student_curve);
  write_noise_curve_csv(s.dir / "noise_curve_mlp.csv", mlp);
  write_text(s.dir / "noise.json",
             json{{"student", curve_json(student_curve)}, {"content_mlp", curve_json(mlp)}}.dump(2) + '\n');

  bool gap_ok = true;
  bool degrade_ok = true;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    s.log << "alpha " << alphas[i] << ": student " << student_curve[i].accuracy.mean << " +- "
          << student_curve[i].accuracy.std << ", content MLP " << mlp[i].accuracy.mean << " +- "
          << mlp[i].accuracy.std << '\n';
    if (student_curve[i].accuracy.mean < mlp[i].accuracy.mean) gap_ok = false;
    const double drop_student = student_curve.front().accuracy.mean - student_curve[i].accuracy.mean;
    const double drop_mlp = mlp.front().accuracy.mean - mlp[i].accuracy.mean;
    if (drop_student > drop_mlp) degrade_ok = false;
  }
  return {{"noise_curve.csv", "noise_curve_mlp.csv", "noise.json"},
          {},
          {{"student_not_below_mlp", gap_ok}, {"student_degrades_less", degrade_ok}},
          {{"runs", seeds}}};
}

Outcome stage_ablate(const Stage& s) {
  const auto contexts = build_contexts(s.config, s.options.threads);
  const auto& seeds = s.config.evaluate.seeds;
  const auto rows = ablation_run(
      s.config.distill,
      [&](const AblationVariant& v, std::uint64_t seed) {
        return run_student_variant(context_for(contexts, seed), v, 0.0).accuracy_prod;
      },
      seeds, s.options.threads);
  std::string csv = "variant,mean_acc,std_acc\n";
  json table = json::array();
  for (const auto& r : rows) {
    csv += std::string(ablation_name(r.which)) + ',' + fmt(r.accuracy.mean) + ',' +
           fmt(r.accuracy.std) + '\n';
    table.push_back({{"variant", ablation_name(r.which)},
                     {"mean_acc", r.accuracy.mean},
                     {"std_acc", r.accuracy.std},
                     {"per_seed", r.per_seed}});
    s.log << ablation_name(r.which) << ": " << r.accuracy.mean << " +- " << r.accuracy.std << '\n';
  }
  write_text(s.dir / "ablation.csv", csv);
  write_text(s.dir / "ablation.json", json{{"rows", table}, {"seeds", seeds}}.dump(2) + '\n');
  return {{"ablation.csv", "ablation.json"},
          {},
          {{"four_rows", rows.size() == 4},
           {"full_not_below_without_positions", rows[0].accuracy.mean >= rows[1].accuracy.mean}},
          {{"runs", seeds}}};
}

Outcome stage_bench(const Stage& s) {
  const Graph g = prepare_data(s.config, s.config.seed).graph;
  const auto& ev = s.config.evaluate;
  json modes = json::object();
  double speedup = 0.0;
  for (ServingMode mode : {ServingMode::kNodewise, ServingMode::kBatched}) {
    const std::string name = mode == ServingMode::kNodewise ? "nodewise" : "batched";
    const ServingComparison c = compare_serving(g, s.config, mode, s.config.seed);
    modes[name] = {{"student", to_json(c.student)}, {"teacher", to_json(c.teacher)}, {"speedup", c.speedup()}};
    s.log << name << ": student " << c.student.mean_us << " us, teacher " << c.teacher.mean_us
          << " us, speedup " << c.speedup() << "x\n";
    if (name == ev.serving) speedup = c.speedup();
  }
  const json doc = {{"serving", ev.serving},
                    {"nodes", g.num_nodes()},
                    {"edges", g.num_edges()},
                    {"threads", 1},
                    {"weights", "seeded initialization; position columns standard normal"},
                    {"modes", modes}};
  write_text(s.dir / "bench.json", doc.dump(2) + '\n');
  return {{}, {"bench.json"}, {{"student_faster", speedup > 1.0}}, {{"init", s.config.seed}}};
}

using StageFn = Outcome (*)(const Stage&);

StageFn stage_fn(const std::string& name) {
  static const std::map<std::string, StageFn> table{
      {"prepare", stage_prepare},   {"train-teacher", stage_train_teacher},
      {"encode-positions", stage_encode_positions},
      {"distill", stage_distill},   {"evaluate", stage_evaluate},
      {"noise-sweep", stage_noise_sweep},
      {"ablate", stage_ablate},     {"bench", stage_bench}};
  const auto it = table.find(name);
  if (it == table.end()) throw ConfigError("stage", "unknown stage '" + name + "'");
  return it->second;
}

std::string input_key(const fs::path& path, const fs::path& run_dir) {
  const fs::path rel = path.lexically_relative(run_dir);
  return (!rel.empty() && *rel.begin() != "..") ? rel.generic_string() : path.generic_string();
}

bool manifest_current(const fs::path& dir, const std::string& hash, const json& inputs) {
  const fs::path file = dir / "manifest.json";
  if (!fs::exists(file)) return false;
  json m;
  try {
    m = read_json(file);
  } catch (const std::exception&) {
    return false;
  }
  if (m.value("config_hash", "") != hash || m.value("inputs", json()) != inputs) return false;
  const json outputs = m.value("outputs", json::object());
  for (const auto& [name, h] : outputs.items()) {
    if (!fs::exists(dir / name) || hash_file(dir / name) != h.get<std::string>()) return false;
  }
  const json timing = m.value("timing_outputs", json::array());
  for (const auto& name : timing) {
    if (!fs::exists(dir / name.get<std::string>())) return false;
  }
  return true;
}

}  // namespace

StageResult run_stage(const std::string& stage, const RunConfig& config, const StageOptions& options,
                      std::ostream& log) {
  const StageFn fn = stage_fn(stage);
  const fs::path run_dir = run_directory(config);
  const fs::path dir = run_dir / stage;
  const std::string hash = config_hash(config);

  json inputs = json::object();
  for (const auto& in : stage_inputs(stage, config, run_dir)) {
    if (!fs::exists(in.path)) throw MissingArtifact(in.path, in.what);
    inputs[input_key(in.path, run_dir)] = hash_file(in.path);
  }

  StageResult result;
  if (!options.force && manifest_current(dir, hash, inputs)) {
    const json checks = read_json(dir / "manifest.json").value("checks", json::object());
    for (const auto& [name, ok] : checks.items()) {
      result.checks.emplace_back(name, ok.get<bool>());
    }
    result.skipped = true;
    log << stage << ": up to date, skipped\n";
    return result;
  }

  fs::create_directories(dir);
  fs::remove(dir / "manifest.json");
  write_text(run_dir / "config.json", to_json(config).dump(2) + '\n');
  const Outcome outcome = fn(Stage{run_dir, dir, config, options, log});

  json outputs = json::object();
  for (const auto& name : outcome.outputs) outputs[name] = hash_file(dir / name);
  json checks = json::object();
  for (const auto& [name, ok] : outcome.checks) checks[name] = ok;
  const json manifest = {{"stage", stage},
                         {"config_hash", hash},
                         {"config", to_json(config)},
                         {"seeds", outcome.seeds},
                         {"inputs", inputs},
                         {"outputs", outputs},
                         {"timing_outputs", outcome.timing_outputs},
                         {"checks", checks}};
  write_text(dir / "manifest.json", manifest.dump(2) + '\n');
  result.checks = outcome.checks;
  return result;
}

}  // namespace gdistill
