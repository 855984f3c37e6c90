#include "gdistill/student.hpp"

#include <algorithm>

#include <cmath>
#include <stdexcept>
#include <string>

namespace gdistill {

void DistillConfig::validate() const {
  auto require = [](bool ok, const char* field, const char* rule) {
    if (!ok) throw std::invalid_argument(std::string("distill.") + field + " " + rule);
  };
  require(std::isfinite(lambda) && lambda >= 0.0, "lambda", "must be >= 0");
  require(std::isfinite(mu) && mu >= 0.0, "mu", "must be >= 0");
  require(std::isfinite(eta) && eta >= 0.0, "eta", "must be >= 0");
  require(std::isfinite(epsilon) && epsilon > 0.0, "epsilon", "must be > 0");
  require(std::isfinite(step_size) && step_size > 0.0, "step_size", "must be > 0");
  require(step_size <= epsilon, "step_size", "must not exceed epsilon");
  require(pgd_steps >= 1, "pgd_steps", "must be >= 1");
  require(rsd_batch >= 1, "rsd_batch", "must be >= 1");
  require(std::isfinite(learning_rate) && learning_rate > 0.0, "learning_rate", "must be > 0");
  require(epochs >= 0, "epochs", "must be >= 0");
  require(hidden_dim >= 1, "hidden_dim", "must be >= 1");
  require(num_hidden_layers >= 0, "num_hidden_layers", "must be >= 0");
  require(std::isfinite(temperature) && temperature > 0.0, "temperature", "must be > 0");
  require(std::isfinite(weight_decay) && weight_decay >= 0.0, "weight_decay", "must be >= 0");
}

StudentModel init_student(Index content_dim, Index position_dim, int num_classes,
                          Index hidden_dim, int num_hidden_layers, std::uint64_t seed) {
  if (num_classes < 1) throw std::invalid_argument("init_student: num_classes < 1");
  Rng rng = derive_rng(seed, streams::kStudentInit);
  StudentModel model;
  model.content_dim = content_dim;
  model.position_dim = position_dim;
  Index in = content_dim + position_dim;
  for (int l = 0; l < num_hidden_layers; ++l) {
    model.layers.push_back(glorot_layer(in, hidden_dim, rng));
    in = hidden_dim;
  }
  model.layers.push_back(glorot_layer(in, num_classes, rng));
  model.rsd_transform = glorot_layer(in, in, rng).weight;
  return model;
}

Matrix concat_features(const Matrix& content, const PositionTable& positions) {
  if (content.rows() != positions.embeddings.rows()) {
    throw std::invalid_argument("concat_features: " + std::to_string(content.rows()) +
                                " content rows vs " + std::to_string(positions.embeddings.rows()) +
                                " position rows");
  }
  return concat_cols(content, positions.embeddings);
}

StudentOutput student_forward(const StudentModel& model, const Matrix& x) {
  if (x.cols() != model.input_dim()) {
    throw std::invalid_argument("student_forward: input " + shape_of(x) + " but model expects " +
                                std::to_string(model.input_dim()) + " columns");
  }
  StudentOutput out;
  Matrix h = x;
  for (std::size_t l = 0; l + 1 < model.layers.size(); ++l) {
    h = apply_layer(h, model.layers[l]).cwiseMax(0.0);
  }
  out.logits = apply_layer(h, model.layers.back());
  out.hidden = std::move(h);
  return out;
}

std::vector<int> student_predict(const StudentModel& model, const Matrix& content,
                                 const PositionTable& positions) {
  return argmax_rows(student_forward(model, concat_features(content, positions)).logits);
}

std::vector<Var> StudentVars::all() const {
  std::vector<Var> out;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back(weights[l]);
    out.push_back(biases[l]);
  }
  out.push_back(rsd_transform);
  return out;
}

std::vector<Matrix*> parameter_slots(StudentModel& model) {
  std::vector<Matrix*> out;
  for (auto& layer : model.layers) {
    out.push_back(&layer.weight);
    out.push_back(&layer.bias);
  }
  out.push_back(&model.rsd_transform);
  return out;
}

StudentVars record_student(Tape& tape, const StudentModel& model, bool trainable) {
  auto record = [&](const Matrix& m) { return trainable ? tape.variable(m) : tape.constant(m); };
  StudentVars vars;
  for (const auto& layer : model.layers) {
    vars.weights.push_back(record(layer.weight));
    vars.biases.push_back(record(layer.bias));
  }
  vars.rsd_transform = record(model.rsd_transform);
  return vars;
}

StudentNodes student_forward(const StudentVars& vars, const Var& x) {
  Var h = x;
  const std::size_t n = vars.weights.size();
  for (std::size_t l = 0; l + 1 < n; ++l) h = relu(add_row(matmul(h, vars.weights[l]), vars.biases[l]));
  return {h, add_row(matmul(h, vars.weights[n - 1]), vars.biases[n - 1])};
}

Var rsd_loss(const Var& h_mlp, const Var& w_m, const Matrix& h_gnn) {
  const Index b = h_mlp.rows();
  if (b == 0) throw std::invalid_argument("rsd_loss: empty batch");
  if (h_gnn.rows() != b) {
    throw std::invalid_argument("rsd_loss: batch sizes differ (" + std::to_string(h_gnn.rows()) +
                                " teacher rows, " + std::to_string(b) + " student rows)");
  }
  Tape& tape = *h_mlp.tape();
  const Var transformed = relu(matmul(h_mlp, w_m));
  const Var s_mlp = matmul(transformed, transpose(transformed));
  const Var s_gnn = tape.constant(matmul_transposed(h_gnn, h_gnn));
  return scale(frobenius_sq(sub(s_gnn, s_mlp)), 1.0 / static_cast<double>(b * b));
}

double rsd_loss(const Matrix& h_gnn, const Matrix& h_mlp, const Matrix& w_m) {
  Tape tape;
  return rsd_loss(tape.constant(h_mlp), tape.constant(w_m), h_gnn).scalar();
}

Var adversarial_objective(const StudentVars& vars, const Var& x_perturbed,
                          const AdversarialBatch& batch) {
  const Var logits = student_forward(vars, x_perturbed).logits;
  Var objective = soft_cross_entropy(logits, batch.soft_targets);
  if (!batch.labeled_rows.empty()) {
    objective = add(cross_entropy(gather_rows(logits, batch.labeled_rows), batch.labeled_targets),
                    objective);
  }
  return objective;
}

Matrix pad_perturbation(const Matrix& delta, Index position_dim) {
  return concat_cols(delta, Matrix::Zero(delta.rows(), position_dim));
}

Matrix pgd_perturb(const StudentModel& model, const AdversarialBatch& batch,
                   const DistillConfig& config) {
  if (config.pgd_steps < 1) throw std::invalid_argument("pgd_perturb: pgd_steps must be >= 1");
  if (batch.x.cols() != model.input_dim()) {
    throw std::invalid_argument("pgd_perturb: batch " + shape_of(batch.x) + " but model expects " +
                                std::to_string(model.input_dim()) + " columns");
  }
  const Index b = batch.x.rows();
  const Matrix content = batch.x.leftCols(model.content_dim);
  const Matrix positions = batch.x.rightCols(model.position_dim);
  Matrix delta = Matrix::Zero(b, model.content_dim);
  for (int t = 0; t < config.pgd_steps; ++t) {
    Tape tape;
    const StudentVars vars = record_student(tape, model, false);
    const Var d = tape.variable(delta);
    const Var x = concat_cols(add(tape.constant(content), d), tape.constant(positions));
    const Var objective = adversarial_objective(vars, x, batch);
    const Matrix g = tape.grad(objective, {d})[0];
    if (!g.allFinite()) {
      throw std::runtime_error("pgd_perturb: non-finite gradient at step " + std::to_string(t));
    }
    const Matrix sign = (g.array() > 0.0).cast<double>() - (g.array() < 0.0).cast<double>();
    delta = (delta + config.step_size * sign).cwiseMax(-config.epsilon).cwiseMin(config.epsilon);
  }
  return delta;
}

double adversarial_loss(const StudentModel& model, const AdversarialBatch& batch,
                        const Matrix& delta) {
  if (delta.rows() != batch.x.rows() || delta.cols() != model.content_dim) {
    throw std::invalid_argument("adversarial_loss: perturbation " + shape_of(delta) +
                                " does not match the content block of " + shape_of(batch.x));
  }
  Tape tape;
  const StudentVars vars = record_student(tape, model, false);
  const Var x = tape.constant(batch.x + pad_perturbation(delta, model.position_dim));
  return adversarial_objective(vars, x, batch).scalar();
}

AdversarialBatch adversarial_batch(const StudentObjective& o) {
  AdversarialBatch adv;
  adv.x = gather_rows(o.x, o.batch);
  adv.soft_targets = gather_rows(o.soft_labels, o.batch);
  std::vector<std::int64_t> slot(static_cast<std::size_t>(o.x.rows()), -1);
  for (std::size_t i = 0; i < o.labeled_rows.size(); ++i) {
    slot[static_cast<std::size_t>(o.labeled_rows[i])] = static_cast<std::int64_t>(i);
  }
  for (std::size_t i = 0; i < o.batch.size(); ++i) {
    const std::int64_t k = slot[static_cast<std::size_t>(o.batch[i])];
    if (k < 0) continue;
    adv.labeled_rows.push_back(static_cast<std::int64_t>(i));
    adv.labeled_targets.push_back(o.labeled_targets[static_cast<std::size_t>(k)]);
  }
  return adv;
}

Var record_objective(const StudentVars& vars, const StudentObjective& o, const DistillConfig& config,
                     LossComponents& parts) {
  Tape& tape = *vars.rsd_transform.tape();
  const StudentNodes out = student_forward(vars, tape.constant(o.x));
  Var total = cross_entropy(gather_rows(out.logits, o.labeled_rows), o.labeled_targets);
  parts = {};
  parts.ground_truth = total.scalar();
  if (config.lambda > 0.0) {
    const Var logits = config.temperature == 1.0 ? out.logits : scale(out.logits, 1.0 / config.temperature);
    const Var sl = kl_divergence(logits, o.soft_labels);
    parts.soft_label = sl.scalar();
    total = add(total, scale(sl, config.lambda));
  }
  if (config.mu > 0.0) {
    const Var rsd = rsd_loss(gather_rows(out.hidden, o.batch), vars.rsd_transform, o.teacher_hidden);
    parts.similarity = rsd.scalar();
    total = add(total, scale(rsd, config.mu));
  }
  if (config.eta > 0.0) {
    const AdversarialBatch adv = adversarial_batch(o);
    const Index dp = vars.weights.front().rows() - o.delta.cols();
    const Var x_adv = tape.constant(adv.x + pad_perturbation(o.delta, dp));
    const Var adv_loss = adversarial_objective(vars, x_adv, adv);
    parts.adversarial = adv_loss.scalar();
    total = add(total, scale(adv_loss, config.eta));
  }
  return total;
}

double total_loss(const LossComponents& c, const DistillConfig& config) {
  const std::pair<const char*, double> parts[] = {{"ground_truth", c.ground_truth},
                                                  {"soft_label", c.soft_label},
                                                  {"similarity", c.similarity},
                                                  {"adversarial", c.adversarial}};
  for (const auto& [name, v] : parts) {
    if (!std::isfinite(v)) throw std::domain_error(std::string("total_loss: ") + name + " loss is not finite");
  }
  return c.ground_truth + config.lambda * c.soft_label + config.mu * c.similarity +
         config.eta * c.adversarial;
}

}  // namespace gdistill
