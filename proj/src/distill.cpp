#include "gdistill/distill.hpp"

#include "gdistill/adam.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gdistill {

void DistillData::validate() const {
  const Index n = features.rows();
  if (content_dim < 0 || content_dim > features.cols()) {
    throw std::invalid_argument("distill data: content_dim outside feature width");
  }
  if (static_cast<Index>(labels.size()) != n) {
    throw std::invalid_argument("distill data: label count differs from feature rows");
  }
  if (labeled.empty()) throw std::invalid_argument("distill data: no labeled nodes");
  if (!std::is_sorted(soft_nodes.begin(), soft_nodes.end()) ||
      std::adjacent_find(soft_nodes.begin(), soft_nodes.end()) != soft_nodes.end()) {
    throw std::invalid_argument("distill data: soft_nodes must be strictly ascending");
  }
  if (soft_labels.rows() != static_cast<Index>(soft_nodes.size()) ||
      teacher_hidden.rows() != static_cast<Index>(soft_nodes.size())) {
    throw std::invalid_argument("distill data: teacher outputs do not cover soft_nodes");
  }
  if (soft_labels.cols() != num_classes) {
    throw std::invalid_argument("distill data: soft labels have the wrong class count");
  }
  for (const auto* list : {&labeled, &soft_nodes, &validation}) {
    for (NodeId v : *list) {
      if (v < 0 || v >= n) throw std::invalid_argument("distill data: node id out of range");
    }
  }
  for (NodeId v : labeled) {
    if (!std::binary_search(soft_nodes.begin(), soft_nodes.end(), v)) {
      throw std::invalid_argument("distill data: labeled node " + std::to_string(v) +
                                  " has no soft label");
    }
  }
}

namespace {

struct Prepared {
  Matrix x_soft;
  Matrix x_validation;
  std::vector<std::int64_t> labeled_pos;  // rows of x_soft
  std::vector<int> labeled_targets;
};

Prepared prepare(const DistillData& data) {
  data.validate();
  Prepared p;
  const std::vector<std::int64_t> soft(data.soft_nodes.begin(), data.soft_nodes.end());
  const std::vector<std::int64_t> val(data.validation.begin(), data.validation.end());
  p.x_soft = gather_rows(data.features, soft);
  p.x_validation = gather_rows(data.features, val);
  std::vector<NodeId> labeled = data.labeled;
  std::sort(labeled.begin(), labeled.end());
  for (NodeId v : labeled) {
    const auto pos = std::lower_bound(data.soft_nodes.begin(), data.soft_nodes.end(), v) -
                     data.soft_nodes.begin();
    p.labeled_pos.push_back(pos);
    p.labeled_targets.push_back(data.labels[v]);
  }
  return p;
}

double validation_accuracy(const StudentModel& model, const Matrix& x,
                           const DistillData& data) {
  if (data.validation.empty()) return 0.0;
  const std::vector<int> pred = argmax_rows(student_forward(model, x).logits);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == data.labels[data.validation[i]];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

StudentModel initial_model(const DistillData& data, const DistillConfig& config) {
  return init_student(data.content_dim, data.position_dim(), data.num_classes, config.hidden_dim,
                      config.num_hidden_layers, config.seed);
}

Var soft_label_term(const Var& logits, const Matrix& soft_labels, double temperature) {
  return kl_divergence(temperature == 1.0 ? logits : scale(logits, 1.0 / temperature),
                       soft_labels);
}

}  // namespace

StudentFit train_student(const DistillData& data, const DistillConfig& config) {
  config.validate();
  const Prepared prep = prepare(data);
  StudentFit fit;
  fit.model = initial_model(data, config);
  StudentModel current = fit.model;
  double best_acc = validation_accuracy(current, prep.x_validation, data);

  Rng batch_rng = derive_rng(config.seed, streams::kStudentBatches);
  std::vector<std::int64_t> all_rows(data.soft_nodes.size());
  std::iota(all_rows.begin(), all_rows.end(), 0);
  const auto batch_size = std::min<std::size_t>(static_cast<std::size_t>(config.rsd_batch),
                                                all_rows.size());
  Adam adam({.learning_rate = config.learning_rate, .weight_decay = config.weight_decay});

  StudentObjective objective;
  objective.x = prep.x_soft;
  objective.labeled_rows = prep.labeled_pos;
  objective.labeled_targets = prep.labeled_targets;
  objective.soft_labels = data.soft_labels;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.mu > 0.0 || config.eta > 0.0) {
      objective.batch.clear();
      std::sample(all_rows.begin(), all_rows.end(), std::back_inserter(objective.batch), batch_size,
                  batch_rng);
      if (config.mu > 0.0) objective.teacher_hidden = gather_rows(data.teacher_hidden, objective.batch);
      if (config.eta > 0.0) objective.delta = pgd_perturb(current, adversarial_batch(objective), config);
    }
    Tape tape;
    const StudentVars vars = record_student(tape, current, true);
    LossComponents parts;
    const Var total = record_objective(vars, objective, config, parts);

    double loss_value = 0.0;
    try {
      loss_value = total_loss(parts, config);
    } catch (const std::domain_error& e) {
      throw std::runtime_error("student training diverged at epoch " + std::to_string(epoch) +
                               ": " + e.what());
    }
    const std::vector<Matrix> grads = tape.grad(total, vars.all());
    adam.step(parameter_slots(current), grads);

    const double acc = validation_accuracy(current, prep.x_validation, data);
    fit.history.push_back({epoch, loss_value, acc});
    if (acc >= best_acc) {
      best_acc = acc;
      fit.model = current;
      fit.best_epoch = epoch;
    }
  }
  return fit;
}

StudentFit train_kd_mlp(const DistillData& data, double lambda, const DistillConfig& config) {
  config.validate();
  if (!(lambda >= 0.0)) throw std::invalid_argument("train_kd_mlp: lambda must be >= 0");
  const Prepared prep = prepare(data);
  StudentFit fit;
  fit.model = initial_model(data, config);
  StudentModel current = fit.model;
  double best_acc = validation_accuracy(current, prep.x_validation, data);
  Adam adam({.learning_rate = config.learning_rate, .weight_decay = config.weight_decay});

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    Tape tape;
    const StudentVars vars = record_student(tape, current, true);
    const Var logits = student_forward(vars, tape.constant(prep.x_soft)).logits;
    Var loss = cross_entropy(gather_rows(logits, prep.labeled_pos), prep.labeled_targets);
    if (lambda > 0.0) {
      loss = add(loss, scale(soft_label_term(logits, data.soft_labels, config.temperature), lambda));
    }
    const double loss_value = loss.scalar();
    if (!std::isfinite(loss_value)) {
      throw std::runtime_error("MLP training diverged at epoch " + std::to_string(epoch));
    }
    adam.step(parameter_slots(current), tape.grad(loss, vars.all()));
    const double acc = validation_accuracy(current, prep.x_validation, data);
    fit.history.push_back({epoch, loss_value, acc});
    if (acc >= best_acc) {
      best_acc = acc;
      fit.model = current;
      fit.best_epoch = epoch;
    }
  }
  return fit;
}

}  // namespace gdistill
