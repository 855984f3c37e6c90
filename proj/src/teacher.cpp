#include "gdistill/teacher.hpp"

#include "gdistill/adam.hpp"
#include "gdistill/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gdistill {

namespace {

double accuracy_on(const Matrix& logits, const std::vector<int>& labels,
                   std::span<const NodeId> nodes) {
  if (nodes.empty()) return 0.0;
  const std::vector<int> pred = argmax_rows(logits);
  std::size_t hits = 0;
  for (NodeId v : nodes) hits += pred[v] == labels[v];
  return static_cast<double>(hits) / static_cast<double>(nodes.size());
}

}  // namespace

std::shared_ptr<const CsrMatrix> mean_aggregation_operator(const Graph& graph) {
  auto op = std::make_shared<CsrMatrix>();
  const NodeId n = graph.num_nodes();
  op->rows = n;
  op->cols = n;
  op->offsets.reserve(static_cast<std::size_t>(n) + 1);
  op->offsets.push_back(0);
  for (NodeId v = 0; v < n; ++v) {
    const auto nb = graph.neighbors(v);
    const double w = 1.0 / static_cast<double>(nb.size() + 1);
    bool self_done = false;
    for (NodeId u : nb) {
      if (!self_done && v < u) {
        op->indices.push_back(v);
        op->values.push_back(w);
        self_done = true;
      }
      op->indices.push_back(u);
      op->values.push_back(w);
    }
    if (!self_done) {
      op->indices.push_back(v);
      op->values.push_back(w);
    }
    op->offsets.push_back(static_cast<Index>(op->indices.size()));
  }
  return op;
}

Matrix sage_layer_forward(const Matrix& h_in, const Graph& graph, const DenseLayer& layer) {
  if (h_in.rows() != graph.num_nodes()) {
    throw std::invalid_argument("sage_layer_forward: " + shape_of(h_in) + " input for " +
                                std::to_string(graph.num_nodes()) + " nodes");
  }
  return apply_layer(mean_aggregation_operator(graph)->multiply(h_in), layer);
}

TeacherModel init_teacher(Index input_dim, int num_classes, const TeacherConfig& config,
                          std::uint64_t seed) {
  if (config.num_layers < 1) throw std::invalid_argument("teacher: num_layers must be >= 1");
  Rng rng = derive_rng(seed, streams::kTeacherInit);
  TeacherModel model;
  Index in = input_dim;
  for (int l = 0; l < config.num_layers; ++l) {
    const Index out = (l + 1 == config.num_layers) ? num_classes : config.hidden_dim;
    model.layers.push_back(glorot_layer(in, out, rng));
    in = out;
  }
  return model;
}

TeacherForward teacher_forward(const TeacherModel& model, const Graph& graph) {
  if (graph.content_dim() != model.input_dim()) {
    throw std::invalid_argument("teacher_forward: graph has " +
                                std::to_string(graph.content_dim()) +
                                "-dim features, model expects " +
                                std::to_string(model.input_dim()));
  }
  const auto agg = mean_aggregation_operator(graph);
  TeacherForward out;
  Matrix h = graph.content();
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    if (l + 1 == model.layers.size()) out.hidden = h;
    h = apply_layer(agg->multiply(h), model.layers[l]);
    if (l + 1 < model.layers.size()) h = h.cwiseMax(0.0);
  }
  out.logits = std::move(h);
  return out;
}

namespace {

Eigen::RowVectorXd nodewise(const TeacherModel& model, const Graph& graph, NodeId v,
                            std::size_t depth) {
  if (depth == 0) return graph.content().row(v);
  const auto nb = graph.neighbors(v);
  const double w = 1.0 / static_cast<double>(nb.size() + 1);
  Matrix acc = Matrix::Zero(1, depth == 1 ? graph.content_dim() : model.layers[depth - 2].out_dim());
  bool self_done = false;
  auto add = [&](NodeId u) { acc.row(0) += w * nodewise(model, graph, u, depth - 1); };
  for (NodeId u : nb) {
    if (!self_done && v < u) {
      add(v);
      self_done = true;
    }
    add(u);
  }
  if (!self_done) add(v);
  Matrix out = apply_layer(acc, model.layers[depth - 1]);
  if (depth < model.layers.size()) out = out.cwiseMax(0.0);
  return out.row(0);
}

}  // namespace

Matrix teacher_logits_nodewise(const TeacherModel& model, const Graph& graph) {
  Matrix logits(graph.num_nodes(), model.num_classes());
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    logits.row(v) = nodewise(model, graph, v, model.layers.size());
  }
  return logits;
}

TeacherFit train_teacher(const Graph& view, std::span<const NodeId> labeled,
                         std::span<const NodeId> validation, const TeacherConfig& config,
                         std::uint64_t seed) {
  if (labeled.empty()) throw std::invalid_argument("train_teacher: no labeled nodes");
  TeacherFit fit;
  fit.model = init_teacher(view.content_dim(), view.num_classes(), config, seed);
  TeacherModel current = fit.model;
  double best_acc = accuracy_on(teacher_forward(current, view).logits, view.labels(), validation);

  const auto agg = mean_aggregation_operator(view);
  std::vector<int> targets;
  for (NodeId v : labeled) targets.push_back(view.labels()[v]);
  const std::vector<std::int64_t> rows(labeled.begin(), labeled.end());
  Adam adam({.learning_rate = config.learning_rate, .weight_decay = config.weight_decay});

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    Tape tape;
    std::vector<Var> params;
    Var h = tape.constant(view.content());
    for (std::size_t l = 0; l < current.layers.size(); ++l) {
      const Var w = tape.variable(current.layers[l].weight);
      const Var b = tape.variable(current.layers[l].bias);
      params.push_back(w);
      params.push_back(b);
      h = add_row(matmul(sparse_mul(agg, h), w), b);
      if (l + 1 < current.layers.size()) h = relu(h);
    }
    const Var loss = cross_entropy(gather_rows(h, rows), targets);
    const double loss_value = loss.scalar();
    if (!std::isfinite(loss_value)) {
      throw std::runtime_error("teacher training diverged at epoch " + std::to_string(epoch) +
                               " (learning rate " + std::to_string(config.learning_rate) + ")");
    }
    const std::vector<Matrix> grads = tape.grad(loss, params);
    std::vector<Matrix*> slots;
    for (auto& layer : current.layers) {
      slots.push_back(&layer.weight);
      slots.push_back(&layer.bias);
    }
    adam.step(slots, grads);

    const double acc = accuracy_on(teacher_forward(current, view).logits, view.labels(), validation);
    fit.history.push_back({epoch, loss_value, acc});
    if (acc >= best_acc) {
      best_acc = acc;
      fit.model = current;
      fit.best_epoch = epoch;
    }
  }
  return fit;
}

TeacherOutputs export_teacher_outputs(const TeacherModel& model, const Graph& graph,
                                      std::span<const NodeId> nodes, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("export_teacher_outputs: temperature <= 0");
  const TeacherForward fwd = teacher_forward(model, graph);
  const std::vector<std::int64_t> rows(nodes.begin(), nodes.end());
  TeacherOutputs out;
  out.soft_labels = softmax_rows(Matrix(gather_rows(fwd.logits, rows) / temperature));
  out.hidden = gather_rows(fwd.hidden, rows);
  out.nodes.assign(nodes.begin(), nodes.end());
  return out;
}

}  // namespace gdistill
