#pragma once

#include "gdistill/graph.hpp"
#include "gdistill/nn.hpp"
#include "gdistill/sparse.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace gdistill {

struct TeacherConfig {
  Index hidden_dim = 64;
  int num_layers = 2;
  double learning_rate = 0.01;
  int epochs = 200;
  double weight_decay = 0.0;
};

/// GraphSAGE with GCN-style aggregation: every layer averages a node with its
/// neighbors and applies an affine map, with ReLU between layers.
struct TeacherModel {
  std::vector<DenseLayer> layers;

  Index input_dim() const { return layers.front().in_dim(); }
  Index num_classes() const { return layers.back().out_dim(); }
  /// Width of the representation fed to the classifier layer.
  Index hidden_dim() const { return layers.back().in_dim(); }
  friend bool operator==(const TeacherModel&, const TeacherModel&) = default;
};

struct TeacherOutputs {
  Matrix soft_labels;  // rows on the simplex
  Matrix hidden;       // last hidden layer, before the classifier
  std::vector<NodeId> nodes;
};

struct TeacherFit {
  TeacherModel model;
  std::vector<EpochRecord> history;
  int best_epoch = 0;  // latest epoch reaching the best accuracy; 0 if none matches the initialization
};

/// Row-normalized operator averaging {v} and N(v) for every node v.
std::shared_ptr<const CsrMatrix> mean_aggregation_operator(const Graph& graph);

/// For each node, mean of its own row and its neighbors' rows of `h_in`,
/// mapped through `layer`.
Matrix sage_layer_forward(const Matrix& h_in, const Graph& graph, const DenseLayer& layer);

/// Glorot-uniform weights and zero biases drawn from the teacher-init stream.
TeacherModel init_teacher(Index input_dim, int num_classes, const TeacherConfig& config,
                          std::uint64_t seed);

/// Full-batch Adam on mean cross-entropy over `labeled`, keeping the
/// parameters with the best accuracy on `validation`, the latest epoch among
/// ties. Node ids index `view`. Throws std::runtime_error on a non-finite loss.
TeacherFit train_teacher(const Graph& view, std::span<const NodeId> labeled,
                         std::span<const NodeId> validation, const TeacherConfig& config,
                         std::uint64_t seed);

struct TeacherForward {
  Matrix hidden;
  Matrix logits;
};

/// Layer-wise full-graph forward pass.
TeacherForward teacher_forward(const TeacherModel& model, const Graph& graph);

/// Logits computed node by node, each from its own multi-hop computation
/// tree with nothing shared between nodes. This is the cost of serving one
/// node at a time; the result equals teacher_forward up to summation order.
Matrix teacher_logits_nodewise(const TeacherModel& model, const Graph& graph);

/// Soft labels softmax(logits / temperature) and hidden rows for `nodes`.
TeacherOutputs export_teacher_outputs(const TeacherModel& model, const Graph& graph,
                                      std::span<const NodeId> nodes, double temperature = 1.0);

}  // namespace gdistill
