#pragma once

#include "gdistill/graph.hpp"
#include "gdistill/student.hpp"
#include "gdistill/teacher.hpp"

#include <vector>

namespace gdistill {

/// Everything student training reads. Node ids refer to the full graph.
/// `soft_nodes` must be ascending and contain every labeled node; row i of
/// `soft_labels` and `teacher_hidden` belongs to soft_nodes[i].
struct DistillData {
  Matrix features;  // N x (content_dim + position_dim)
  Index content_dim = 0;
  std::vector<int> labels;
  int num_classes = 0;
  std::vector<NodeId> labeled;
  std::vector<NodeId> soft_nodes;
  Matrix soft_labels;
  Matrix teacher_hidden;
  std::vector<NodeId> validation;

  Index position_dim() const { return features.cols() - content_dim; }
  /// Throws std::invalid_argument on inconsistent sizes or ids.
  void validate() const;
};

struct StudentFit {
  StudentModel model;
  std::vector<EpochRecord> history;
  int best_epoch = 0;  // latest epoch reaching the best accuracy; 0 if none matches the initialization
};

/// Trains the student on ground truth + lambda * soft labels + mu * similarity
/// + eta * adversarial. Ground-truth and soft-label terms are full-batch over
/// the labeled and soft-label sets; the similarity and adversarial terms use
/// one batch of rsd_batch soft-label nodes per epoch, drawn without
/// replacement, with a fresh PGD perturbation against the current weights.
/// Terms with zero weight are skipped entirely. Keeps the parameters with the
/// best validation accuracy, the latest epoch among ties. Throws
/// std::runtime_error with the epoch index when the loss stops being finite.
StudentFit train_student(const DistillData& data, const DistillConfig& config);

/// Plain knowledge-distillation MLP: ground truth + lambda * soft labels,
/// nothing else. lambda = 0 is the supervised MLP baseline. Uses the
/// architecture, optimizer settings and seed from `config`.
StudentFit train_kd_mlp(const DistillData& data, double lambda, const DistillConfig& config);

}  // namespace gdistill
