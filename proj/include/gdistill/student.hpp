#pragma once

#include "gdistill/nn.hpp"
#include "gdistill/positions.hpp"
#include "gdistill/tape.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gdistill {

/// Trade-off weights and optimization settings for student training.
struct DistillConfig {
  double lambda = 1.0;       // soft-label KL weight
  double mu = 0.1;           // representational-similarity weight
  double eta = 0.1;          // adversarial weight
  double epsilon = 0.05;     // l-infinity radius of the perturbation
  double step_size = 0.01;   // PGD step
  int pgd_steps = 5;
  Index rsd_batch = 256;     // batch for the similarity and adversarial terms
  double learning_rate = 0.01;
  int epochs = 200;
  Index hidden_dim = 128;
  int num_hidden_layers = 2;
  double temperature = 1.0;  // applied to student logits in the soft-label term
  double weight_decay = 0.0;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument naming the first bad field.
  void validate() const;
};

/// MLP over [content | position] features plus the square transform applied
/// to its last hidden layer before similarity matching.
struct StudentModel {
  std::vector<DenseLayer> layers;
  Matrix rsd_transform;
  Index content_dim = 0;
  Index position_dim = 0;

  Index input_dim() const { return content_dim + position_dim; }
  Index num_classes() const { return layers.back().out_dim(); }
  Index hidden_dim() const { return layers.back().in_dim(); }
  friend bool operator==(const StudentModel&, const StudentModel&) = default;
};

/// Glorot-uniform weights and transform, zero biases, from the student-init
/// stream of `seed`. With zero hidden layers the "hidden" representation is
/// the input itself.
StudentModel init_student(Index content_dim, Index position_dim, int num_classes,
                          Index hidden_dim, int num_hidden_layers, std::uint64_t seed);

/// [content | positions], content first. A zero-width table returns content.
Matrix concat_features(const Matrix& content, const PositionTable& positions);

struct StudentOutput {
  Matrix hidden;  // last pre-classifier activations
  Matrix logits;
};

StudentOutput student_forward(const StudentModel& model, const Matrix& x);

/// Argmax of the logits per node; ties go to the smallest class.
std::vector<int> student_predict(const StudentModel& model, const Matrix& content,
                                 const PositionTable& positions);

/// ||h_gnn h_gnn^T - H' H'^T||_F^2 / B^2 with H' = relu(h_mlp w_m).
double rsd_loss(const Matrix& h_gnn, const Matrix& h_mlp, const Matrix& w_m);

/// Rows of one adversarial batch. `labeled_rows` index rows of `x` whose
/// ground truth enters the objective; `soft_targets` covers every row.
struct AdversarialBatch {
  Matrix x;
  std::vector<std::int64_t> labeled_rows;
  std::vector<int> labeled_targets;
  Matrix soft_targets;
};

/// Projected sign-gradient ascent on the adversarial objective with respect
/// to the content columns. Starts from zero; sign(0) = 0. Returns the
/// B x content_dim perturbation; the model is not modified.
Matrix pgd_perturb(const StudentModel& model, const AdversarialBatch& batch,
                   const DistillConfig& config);

/// B x (content_dim + position_dim) copy of `delta` with zero position columns.
Matrix pad_perturbation(const Matrix& delta, Index position_dim);

/// Mean cross-entropy over labeled rows plus mean soft-label cross-entropy
/// over all rows, both on the perturbed content. A batch without labeled
/// rows contributes only the soft-label term.
double adversarial_loss(const StudentModel& model, const AdversarialBatch& batch,
                        const Matrix& delta);

struct LossComponents {
  double ground_truth = 0.0;
  double soft_label = 0.0;
  double similarity = 0.0;
  double adversarial = 0.0;
};

/// ground_truth + lambda*soft_label + mu*similarity + eta*adversarial.
/// Throws std::domain_error naming a non-finite component.
double total_loss(const LossComponents& components, const DistillConfig& config);

// Tape-level building blocks shared by PGD and the trainer.

struct StudentVars {
  std::vector<Var> weights;
  std::vector<Var> biases;
  Var rsd_transform;

  /// Weights and biases interleaved by layer, then the transform.
  std::vector<Var> all() const;
};

/// Records the model's parameters as variables (`trainable`) or constants.
StudentVars record_student(Tape& tape, const StudentModel& model, bool trainable);

struct StudentNodes {
  Var hidden;
  Var logits;
};

StudentNodes student_forward(const StudentVars& vars, const Var& x);

Var rsd_loss(const Var& h_mlp, const Var& w_m, const Matrix& h_gnn);

/// Adversarial objective on an already perturbed input.
Var adversarial_objective(const StudentVars& vars, const Var& x_perturbed,
                          const AdversarialBatch& batch);

/// One instance of the training objective. Ground-truth and soft-label
/// terms use every row of `x`; similarity and adversarial terms use the rows
/// listed in `batch`.
struct StudentObjective {
  Matrix x;
  std::vector<std::int64_t> labeled_rows;  // rows of x with ground truth
  std::vector<int> labeled_targets;
  Matrix soft_labels;                      // one row per row of x
  std::vector<std::int64_t> batch;         // rows of x
  Matrix teacher_hidden;                   // one row per batch entry
  Matrix delta;                            // batch x content_dim; used when eta > 0
};

/// The batch rows of `objective` as an adversarial batch.
AdversarialBatch adversarial_batch(const StudentObjective& objective);

/// Records ground_truth + lambda * soft_label + mu * similarity +
/// eta * adversarial, skipping zero-weight terms, and stores the term values
/// in `parts`. The soft-label term is KL against softmax(logits / temperature).
Var record_objective(const StudentVars& vars, const StudentObjective& objective,
                     const DistillConfig& config, LossComponents& parts);

/// Parameter slots in the same order as StudentVars::all().
std::vector<Matrix*> parameter_slots(StudentModel& model);

}  // namespace gdistill
