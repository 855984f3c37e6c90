#pragma once

#include "gdistill/matrix.hpp"
#include "gdistill/sparse.hpp"

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <vector>

namespace gdistill {

class Tape;

enum class Op {
  kVariable,
  kConstant,
  kMatMul,
  kAdd,
  kSub,
  kMul,
  kScale,
  kAddRow,
  kRelu,
  kLog,
  kExp,
  kSoftmaxRows,
  kLogSoftmaxRows,
  kConcatCols,
  kSum,
  kFrobeniusSq,
  kTranspose,
  kGatherRows,
  kSparseMul,
};

const char* op_name(Op op);

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  /// Value of a 1x1 node.
  double scalar() const;

  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Accumulates d(output)/d(input_i) into input_grads[i] given the node's own
/// value and incoming gradient. Null entries are inputs that do not depend on
/// any variable.
using BackwardFn = std::function<void(const Matrix& value, const Matrix& grad_out,
                                      std::span<Matrix* const> input_grads)>;

/// Single-use record of matrix operations in topological order. Gradients are
/// obtained by one reverse sweep. Not thread-safe; one tape per training step.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf that gradients can be requested for.
  Var variable(Matrix value);
  /// Leaf that never receives a gradient.
  Var constant(Matrix value);

  /// d(output)/d(leaf) for each leaf in `wrt`. `output` must be 1x1. Leaves
  /// that `output` does not depend on get a zero gradient.
  std::vector<Matrix> grad(const Var& output, std::span<const Var> wrt);
  std::vector<Matrix> grad(const Var& output, std::initializer_list<Var> wrt) {
    return grad(output, std::span<const Var>(wrt.begin(), wrt.size()));
  }

  std::size_t size() const { return nodes_.size(); }
  Op op(const Var& v) const { return nodes_.at(v.id()).op; }
  bool requires_grad(const Var& v) const { return nodes_.at(v.id()).requires_grad; }
  const Matrix& value(const Var& v) const { return nodes_.at(v.id()).value; }

  /// Appends a node. Used by the primitive builders below.
  Var push(Op op, Matrix value, std::initializer_list<Var> inputs, BackwardFn backward);

 private:
  struct Node {
    Op op;
    Matrix value;
    std::vector<std::size_t> inputs;
    bool requires_grad = false;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
};

// Primitives. Shapes are checked when the node is recorded.
Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
/// m + 1 * row, where row is 1 x m.cols().
Var add_row(const Var& m, const Var& row);
Var relu(const Var& a);
/// Natural log; every entry must be strictly positive.
Var log(const Var& a);
Var exp(const Var& a);
Var softmax_rows(const Var& a);
Var log_softmax_rows(const Var& a);
Var concat_cols(const Var& left, const Var& right);
/// Sum of all entries, as 1x1.
Var sum(const Var& a);
/// Squared Frobenius norm, as 1x1.
Var frobenius_sq(const Var& a);
Var transpose(const Var& a);
Var gather_rows(const Var& a, std::vector<std::int64_t> rows);
/// op * a for a fixed sparse operator.
Var sparse_mul(std::shared_ptr<const CsrMatrix> op, const Var& a);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(double s, const Var& a) { return scale(a, s); }

// Losses built from the primitives above.

/// Mean over rows of -log softmax(logits)[row, target].
Var cross_entropy(const Var& logits, std::span<const int> targets);
/// Mean over rows of -sum_k probs_k log softmax(logits)_k.
Var soft_cross_entropy(const Var& logits, const Matrix& probs);
/// Mean KL(probs || softmax(logits)). Differs from soft_cross_entropy by a
/// constant (the teacher entropy), so the gradients coincide.
Var kl_divergence(const Var& logits, const Matrix& probs);

}  // namespace gdistill
