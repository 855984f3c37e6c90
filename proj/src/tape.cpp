#include "gdistill/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gdistill {

const char* op_name(Op op) {
  switch (op) {
    case Op::kVariable: return "variable";
    case Op::kConstant: return "constant";
    case Op::kMatMul: return "matmul";
    case Op::kAdd: return "add";
    case Op::kSub: return "sub";
    case Op::kMul: return "mul";
    case Op::kScale: return "scale";
    case Op::kAddRow: return "add_row";
    case Op::kRelu: return "relu";
    case Op::kLog: return "log";
    case Op::kExp: return "exp";
    case Op::kSoftmaxRows: return "softmax_rows";
    case Op::kLogSoftmaxRows: return "log_softmax_rows";
    case Op::kConcatCols: return "concat_cols";
    case Op::kSum: return "sum";
    case Op::kFrobeniusSq: return "frobenius_sq";
    case Op::kTranspose: return "transpose";
    case Op::kGatherRows: return "gather_rows";
    case Op::kSparseMul: return "sparse_mul";
  }
  return "unknown";
}

const Matrix& Var::value() const {
  if (tape_ == nullptr) throw std::logic_error("Var: unbound handle");
  return tape_->value(*this);
}

double Var::scalar() const {
  const Matrix& v = value();
  if (v.rows() != 1 || v.cols() != 1) {
    throw std::invalid_argument("Var::scalar: node is " + shape_of(v) + ", not 1x1");
  }
  return v(0, 0);
}

Var Tape::variable(Matrix value) {
  nodes_.push_back(Node{Op::kVariable, std::move(value), {}, true, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{Op::kConstant, std::move(value), {}, false, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::push(Op op, Matrix value, std::initializer_list<Var> inputs, BackwardFn backward) {
  Node node{op, std::move(value), {}, false, std::move(backward)};
  for (const Var& in : inputs) {
    if (in.tape() != this) {
      throw std::invalid_argument(std::string(op_name(op)) + ": operand belongs to another tape");
    }
    node.inputs.push_back(in.id());
    node.requires_grad = node.requires_grad || nodes_[in.id()].requires_grad;
  }
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

std::vector<Matrix> Tape::grad(const Var& output, std::span<const Var> wrt) {
  if (output.tape() != this) throw std::invalid_argument("grad: output belongs to another tape");
  const Matrix& out_value = nodes_[output.id()].value;
  if (out_value.rows() != 1 || out_value.cols() != 1) {
    throw std::invalid_argument("grad: output must be 1x1, got " + shape_of(out_value));
  }
  std::vector<Matrix> grads(output.id() + 1);
  std::vector<bool> reached(output.id() + 1, false);
  grads[output.id()] = Matrix::Ones(1, 1);
  reached[output.id()] = true;

  std::vector<Matrix*> input_grads;
  for (std::size_t id = output.id() + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (!reached[id] || !node.requires_grad || !node.backward) continue;
    input_grads.assign(node.inputs.size(), nullptr);
    for (std::size_t j = 0; j < node.inputs.size(); ++j) {
      const std::size_t in = node.inputs[j];
      if (!nodes_[in].requires_grad) continue;
      if (!reached[in]) {
        grads[in] = Matrix::Zero(nodes_[in].value.rows(), nodes_[in].value.cols());
        reached[in] = true;
      }
      input_grads[j] = &grads[in];
    }
    node.backward(node.value, grads[id], input_grads);
  }

  std::vector<Matrix> result;
  result.reserve(wrt.size());
  for (const Var& leaf : wrt) {
    if (leaf.tape() != this) throw std::invalid_argument("grad: leaf belongs to another tape");
    if (leaf.id() <= output.id() && reached[leaf.id()]) {
      result.push_back(grads[leaf.id()]);
    } else {
      const Matrix& v = nodes_[leaf.id()].value;
      result.push_back(Matrix::Zero(v.rows(), v.cols()));
    }
  }
  return result;
}

namespace {

Tape& tape_of(const Var& v) {
  if (v.tape() == nullptr) throw std::logic_error("operation on unbound Var");
  return *v.tape();
}

void require_same_shape(const char* op, const Var& a, const Var& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_of(a.value()) +
                                " vs " + shape_of(b.value()));
  }
}

Matrix one_by_one(double v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return m;
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: shape mismatch " + shape_of(a.value()) + " * " +
                                shape_of(b.value()));
  }
  return tape_of(a).push(Op::kMatMul, gdistill::matmul(a.value(), b.value()), {a, b},
                         [a, b](const Matrix&, const Matrix& g, std::span<Matrix* const> in) {
                           if (in[0]) *in[0] += matmul_transposed(g, b.value());
                           if (in[1]) {
                             const Matrix at = a.value().transpose();
                             *in[1] += gdistill::matmul(at, g);
                           }
                         });
}

Var add(const Var& a, const Var& b) {
  require_same_shape("add", a, b);
  return tape_of(a).push(Op::kAdd, a.value() + b.value(), {a, b},
                         [](const Matrix&, const Matrix& g, std::span<Matrix* const> in) {
                           if (in[0]) *in[0] += g;
                           if (in[1]) *in[1] += g;
                         });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape("sub", a, b);
  return tape_of(a).push(Op::kSub, a.value() - b.value(), {a, b},
                         [](const Matrix&, const Matrix& g, std::span<Matrix* const> in) {
                           if (in[0]) *in[0] += g;
                           if (in[1]) *in[1] -= g;
                         });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape("mul", a, b);
  return tape_of(a).push(Op::kMul, a.value().cwiseProduct(b.value()), {a, b},
                         [a, b](const Matrix&, const Matrix& g, std::span<Matrix* const> in) {
                           if (in[0]) *in[0] += g.cwiseProduct(b.value());
                           if (in[1]) *in[1] += g.cwiseProduct(a.value());
                         });
}

Var scale(const Var& a, double factor) {
  return tape_of(a).push(Op::kScale, a.value() * factor, {a},
                         [factor](const Matrix&, const Matrix& g, std::span<Matrix* const> in) {
                           if (in[0]) *in[0] += g * factor;
                         });
}

Var add_row(const Var& m, const Var& row) {
  if (row.rows() != 1 || row.cols() != m.cols()) {
    throw std::invalid_argument("add_row: row " + shape_of(row.value()) + " does not broadcast over " +
                                shape_of(m.value()));
  }
  Matrix value = m.value();
  value.rowwise() += row.value().row(0);
  return tape_of(m).push(Op::kAddRow, std::move(value), {m, row},
                         [](const Matrix&, const Matrix& g, std::span<Matrix* const> in) {
                           if (in[0]) *in[0] += g;
                           if (in[1]) *in[1] += g.colwise().sum();
                         });
}

Var relu(const Var& a) {
  return tape_of(a).push(Op::kRelu, a.value().cwiseMax(0.0), {a},
                         [a](const Matrix&, const Matrix& g, std::span<Matrix* const> in) {
                           if (in[0]) {
                             *in[0] += (a.value().array() > 0.0).select(g, 0.0).matrix();
                           }
                         });
}

Var log(const Var& a) {
  const Matrix& x = a.value();
  for (Index i = 0; i < x.size(); ++i) {
    if (!(x.data()[i] > 0.0)) {
      throw std::domain_error("log: entry " + std::to_string(i) + " is not strictly positive");
    }
  }
  return tape_of(a).push(Op::kLog, x.array().log().matrix(), {a},
                         [a](const Matrix&, const Matrix& g, std::span<Matrix* const> in) {
                           if (in[0]) *in[0] += g.cwiseQuotient(a.value());
                         });
}

Var exp(const Var& a) {
  Matrix value = a.value().array().exp().matrix();
  check_finite(value, "exp");
  return tape_of(a).push(Op::kExp, std::move(value), {a},
                         [](const Matrix& y, const Matrix& g, std::span<Matrix* const> in) {
                           if (in[0]) *in[0] += g.cwiseProduct(y);
                         });
}

Var softmax_rows(const Var& a) {
  return tape_of(a).push(Op::kSoftmaxRows, gdistill::softmax_rows(a.value()), {a},
                         [](const Matrix& s, const Matrix& g, std::span<Matrix* const> in) {
                           if (!in[0]) return;
                           const Eigen::VectorXd dot = g.cwiseProduct(s).rowwise().sum();
                           Matrix centered = g;
                           centered.colwise() -= dot;
                           *in[0] += s.cwiseProduct(centered);
                         });
}

Var log_softmax_rows(const Var& a) {
  return tape_of(a).push(Op::kLogSoftmaxRows, gdistill::log_softmax_rows(a.value()), {a},
                         [](const Matrix& y, const Matrix& g, std::span<Matrix* const> in) {
                           if (!in[0]) return;
                           const Eigen::VectorXd total = g.rowwise().sum();
                           Matrix soft = y.array().exp().matrix();
                           soft.array().colwise() *= total.array();
                           *in[0] += g - soft;
                         });
}

Var concat_cols(const Var& left, const Var& right) {
  const Index lc = left.cols();
  const Index rc = right.cols();
  return tape_of(left).push(Op::kConcatCols, gdistill::concat_cols(left.value(), right.value()),
                            {left, right},
                            [lc, rc](const Matrix&, const Matrix& g, std::span<Matrix* const> in) {
                              if (in[0]) *in[0] += g.leftCols(lc);
                              if (in[1]) *in[1] += g.rightCols(rc);
                            });
}

Var sum(const Var& a) {
  return tape_of(a).push(Op::kSum, one_by_one(a.value().sum()), {a},
                         [](const Matrix&, const Matrix& g, std::span<Matrix* const> in) {
                           if (in[0]) in[0]->array() += g(0, 0);
                         });
}

Var frobenius_sq(const Var& a) {
  return tape_of(a).push(Op::kFrobeniusSq, one_by_one(a.value().squaredNorm()), {a},
                         [a](const Matrix&, const Matrix& g, std::span<Matrix* const> in) {
                           if (in[0]) *in[0] += (2.0 * g(0, 0)) * a.value();
                         });
}

Var transpose(const Var& a) {
  Matrix value = a.value().transpose();
  return tape_of(a).push(Op::kTranspose, std::move(value), {a},
                         [](const Matrix&, const Matrix& g, std::span<Matrix* const> in) {
                           if (in[0]) *in[0] += g.transpose();
                         });
}

Var gather_rows(const Var& a, std::vector<std::int64_t> rows) {
  Matrix value = gdistill::gather_rows(a.value(), rows);
  return tape_of(a).push(Op::kGatherRows, std::move(value), {a},
                         [rows = std::move(rows)](const Matrix&, const Matrix& g,
                                                  std::span<Matrix* const> in) {
                           if (!in[0]) return;
                           for (std::size_t r = 0; r < rows.size(); ++r) {
                             in[0]->row(rows[r]) += g.row(static_cast<Index>(r));
                           }
                         });
}

Var sparse_mul(std::shared_ptr<const CsrMatrix> op, const Var& a) {
  if (!op) throw std::invalid_argument("sparse_mul: null operator");
  Matrix value = op->multiply(a.value());
  return tape_of(a).push(Op::kSparseMul, std::move(value), {a},
                         [op](const Matrix&, const Matrix& g, std::span<Matrix* const> in) {
                           if (in[0]) *in[0] += op->multiply_transposed(g);
                         });
}

Var cross_entropy(const Var& logits, std::span<const int> targets) {
  if (static_cast<Index>(targets.size()) != logits.rows()) {
    throw std::invalid_argument("cross_entropy: " + std::to_string(targets.size()) +
                                " targets for logits " + shape_of(logits.value()));
  }
  if (logits.rows() == 0) throw std::invalid_argument("cross_entropy: empty batch");
  Matrix onehot = Matrix::Zero(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const int t = targets[static_cast<std::size_t>(i)];
    if (t < 0 || t >= logits.cols()) {
      throw std::out_of_range("cross_entropy: row " + std::to_string(i) + " has class " +
                              std::to_string(t) + " outside [0, " + std::to_string(logits.cols()) +
                              ")");
    }
    onehot(i, t) = 1.0;
  }
  Tape& tape = tape_of(logits);
  const Var picked = mul(tape.constant(std::move(onehot)), log_softmax_rows(logits));
  return scale(sum(picked), -1.0 / static_cast<double>(logits.rows()));
}

Var soft_cross_entropy(const Var& logits, const Matrix& probs) {
  if (probs.rows() != logits.rows() || probs.cols() != logits.cols()) {
    throw std::invalid_argument("soft_cross_entropy: shape mismatch " + shape_of(probs) + " vs " +
                                shape_of(logits.value()));
  }
  if (logits.rows() == 0) throw std::invalid_argument("soft_cross_entropy: empty batch");
  Tape& tape = tape_of(logits);
  const Var weighted = mul(tape.constant(probs), log_softmax_rows(logits));
  return scale(sum(weighted), -1.0 / static_cast<double>(logits.rows()));
}

Var kl_divergence(const Var& logits, const Matrix& probs) {
  check_simplex_rows(probs);
  double neg_entropy = 0.0;
  for (Index i = 0; i < probs.size(); ++i) {
    const double z = probs.data()[i];
    if (z > 0.0) neg_entropy += z * std::log(z);
  }
  neg_entropy /= static_cast<double>(probs.rows());
  const Var ce = soft_cross_entropy(logits, probs);
  return add(ce, tape_of(logits).constant(one_by_one(neg_entropy)));
}

}  // namespace gdistill
