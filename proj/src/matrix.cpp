#include "gdistill/matrix.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gdistill {

std::string shape_string(Index rows, Index cols) {
  std::ostringstream os;
  os << rows << "x" << cols;
  return os.str();
}

template <typename Scalar>
MatrixX<Scalar> matmul(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: shape mismatch " + shape_of(a) + " * " + shape_of(b));
  }
  const Index m = a.rows();
  const Index k = a.cols();
  const Index n = b.cols();
  MatrixX<Scalar> out = MatrixX<Scalar>::Zero(m, n);
  for (Index i = 0; i < m; ++i) {
    Scalar* out_row = out.data() + i * n;
    const Scalar* a_row = a.data() + i * k;
    for (Index p = 0; p < k; ++p) {
      const Scalar aip = a_row[p];
      if (aip == Scalar(0)) continue;  // adds only signed zeros when b is finite
      const Scalar* b_row = b.data() + p * n;
      for (Index j = 0; j < n; ++j) out_row[j] += aip * b_row[j];
    }
  }
  return out;
}

template <typename Scalar>
MatrixX<Scalar> matmul_transposed(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b) {
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("matmul_transposed: shape mismatch " + shape_of(a) + " * (" +
                                shape_of(b) + ")^T");
  }
  // Same per-entry summation order as the dot-product loop, vectorized over j.
  const MatrixX<Scalar> bt = b.transpose();
  return matmul(a, bt);
}

template <typename Scalar>
MatrixX<Scalar> log_softmax_rows(const MatrixX<Scalar>& logits) {
  MatrixX<Scalar> out(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const Scalar mx = logits.row(i).maxCoeff();
    Scalar s = 0;
    for (Index j = 0; j < logits.cols(); ++j) s += std::exp(logits(i, j) - mx);
    const Scalar lse = mx + std::log(s);
    for (Index j = 0; j < logits.cols(); ++j) out(i, j) = logits(i, j) - lse;
  }
  return out;
}

template <typename Scalar>
MatrixX<Scalar> softmax_rows(const MatrixX<Scalar>& logits) {
  MatrixX<Scalar> out(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const Scalar mx = logits.row(i).maxCoeff();
    Scalar s = 0;
    for (Index j = 0; j < logits.cols(); ++j) {
      out(i, j) = std::exp(logits(i, j) - mx);
      s += out(i, j);
    }
    out.row(i) /= s;
  }
  return out;
}

template Matrix matmul<double>(const Matrix&, const Matrix&);
template MatrixX<float> matmul<float>(const MatrixX<float>&, const MatrixX<float>&);
template Matrix matmul_transposed<double>(const Matrix&, const Matrix&);
template MatrixX<float> matmul_transposed<float>(const MatrixX<float>&, const MatrixX<float>&);
template Matrix softmax_rows<double>(const Matrix&);
template MatrixX<float> softmax_rows<float>(const MatrixX<float>&);
template Matrix log_softmax_rows<double>(const Matrix&);
template MatrixX<float> log_softmax_rows<float>(const MatrixX<float>&);

double softmax_cross_entropy(const Matrix& logits, std::span<const int> targets) {
  if (static_cast<Index>(targets.size()) != logits.rows()) {
    throw std::invalid_argument("softmax_cross_entropy: " + std::to_string(targets.size()) +
                                " targets for logits " + shape_of(logits));
  }
  if (logits.rows() == 0) throw std::invalid_argument("softmax_cross_entropy: empty batch");
  const Matrix logp = log_softmax_rows(logits);
  double total = 0.0;
  for (Index i = 0; i < logits.rows(); ++i) {
    const int t = targets[static_cast<std::size_t>(i)];
    if (t < 0 || t >= logits.cols()) {
      throw std::out_of_range("softmax_cross_entropy: row " + std::to_string(i) + " has class " +
                              std::to_string(t) + " outside [0, " + std::to_string(logits.cols()) +
                              ")");
    }
    total -= logp(i, t);
  }
  return total / static_cast<double>(logits.rows());
}

void check_simplex_rows(const Matrix& probs, double tol) {
  for (Index i = 0; i < probs.rows(); ++i) {
    double s = 0.0;
    for (Index j = 0; j < probs.cols(); ++j) {
      const double p = probs(i, j);
      if (!std::isfinite(p) || p < 0.0) {
        throw std::invalid_argument("row " + std::to_string(i) +
                                    " is not a probability distribution (negative or non-finite "
                                    "entry)");
      }
      s += p;
    }
    if (std::abs(s - 1.0) > tol) {
      throw std::invalid_argument("row " + std::to_string(i) +
                                  " is not a probability distribution (sums to " +
                                  std::to_string(s) + ")");
    }
  }
}

double kl_divergence(const Matrix& teacher_probs, const Matrix& student_logits) {
  if (teacher_probs.rows() != student_logits.rows() ||
      teacher_probs.cols() != student_logits.cols()) {
    throw std::invalid_argument("kl_divergence: shape mismatch " + shape_of(teacher_probs) +
                                " vs " + shape_of(student_logits));
  }
  if (teacher_probs.rows() == 0) throw std::invalid_argument("kl_divergence: empty batch");
  check_simplex_rows(teacher_probs);
  const Matrix logq = log_softmax_rows(student_logits);
  double total = 0.0;
  for (Index i = 0; i < teacher_probs.rows(); ++i) {
    for (Index j = 0; j < teacher_probs.cols(); ++j) {
      const double z = teacher_probs(i, j);
      if (z > 0.0) total += z * (std::log(z) - logq(i, j));
    }
  }
  return total / static_cast<double>(teacher_probs.rows());
}

void check_finite(const Matrix& m, const std::string& what) {
  if (!m.allFinite()) throw std::runtime_error(what + " contains non-finite values");
}

std::vector<int> argmax_rows(const Matrix& m) {
  std::vector<int> out(static_cast<std::size_t>(m.rows()), 0);
  for (Index i = 0; i < m.rows(); ++i) {
    int best = 0;
    for (Index j = 1; j < m.cols(); ++j) {
      if (m(i, j) > m(i, best)) best = static_cast<int>(j);
    }
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

Matrix gather_rows(const Matrix& m, std::span<const std::int64_t> rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= m.rows()) {
      throw std::out_of_range("gather_rows: row " + std::to_string(rows[r]) + " outside " +
                              shape_of(m));
    }
    out.row(static_cast<Index>(r)) = m.row(rows[r]);
  }
  return out;
}

Matrix concat_cols(const Matrix& left, const Matrix& right) {
  if (left.rows() != right.rows()) {
    throw std::invalid_argument("concat_cols: row mismatch " + shape_of(left) + " | " +
                                shape_of(right));
  }
  Matrix out(left.rows(), left.cols() + right.cols());
  out.leftCols(left.cols()) = left;
  out.rightCols(right.cols()) = right;
  return out;
}

}  // namespace gdistill
