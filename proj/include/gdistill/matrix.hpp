#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gdistill {

/// Dense row-major matrix. Every matrix-valued quantity in the library
/// (features, weights, hidden representations, soft labels) uses this layout.
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Matrix = MatrixX<double>;
using Index = Eigen::Index;

std::string shape_string(Index rows, Index cols);

template <typename Derived>
std::string shape_of(const Eigen::DenseBase<Derived>& m) {
  return shape_string(m.rows(), m.cols());
}

/// Matrix product with a fixed summation order: out(i, j) accumulates
/// a(i, k) * b(k, j) for k = 0, 1, ... starting from zero. The result is
/// bit-identical to the textbook triple loop for finite inputs, which Eigen's
/// blocked GEMM is not. Zero entries of `a` are skipped.
template <typename Scalar>
MatrixX<Scalar> matmul(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b);

/// a * b^T, with the same per-entry summation order as matmul.
template <typename Scalar>
MatrixX<Scalar> matmul_transposed(const MatrixX<Scalar>& a, const MatrixX<Scalar>& b);

/// Row-wise softmax, log-sum-exp stabilized.
template <typename Scalar>
MatrixX<Scalar> softmax_rows(const MatrixX<Scalar>& logits);

template <typename Scalar>
MatrixX<Scalar> log_softmax_rows(const MatrixX<Scalar>& logits);

/// Mean over rows of -log softmax(logits)[row, target[row]].
double softmax_cross_entropy(const Matrix& logits, std::span<const int> targets);

/// Mean over rows of sum_k z_k (log z_k - log softmax(logits)_k); 0 log 0 = 0.
double kl_divergence(const Matrix& teacher_probs, const Matrix& student_logits);

/// Throws if any row is not on the probability simplex within `tol`.
void check_simplex_rows(const Matrix& probs, double tol = 1e-6);

void check_finite(const Matrix& m, const std::string& what);

/// Column of the maximum in each row; ties go to the smallest column.
std::vector<int> argmax_rows(const Matrix& m);

/// Selects rows by index, in the order given.
Matrix gather_rows(const Matrix& m, std::span<const std::int64_t> rows);

/// [left | right]; either side may have zero columns.
Matrix concat_cols(const Matrix& left, const Matrix& right);

}  // namespace gdistill
