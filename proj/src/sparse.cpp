#include "gdistill/sparse.hpp"

#include <stdexcept>

namespace gdistill {

Matrix CsrMatrix::multiply(const Matrix& x) const {
  if (x.rows() != cols) {
    throw std::invalid_argument("CsrMatrix::multiply: shape mismatch " + shape_string(rows, cols) +
                                " * " + shape_of(x));
  }
  Matrix out = Matrix::Zero(rows, x.cols());
  for (Index r = 0; r < rows; ++r) {
    for (Index e = offsets[r]; e < offsets[r + 1]; ++e) {
      out.row(r) += values[e] * x.row(indices[e]);
    }
  }
  return out;
}

Matrix CsrMatrix::multiply_transposed(const Matrix& x) const {
  if (x.rows() != rows) {
    throw std::invalid_argument("CsrMatrix::multiply_transposed: shape mismatch (" +
                                shape_string(rows, cols) + ")^T * " + shape_of(x));
  }
  Matrix out = Matrix::Zero(cols, x.cols());
  for (Index r = 0; r < rows; ++r) {
    for (Index e = offsets[r]; e < offsets[r + 1]; ++e) {
      out.row(indices[e]) += values[e] * x.row(r);
    }
  }
  return out;
}

Matrix CsrMatrix::to_dense() const {
  Matrix out = Matrix::Zero(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index e = offsets[r]; e < offsets[r + 1]; ++e) out(r, indices[e]) += values[e];
  }
  return out;
}

}  // namespace gdistill
