#pragma once

#include "gdistill/matrix.hpp"

#include <vector>

namespace gdistill {

/// Compressed sparse row matrix with fixed accumulation order, used for
/// neighbor aggregation. Products iterate stored entries in index order.
struct CsrMatrix {
  Index rows = 0;
  Index cols = 0;
  std::vector<Index> offsets;  // rows + 1 entries
  std::vector<Index> indices;
  std::vector<double> values;

  Index nonzeros() const { return static_cast<Index>(indices.size()); }

  /// this * x
  Matrix multiply(const Matrix& x) const;
  /// this^T * x
  Matrix multiply_transposed(const Matrix& x) const;
  /// Dense copy, for tests.
  Matrix to_dense() const;
};

}  // namespace gdistill
