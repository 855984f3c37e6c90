#pragma once

#include "gdistill/matrix.hpp"
#include "gdistill/random.hpp"

#include <vector>

namespace gdistill {

/// Affine map x * weight + bias; weight is in x out, bias is 1 x out.
struct DenseLayer {
  Matrix weight;
  Matrix bias;

  Index in_dim() const { return weight.rows(); }
  Index out_dim() const { return weight.cols(); }
  friend bool operator==(const DenseLayer& a, const DenseLayer& b) {
    return a.weight == b.weight && a.bias == b.bias;
  }
};

/// Glorot-uniform weight, zero bias.
DenseLayer glorot_layer(Index in, Index out, Rng& rng);

/// x * layer.weight + layer.bias.
Matrix apply_layer(const Matrix& x, const DenseLayer& layer);

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double validation_accuracy = 0.0;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

}  // namespace gdistill
