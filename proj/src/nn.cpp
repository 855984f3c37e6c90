#include "gdistill/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace gdistill {

DenseLayer glorot_layer(Index in, Index out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  DenseLayer layer{Matrix(in, out), Matrix::Zero(1, out)};
  for (Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = dist(rng);
  return layer;
}

Matrix apply_layer(const Matrix& x, const DenseLayer& layer) {
  Matrix out = matmul(x, layer.weight);
  out.rowwise() += layer.bias.row(0);
  return out;
}

}  // namespace gdistill
