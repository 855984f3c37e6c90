#include "gdistill/noise.hpp"

#include "gdistill/random.hpp"

#include <stdexcept>

namespace gdistill {

Matrix inject_feature_noise(const Matrix& content, double alpha, std::uint64_t seed) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("inject_feature_noise: alpha must lie in [0, 1]");
  }
  if (alpha == 0.0) return content;
  Rng rng = derive_rng(seed, streams::kNoise);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(content.rows(), content.cols());
  for (Index i = 0; i < out.size(); ++i) {
    out.data()[i] = (1.0 - alpha) * content.data()[i] + alpha * normal(rng);
  }
  return out;
}

}  // namespace gdistill
