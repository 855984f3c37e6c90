#pragma once

#include "gdistill/matrix.hpp"

#include <span>
#include <vector>

namespace gdistill {

struct AdamOptions {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
};

/// Adam with bias correction. Moment buffers are shaped lazily on the first
/// step to match the parameter list.
class Adam {
 public:
  explicit Adam(AdamOptions options) : options_(options) {}

  void step(std::span<Matrix* const> params, std::span<const Matrix> grads);
  long steps() const { return t_; }
  const AdamOptions& options() const { return options_; }

 private:
  AdamOptions options_;
  long t_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace gdistill
