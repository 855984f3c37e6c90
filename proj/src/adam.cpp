#include "gdistill/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace gdistill {

void Adam::step(std::span<Matrix* const> params, std::span<const Matrix> grads) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("Adam::step: " + std::to_string(params.size()) + " params but " +
                                std::to_string(grads.size()) + " gradients");
  }
  if (m_.empty()) {
    for (const Matrix* p : params) {
      m_.push_back(Matrix::Zero(p->rows(), p->cols()));
      v_.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
  if (m_.size() != params.size()) throw std::invalid_argument("Adam::step: parameter list changed");
  ++t_;
  const double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& p = *params[i];
    if (grads[i].rows() != p.rows() || grads[i].cols() != p.cols()) {
      throw std::invalid_argument("Adam::step: gradient " + shape_of(grads[i]) +
                                  " for parameter " + shape_of(p));
    }
    Matrix g = grads[i];
    if (options_.weight_decay != 0.0) g += options_.weight_decay * p;
    m_[i] = options_.beta1 * m_[i] + (1.0 - options_.beta1) * g;
    v_[i] = options_.beta2 * v_[i] + (1.0 - options_.beta2) * g.cwiseProduct(g);
    p.array() -= options_.learning_rate * (m_[i].array() / bc1) /
                 ((v_[i].array() / bc2).sqrt() + options_.epsilon);
  }
}

}  // namespace gdistill
