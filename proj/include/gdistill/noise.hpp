#pragma once

#include "gdistill/matrix.hpp"

#include <cstdint>

namespace gdistill {

/// (1 - alpha) * content + alpha * n with n drawn i.i.d. from N(0, 1).
/// The noise draw depends only on `seed` and the shape, never on `content`.
Matrix inject_feature_noise(const Matrix& content, double alpha, std::uint64_t seed);

}  // namespace gdistill
