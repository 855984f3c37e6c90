#pragma once

#include "gdistill/graph.hpp"

#include <cstdint>

namespace gdistill {

struct SbmParams {
  int blocks = 2;
  NodeId nodes_per_block = 250;
  double p_in = 0.1;
  double p_out = 0.01;
  Index feature_dim = 16;
  double feature_signal = 0.5;
};

/// Stochastic block model. Node v belongs to block v / nodes_per_block and is
/// labeled with it. Each block draws a random unit-norm mean direction; node
/// features are feature_signal * mean + (1 - feature_signal) * N(0, I).
/// Requires 0 <= p_out <= p_in <= 1.
Graph generate_sbm(const SbmParams& params, std::uint64_t seed);

}  // namespace gdistill
