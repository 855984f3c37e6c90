#include "gdistill/sbm.hpp"

#include "gdistill/random.hpp"

#include <cmath>
#include <stdexcept>

namespace gdistill {

namespace {

// Visits each of `total` slots independently with probability p, skipping
// ahead geometrically so sparse blocks cost O(edges) instead of O(pairs).
template <typename Emit>
void bernoulli_slots(std::int64_t total, double p, Rng& rng, Emit emit) {
  if (total <= 0 || p <= 0.0) return;
  if (p >= 1.0) {
    for (std::int64_t i = 0; i < total; ++i) emit(i);
    return;
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double log_q = std::log1p(-p);
  std::int64_t idx = -1;
  while (true) {
    const double u = unif(rng);
    const double skip = std::floor(std::log1p(-u) / log_q);
    if (skip >= static_cast<double>(total)) break;
    idx += 1 + static_cast<std::int64_t>(skip);
    if (idx >= total) break;
    emit(idx);
  }
}

}  // namespace

Graph generate_sbm(const SbmParams& params, std::uint64_t seed) {
  if (params.blocks < 1 || params.nodes_per_block < 1) {
    throw std::invalid_argument("generate_sbm: need at least one block with one node");
  }
  if (!(params.p_out >= 0.0 && params.p_in <= 1.0)) {
    throw std::invalid_argument("generate_sbm: probabilities must lie in [0, 1]");
  }
  if (params.p_out > params.p_in) {
    throw std::invalid_argument("generate_sbm: p_out > p_in; the generator is assortative only");
  }
  if (!(params.feature_signal >= 0.0 && params.feature_signal <= 1.0)) {
    throw std::invalid_argument("generate_sbm: feature_signal must lie in [0, 1]");
  }
  if (params.feature_dim < 1) throw std::invalid_argument("generate_sbm: feature_dim < 1");

  const NodeId b = params.nodes_per_block;
  const NodeId n = b * params.blocks;
  Rng edge_rng = derive_rng(seed, streams::kSbmEdges);
  std::vector<Edge> edges;
  for (int x = 0; x < params.blocks; ++x) {
    const NodeId base_x = x * b;
    // Pairs (i, j), i > j, within block x, in row-major order of i.
    bernoulli_slots(b * (b - 1) / 2, params.p_in, edge_rng, [&](std::int64_t idx) {
      const auto i = static_cast<NodeId>(
          std::floor((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(idx))) / 2.0));
      NodeId row = i;
      while (row * (row - 1) / 2 > idx) --row;
      while ((row + 1) * row / 2 <= idx) ++row;
      const NodeId col = idx - row * (row - 1) / 2;
      edges.push_back({base_x + row, base_x + col});
    });
    for (int y = x + 1; y < params.blocks; ++y) {
      const NodeId base_y = y * b;
      bernoulli_slots(b * b, params.p_out, edge_rng, [&](std::int64_t idx) {
        edges.push_back({base_x + idx / b, base_y + idx % b});
      });
    }
  }

  Rng feat_rng = derive_rng(seed, streams::kSbmFeatures);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix means(params.blocks, params.feature_dim);
  for (int x = 0; x < params.blocks; ++x) {
    for (Index j = 0; j < params.feature_dim; ++j) means(x, j) = normal(feat_rng);
    means.row(x).normalize();
  }
  Matrix content(n, params.feature_dim);
  std::vector<int> labels(static_cast<std::size_t>(n));
  const double s = params.feature_signal;
  for (NodeId v = 0; v < n; ++v) {
    const int block = static_cast<int>(v / b);
    labels[v] = block;
    for (Index j = 0; j < params.feature_dim; ++j) {
      content(v, j) = s * means(block, j) + (1.0 - s) * normal(feat_rng);
    }
  }
  return Graph::from_edges(n, edges, std::move(content), std::move(labels), params.blocks);
}

}  // namespace gdistill
