#pragma once

#include "gdistill/graph.hpp"

#include <cstdint>
#include <vector>

namespace gdistill {

struct WalkCorpus {
  std::vector<std::vector<NodeId>> walks;
  Index walk_length = 0;
  Index walks_per_node = 0;
  NodeId num_nodes = 0;
};

/// Uniform random walks: walks_per_node walks of walk_length nodes from every
/// node with neighbors, and one single-node walk from every isolated node.
/// Each start node has its own generator, so the corpus is identical for any
/// thread count. Walks are grouped by start node in ascending order.
WalkCorpus sample_walks(const Graph& graph, Index walks_per_node, Index walk_length,
                        std::uint64_t seed, int threads = 1);

}  // namespace gdistill
