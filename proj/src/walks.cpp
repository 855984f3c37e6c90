#include "gdistill/walks.hpp"

#include "gdistill/random.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>

namespace gdistill {

namespace {

std::vector<std::vector<NodeId>> walks_from(const Graph& graph, NodeId start, Index walks_per_node,
                                            Index walk_length, std::uint64_t seed) {
  if (graph.degree(start) == 0) return {{start}};
  Rng rng = derive_rng(seed, streams::kWalksBase + static_cast<std::uint64_t>(start));
  std::vector<std::vector<NodeId>> out(static_cast<std::size_t>(walks_per_node));
  for (auto& walk : out) {
    walk.reserve(static_cast<std::size_t>(walk_length));
    walk.push_back(start);
    NodeId cur = start;
    for (Index step = 1; step < walk_length; ++step) {
      const auto nb = graph.neighbors(cur);
      std::uniform_int_distribution<std::size_t> pick(0, nb.size() - 1);
      cur = nb[pick(rng)];
      walk.push_back(cur);
    }
  }
  return out;
}

}  // namespace

WalkCorpus sample_walks(const Graph& graph, Index walks_per_node, Index walk_length,
                        std::uint64_t seed, int threads) {
  if (graph.num_nodes() == 0) throw std::invalid_argument("sample_walks: empty graph");
  if (walk_length < 1) throw std::invalid_argument("sample_walks: walk_length must be >= 1");
  if (walks_per_node < 1) throw std::invalid_argument("sample_walks: walks_per_node must be >= 1");

  const NodeId n = graph.num_nodes();
  std::vector<std::vector<std::vector<NodeId>>> per_node(static_cast<std::size_t>(n));
  const int workers = std::clamp<int>(threads, 1, static_cast<int>(std::min<NodeId>(n, 64)));
  if (workers == 1) {
    for (NodeId v = 0; v < n; ++v) per_node[v] = walks_from(graph, v, walks_per_node, walk_length, seed);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (NodeId v = w; v < n; v += workers) {
          per_node[v] = walks_from(graph, v, walks_per_node, walk_length, seed);
        }
      });
    }
  }

  WalkCorpus corpus;
  corpus.walk_length = walk_length;
  corpus.walks_per_node = walks_per_node;
  corpus.num_nodes = n;
  for (auto& group : per_node) {
    for (auto& walk : group) corpus.walks.push_back(std::move(walk));
  }
  return corpus;
}

}  // namespace gdistill
