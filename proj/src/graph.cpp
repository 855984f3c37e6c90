#include "gdistill/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace gdistill {

Graph Graph::from_edges(NodeId num_nodes, std::span<const Edge> edges, Matrix content,
                        std::vector<int> labels, int num_classes, EdgeListStats* stats) {
  if (num_nodes < 0) throw std::invalid_argument("Graph: negative node count");
  EdgeListStats local;
  std::vector<std::pair<NodeId, NodeId>> directed;
  directed.reserve(edges.size() * 2);
  for (const Edge& e : edges) {
    for (NodeId id : {e.src, e.dst}) {
      if (id < 0 || id >= num_nodes) {
        throw std::out_of_range("Graph: node " + std::to_string(id) + " outside [0, " +
                                std::to_string(num_nodes) + ")");
      }
    }
    if (e.src == e.dst) {
      ++local.self_loops_dropped;
      continue;
    }
    directed.emplace_back(e.src, e.dst);
    directed.emplace_back(e.dst, e.src);
  }
  std::sort(directed.begin(), directed.end());
  const std::size_t before = directed.size();
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());
  local.duplicates_merged = (before - directed.size()) / 2;

  Graph g;
  g.offsets_.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
  for (const auto& [u, v] : directed) ++g.offsets_[static_cast<std::size_t>(u) + 1];
  for (std::size_t i = 1; i < g.offsets_.size(); ++i) g.offsets_[i] += g.offsets_[i - 1];
  g.neighbors_.reserve(directed.size());
  for (const auto& [u, v] : directed) g.neighbors_.push_back(v);
  g.content_ = std::move(content);
  g.labels_ = std::move(labels);
  g.num_classes_ = num_classes;
  if (stats) *stats = local;
  g.validate();
  return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  const auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (NodeId u = 0; u < num_nodes(); ++u) {
    for (NodeId v : neighbors(u)) {
      if (u < v) out.push_back({u, v});
    }
  }
  return out;
}

Graph Graph::with_content(Matrix content) const {
  if (content.rows() != num_nodes()) {
    throw std::invalid_argument("Graph::with_content: " + shape_of(content) + " features for " +
                                std::to_string(num_nodes()) + " nodes");
  }
  Graph g = *this;
  g.content_ = std::move(content);
  return g;
}

void Graph::validate() const {
  const NodeId n = num_nodes();
  if (content_.rows() != n) {
    throw std::logic_error("Graph: content has " + std::to_string(content_.rows()) +
                           " rows for " + std::to_string(n) + " nodes");
  }
  if (static_cast<NodeId>(labels_.size()) != n) {
    throw std::logic_error("Graph: " + std::to_string(labels_.size()) + " labels for " +
                           std::to_string(n) + " nodes");
  }
  for (NodeId v = 0; v < n; ++v) {
    const int y = labels_[static_cast<std::size_t>(v)];
    if (y < 0 || y >= num_classes_) {
      throw std::logic_error("Graph: node " + std::to_string(v) + " has label " +
                             std::to_string(y) + " outside [0, " + std::to_string(num_classes_) +
                             ")");
    }
    const auto nb = neighbors(v);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      if (nb[i] == v) throw std::logic_error("Graph: self-loop at node " + std::to_string(v));
      if (i > 0 && nb[i - 1] >= nb[i]) {
        throw std::logic_error("Graph: neighbors of node " + std::to_string(v) +
                               " not strictly ascending");
      }
      if (!has_edge(nb[i], v)) {
        throw std::logic_error("Graph: edge " + std::to_string(v) + "->" + std::to_string(nb[i]) +
                               " has no reverse");
      }
    }
  }
  if (!content_.allFinite()) throw std::logic_error("Graph: non-finite content feature");
}

}  // namespace gdistill
