#pragma once

#include "gdistill/matrix.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace gdistill {

using NodeId = std::int64_t;

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct EdgeListStats {
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_merged = 0;
};

/// Undirected graph with per-node content features and class labels.
/// Adjacency is stored as sorted, duplicate-free neighbor lists with each
/// edge present in both directions and no self-loops.
class Graph {
 public:
  Graph() = default;

  /// Symmetrizes `edges`, merges duplicates and drops self-loops. Throws
  /// std::out_of_range for an endpoint outside [0, num_nodes).
  static Graph from_edges(NodeId num_nodes, std::span<const Edge> edges, Matrix content,
                          std::vector<int> labels, int num_classes,
                          EdgeListStats* stats = nullptr);

  NodeId num_nodes() const { return static_cast<NodeId>(offsets_.size()) - 1; }
  /// Undirected edge count.
  std::size_t num_edges() const { return neighbors_.size() / 2; }
  std::span<const NodeId> neighbors(NodeId v) const {
    return {neighbors_.data() + offsets_[v], neighbors_.data() + offsets_[v + 1]};
  }
  NodeId degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
  bool has_edge(NodeId u, NodeId v) const;

  const Matrix& content() const { return content_; }
  Index content_dim() const { return content_.cols(); }
  const std::vector<int>& labels() const { return labels_; }
  int num_classes() const { return num_classes_; }

  /// Each undirected edge once, as (u, v) with u < v, in ascending order.
  std::vector<Edge> edges() const;

  /// Same topology and labels with different content features.
  Graph with_content(Matrix content) const;

  /// Throws std::logic_error describing the first violated invariant.
  void validate() const;

 private:
  std::vector<NodeId> offsets_{0};
  std::vector<NodeId> neighbors_;
  Matrix content_;
  std::vector<int> labels_;
  int num_classes_ = 0;
};

}  // namespace gdistill
