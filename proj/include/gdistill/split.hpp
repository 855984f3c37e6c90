#pragma once

#include "gdistill/graph.hpp"

#include <cstdint>
#include <vector>

namespace gdistill {

enum class NodeRole : std::uint8_t { kLabeled, kObserved, kInductive };

const char* role_name(NodeRole role);

/// Partition of the nodes into labeled, observed-unlabeled and
/// inductive-unlabeled sets. Transductive splits have no inductive nodes.
class SplitAssignment {
 public:
  SplitAssignment() = default;
  explicit SplitAssignment(std::vector<NodeRole> roles) : roles_(std::move(roles)) {}

  /// Builds from explicit node lists; throws unless they partition [0, n).
  static SplitAssignment from_lists(NodeId num_nodes, const std::vector<NodeId>& labeled,
                                    const std::vector<NodeId>& observed,
                                    const std::vector<NodeId>& inductive);

  NodeId num_nodes() const { return static_cast<NodeId>(roles_.size()); }
  NodeRole role(NodeId v) const { return roles_[static_cast<std::size_t>(v)]; }
  const std::vector<NodeRole>& roles() const { return roles_; }

  /// Nodes with `role`, ascending.
  std::vector<NodeId> nodes(NodeRole role) const;
  /// Labeled and observed nodes, ascending.
  std::vector<NodeId> training_nodes() const;
  std::size_t count(NodeRole role) const;
  bool transductive() const { return count(NodeRole::kInductive) == 0; }

  friend bool operator==(const SplitAssignment&, const SplitAssignment&) = default;

 private:
  std::vector<NodeRole> roles_;
};

/// Draws round(label_fraction * N) labeled nodes, stratified per class when
/// every class has at least 1 / label_fraction members. A further
/// round(inductive_fraction * unlabeled) nodes become inductive; the rest are
/// observed. Throws std::invalid_argument when labeled or observed ends up
/// empty.
SplitAssignment make_split(const Graph& graph, double label_fraction, double inductive_fraction,
                           std::uint64_t seed);

/// Subgraph on labeled and observed nodes. Node ids are compacted in
/// ascending order; `to_full` and `from_full` map between the two numberings
/// (`from_full` holds -1 for inductive nodes).
struct TrainingView {
  Graph graph;
  std::vector<NodeId> to_full;
  std::vector<NodeId> from_full;
};

TrainingView training_view(const Graph& graph, const SplitAssignment& split);

}  // namespace gdistill
