#include "gdistill/split.hpp"

#include "gdistill/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gdistill {

const char* role_name(NodeRole role) {
  switch (role) {
    case NodeRole::kLabeled: return "labeled";
    case NodeRole::kObserved: return "observed";
    case NodeRole::kInductive: return "inductive";
  }
  return "unknown";
}

SplitAssignment SplitAssignment::from_lists(NodeId num_nodes, const std::vector<NodeId>& labeled,
                                            const std::vector<NodeId>& observed,
                                            const std::vector<NodeId>& inductive) {
  std::vector<int> seen(static_cast<std::size_t>(num_nodes), 0);
  std::vector<NodeRole> roles(static_cast<std::size_t>(num_nodes), NodeRole::kObserved);
  auto assign = [&](const std::vector<NodeId>& ids, NodeRole role) {
    for (NodeId v : ids) {
      if (v < 0 || v >= num_nodes) {
        throw std::out_of_range(std::string("split: ") + role_name(role) + " node " +
                                std::to_string(v) + " outside [0, " + std::to_string(num_nodes) +
                                ")");
      }
      if (seen[static_cast<std::size_t>(v)]++) {
        throw std::invalid_argument("split: node " + std::to_string(v) + " listed twice");
      }
      roles[static_cast<std::size_t>(v)] = role;
    }
  };
  assign(labeled, NodeRole::kLabeled);
  assign(observed, NodeRole::kObserved);
  assign(inductive, NodeRole::kInductive);
  for (NodeId v = 0; v < num_nodes; ++v) {
    if (!seen[static_cast<std::size_t>(v)]) {
      throw std::invalid_argument("split: node " + std::to_string(v) + " has no role");
    }
  }
  return SplitAssignment(std::move(roles));
}

std::vector<NodeId> SplitAssignment::nodes(NodeRole role) const {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < num_nodes(); ++v) {
    if (roles_[static_cast<std::size_t>(v)] == role) out.push_back(v);
  }
  return out;
}

std::vector<NodeId> SplitAssignment::training_nodes() const {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < num_nodes(); ++v) {
    if (roles_[static_cast<std::size_t>(v)] != NodeRole::kInductive) out.push_back(v);
  }
  return out;
}

std::size_t SplitAssignment::count(NodeRole role) const {
  return static_cast<std::size_t>(std::count(roles_.begin(), roles_.end(), role));
}

SplitAssignment make_split(const Graph& graph, double label_fraction, double inductive_fraction,
                           std::uint64_t seed) {
  if (!(label_fraction > 0.0 && label_fraction < 1.0)) {
    throw std::invalid_argument("make_split: label_fraction must lie in (0, 1)");
  }
  if (!(inductive_fraction >= 0.0 && inductive_fraction < 1.0)) {
    throw std::invalid_argument("make_split: inductive_fraction must lie in [0, 1)");
  }
  const NodeId n = graph.num_nodes();
  const auto num_labeled = static_cast<NodeId>(std::llround(label_fraction * static_cast<double>(n)));
  if (num_labeled == 0) throw std::invalid_argument("make_split: no labeled nodes");

  Rng rng = derive_rng(seed, streams::kSplit);
  std::vector<NodeRole> roles(static_cast<std::size_t>(n), NodeRole::kObserved);

  const int k = graph.num_classes();
  std::vector<std::vector<NodeId>> by_class(static_cast<std::size_t>(k));
  for (NodeId v = 0; v < n; ++v) by_class[static_cast<std::size_t>(graph.labels()[v])].push_back(v);
  const double min_class = std::ceil(1.0 / label_fraction);
  const bool stratified =
      std::all_of(by_class.begin(), by_class.end(),
                  [&](const auto& c) { return static_cast<double>(c.size()) >= min_class; });

  if (stratified) {
    // Largest-remainder allocation of the labeled budget across classes.
    std::vector<NodeId> quota(static_cast<std::size_t>(k));
    std::vector<double> frac(static_cast<std::size_t>(k));
    NodeId assigned = 0;
    for (int c = 0; c < k; ++c) {
      const double exact = label_fraction * static_cast<double>(by_class[c].size());
      quota[c] = static_cast<NodeId>(std::floor(exact));
      frac[c] = exact - std::floor(exact);
      assigned += quota[c];
    }
    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return frac[a] > frac[b]; });
    for (std::size_t i = 0; assigned < num_labeled && i < order.size(); ++i, ++assigned) {
      ++quota[order[i]];
    }
    for (int c = 0; c < k; ++c) {
      auto members = by_class[c];
      std::shuffle(members.begin(), members.end(), rng);
      for (NodeId i = 0; i < quota[c]; ++i) roles[members[i]] = NodeRole::kLabeled;
    }
  } else {
    std::vector<NodeId> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    for (NodeId i = 0; i < num_labeled; ++i) roles[all[i]] = NodeRole::kLabeled;
  }

  std::vector<NodeId> unlabeled;
  for (NodeId v = 0; v < n; ++v) {
    if (roles[v] != NodeRole::kLabeled) unlabeled.push_back(v);
  }
  const auto num_inductive = static_cast<NodeId>(
      std::llround(inductive_fraction * static_cast<double>(unlabeled.size())));
  std::shuffle(unlabeled.begin(), unlabeled.end(), rng);
  for (NodeId i = 0; i < num_inductive; ++i) roles[unlabeled[i]] = NodeRole::kInductive;
  if (static_cast<NodeId>(unlabeled.size()) - num_inductive <= 0) {
    throw std::invalid_argument("make_split: no observed unlabeled nodes");
  }
  return SplitAssignment(std::move(roles));
}

TrainingView training_view(const Graph& graph, const SplitAssignment& split) {
  if (split.num_nodes() != graph.num_nodes()) {
    throw std::invalid_argument("training_view: split covers " + std::to_string(split.num_nodes()) +
                                " nodes, graph has " + std::to_string(graph.num_nodes()));
  }
  TrainingView view;
  view.from_full.assign(static_cast<std::size_t>(graph.num_nodes()), -1);
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    if (split.role(v) == NodeRole::kInductive) continue;
    view.from_full[v] = static_cast<NodeId>(view.to_full.size());
    view.to_full.push_back(v);
  }
  std::vector<Edge> edges;
  for (const Edge& e : graph.edges()) {
    const NodeId a = view.from_full[e.src];
    const NodeId b = view.from_full[e.dst];
    if (a >= 0 && b >= 0) edges.push_back({a, b});
  }
  const auto kept = static_cast<NodeId>(view.to_full.size());
  Matrix content(kept, graph.content_dim());
  std::vector<int> labels(static_cast<std::size_t>(kept));
  for (NodeId i = 0; i < kept; ++i) {
    content.row(i) = graph.content().row(view.to_full[i]);
    labels[i] = graph.labels()[view.to_full[i]];
  }
  view.graph = Graph::from_edges(kept, edges, std::move(content), std::move(labels),
                                 graph.num_classes());
  return view;
}

}  // namespace gdistill
