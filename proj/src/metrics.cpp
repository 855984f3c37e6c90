#include "gdistill/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace gdistill {

double accuracy(std::span<const int> predictions, std::span<const int> labels,
                std::span<const NodeId> nodes) {
  if (nodes.empty()) throw std::invalid_argument("accuracy: empty node set");
  std::size_t hits = 0;
  for (NodeId v : nodes) {
    if (v < 0 || static_cast<std::size_t>(v) >= predictions.size() ||
        static_cast<std::size_t>(v) >= labels.size()) {
      throw std::out_of_range("accuracy: node " + std::to_string(v) + " out of range");
    }
    hits += predictions[v] == labels[v];
  }
  return static_cast<double>(hits) / static_cast<double>(nodes.size());
}

double cut_value(std::span<const int> predictions, const Graph& graph) {
  if (static_cast<NodeId>(predictions.size()) != graph.num_nodes()) {
    throw std::invalid_argument("cut_value: " + std::to_string(predictions.size()) +
                                " predictions for " + std::to_string(graph.num_nodes()) + " nodes");
  }
  if (graph.num_edges() == 0) throw std::invalid_argument("cut_value: graph has no edges");
  std::size_t internal = 0;
  std::size_t total = 0;
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    for (NodeId u : graph.neighbors(v)) internal += predictions[u] == predictions[v];
    total += static_cast<std::size_t>(graph.degree(v));
  }
  return static_cast<double>(internal) / static_cast<double>(total);
}

double production_accuracy(double inductive_accuracy, std::size_t inductive_count,
                           double transductive_accuracy, std::size_t transductive_count) {
  const std::size_t n = inductive_count + transductive_count;
  if (n == 0) throw std::invalid_argument("production_accuracy: no nodes");
  return (static_cast<double>(inductive_count) * inductive_accuracy +
          static_cast<double>(transductive_count) * transductive_accuracy) /
         static_cast<double>(n);
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

}  // namespace gdistill
