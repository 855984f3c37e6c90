#pragma once

#include "gdistill/graph.hpp"

#include <span>
#include <vector>

namespace gdistill {

/// Fraction of `nodes` whose prediction equals the label. Throws on an empty set.
double accuracy(std::span<const int> predictions, std::span<const int> labels,
                std::span<const NodeId> nodes);

/// tr(Y^T A Y) / tr(Y^T D Y) for one-hot predictions Y, evaluated by one pass
/// over the adjacency lists: the fraction of edge endpoints whose two nodes
/// share a predicted class. Throws on an edgeless graph.
double cut_value(std::span<const int> predictions, const Graph& graph);

/// Node-count weighted combination of inductive and transductive accuracy.
double production_accuracy(double inductive_accuracy, std::size_t inductive_count,
                           double transductive_accuracy, std::size_t transductive_count);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for fewer than two values
};

MeanStd mean_std(std::span<const double> values);

}  // namespace gdistill
