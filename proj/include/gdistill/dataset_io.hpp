#pragma once

#include "gdistill/graph.hpp"
#include "gdistill/split.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace gdistill {

/// Malformed or missing dataset input; the message carries file and line.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Dataset {
  Graph graph;
  std::optional<SplitAssignment> split;  // from split.json when present
  EdgeListStats edge_stats;
};

/// Reads `edges.tsv`, `features.csv`, `labels.csv` and the optional
/// `split.json` from `dir`. The node count is the number of feature rows and
/// the class count is one more than the largest label.
Dataset load_dataset(const std::filesystem::path& dir);

inline Graph load_graph(const std::filesystem::path& dir) { return load_dataset(dir).graph; }

/// Writes the same layout load_dataset reads. Floats use 17 significant
/// digits so a round trip is exact.
void save_dataset(const std::filesystem::path& dir, const Graph& graph,
                  const SplitAssignment* split = nullptr);

SplitAssignment read_split_json(const std::filesystem::path& file, NodeId num_nodes);
void write_split_json(const std::filesystem::path& file, const SplitAssignment& split);

}  // namespace gdistill
