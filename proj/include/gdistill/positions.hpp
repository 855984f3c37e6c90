#pragma once

#include "gdistill/graph.hpp"
#include "gdistill/split.hpp"
#include "gdistill/walks.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace gdistill {

enum class Provenance : std::uint8_t { kTrained, kTransferred, kZero };

const char* provenance_name(Provenance p);

/// Structural node embeddings. Rows with kZero provenance are exactly zero.
struct PositionTable {
  Matrix embeddings;
  std::vector<Provenance> provenance;

  Index dim() const { return embeddings.cols(); }
  NodeId num_nodes() const { return embeddings.rows(); }
  std::size_t count(Provenance p) const;
};

struct SkipGramOptions {
  Index dim = 16;
  Index window = 5;
  Index negatives = 5;
  Index epochs = 5;
  double learning_rate = 0.025;
};

/// Skip-gram with negative sampling over (center, context) pairs within
/// `window` positions. Input vectors start uniform in [-0.5/dim, 0.5/dim] and
/// output vectors at zero; negatives follow the corpus unigram distribution
/// raised to 0.75. Walk order is reshuffled each epoch from the seed; the
/// learning rate decays linearly to 1e-4 of its start value. All rows are
/// marked kTrained.
PositionTable train_skipgram(const WalkCorpus& corpus, const SkipGramOptions& options,
                             std::uint64_t seed);

/// Re-indexes a table trained on a training view into full-graph numbering.
/// Nodes absent from the view get zero rows with kZero provenance.
PositionTable lift_to_full(const PositionTable& view_table, std::span<const NodeId> to_full,
                           NodeId num_full_nodes);

/// Gives each inductive node the mean of its non-inductive neighbors' rows in
/// `full_graph` (kTransferred), or a zero row (kZero) when it has none.
/// Non-inductive rows are copied unchanged.
PositionTable transfer_positions(const Graph& full_graph, const PositionTable& table,
                                 const SplitAssignment& split);

struct PositionOptions {
  Index walks_per_node = 10;
  Index walk_length = 30;
  SkipGramOptions skipgram;
};

/// Walks and skip-gram on the training view, then transfer to inductive
/// nodes. dim == 0 yields an N x 0 table. Content features are never read.
PositionTable encode_positions(const Graph& full_graph, const SplitAssignment& split,
                               const PositionOptions& options, std::uint64_t seed,
                               int threads = 1);

/// positions.csv (N rows of dim floats) plus positions.meta.json with `meta`
/// merged with dim and provenance counts.
void save_positions(const std::filesystem::path& dir, const PositionTable& table,
                    const nlohmann::json& meta);
PositionTable load_positions(const std::filesystem::path& dir);

}  // namespace gdistill
