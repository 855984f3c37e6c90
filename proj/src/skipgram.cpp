#include "gdistill/positions.hpp"

#include "gdistill/random.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace gdistill {

namespace fs = std::filesystem;

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::kTrained: return "trained";
    case Provenance::kTransferred: return "transferred";
    case Provenance::kZero: return "zero";
  }
  return "unknown";
}

std::size_t PositionTable::count(Provenance p) const {
  return static_cast<std::size_t>(std::count(provenance.begin(), provenance.end(), p));
}

PositionTable train_skipgram(const WalkCorpus& corpus, const SkipGramOptions& options,
                             std::uint64_t seed) {
  if (corpus.walks.empty() || corpus.num_nodes == 0) {
    throw std::invalid_argument("train_skipgram: empty corpus");
  }
  if (options.dim < 1) throw std::invalid_argument("train_skipgram: dim must be >= 1");
  if (options.window < 1) throw std::invalid_argument("train_skipgram: window must be >= 1");

  const NodeId n = corpus.num_nodes;
  const Index d = options.dim;
  Rng rng = derive_rng(seed, streams::kSkipGram);

  Matrix input(n, d);
  std::uniform_real_distribution<double> init(-0.5 / static_cast<double>(d),
                                              0.5 / static_cast<double>(d));
  for (Index i = 0; i < input.size(); ++i) input.data()[i] = init(rng);
  Matrix output = Matrix::Zero(n, d);

  std::vector<double> freq(static_cast<std::size_t>(n), 0.0);
  std::size_t total_pairs = 0;
  for (const auto& walk : corpus.walks) {
    for (NodeId v : walk) freq[v] += 1.0;
    const auto len = static_cast<Index>(walk.size());
    for (Index i = 0; i < len; ++i) {
      total_pairs += static_cast<std::size_t>(std::min(len - 1, i + options.window) -
                                              std::max<Index>(0, i - options.window));
    }
  }
  for (double& f : freq) f = std::pow(f, 0.75);
  std::discrete_distribution<NodeId> negative(freq.begin(), freq.end());

  std::vector<std::size_t> order(corpus.walks.size());
  std::iota(order.begin(), order.end(), 0);
  const double lr0 = options.learning_rate;
  const double total = static_cast<double>(std::max<std::size_t>(1, total_pairs) *
                                           static_cast<std::size_t>(std::max<Index>(1, options.epochs)));
  double processed = 0.0;
  Eigen::RowVectorXd grad_in(d);

  for (Index epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t w : order) {
      const auto& walk = corpus.walks[w];
      const auto len = static_cast<Index>(walk.size());
      for (Index i = 0; i < len; ++i) {
        const NodeId center = walk[i];
        const Index lo = std::max<Index>(0, i - options.window);
        const Index hi = std::min(len - 1, i + options.window);
        for (Index j = lo; j <= hi; ++j) {
          if (j == i) continue;
          const double lr = lr0 * std::max(1e-4, 1.0 - processed / total);
          processed += 1.0;
          grad_in.setZero();
          const NodeId context = walk[j];
          for (Index s = 0; s <= options.negatives; ++s) {
            NodeId target = context;
            double label = 1.0;
            if (s > 0) {
              target = negative(rng);
              if (target == context) continue;
              label = 0.0;
            }
            const double score = input.row(center).dot(output.row(target));
            const double sig = 1.0 / (1.0 + std::exp(-score));
            const double g = lr * (label - sig);
            grad_in += g * output.row(target);
            output.row(target) += g * input.row(center);
          }
          input.row(center) += grad_in;
        }
      }
    }
  }

  PositionTable table;
  table.embeddings = std::move(input);
  table.provenance.assign(static_cast<std::size_t>(n), Provenance::kTrained);
  return table;
}

PositionTable lift_to_full(const PositionTable& view_table, std::span<const NodeId> to_full,
                           NodeId num_full_nodes) {
  if (static_cast<NodeId>(to_full.size()) != view_table.num_nodes()) {
    throw std::invalid_argument("lift_to_full: mapping covers " + std::to_string(to_full.size()) +
                                " nodes, table has " + std::to_string(view_table.num_nodes()));
  }
  PositionTable full;
  full.embeddings = Matrix::Zero(num_full_nodes, view_table.dim());
  full.provenance.assign(static_cast<std::size_t>(num_full_nodes), Provenance::kZero);
  for (std::size_t i = 0; i < to_full.size(); ++i) {
    full.embeddings.row(to_full[i]) = view_table.embeddings.row(static_cast<Index>(i));
    full.provenance[to_full[i]] = view_table.provenance[i];
  }
  return full;
}

PositionTable transfer_positions(const Graph& full_graph, const PositionTable& table,
                                 const SplitAssignment& split) {
  if (table.num_nodes() != full_graph.num_nodes() || split.num_nodes() != full_graph.num_nodes()) {
    throw std::invalid_argument("transfer_positions: table, split and graph sizes differ");
  }
  PositionTable out = table;
  for (NodeId v = 0; v < full_graph.num_nodes(); ++v) {
    if (split.role(v) != NodeRole::kInductive) continue;
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(table.dim());
    Index used = 0;
    for (NodeId u : full_graph.neighbors(v)) {
      if (split.role(u) == NodeRole::kInductive) continue;
      acc += table.embeddings.row(u);
      ++used;
    }
    if (used == 0) {
      out.embeddings.row(v).setZero();
      out.provenance[v] = Provenance::kZero;
    } else {
      out.embeddings.row(v) = acc / static_cast<double>(used);
      out.provenance[v] = Provenance::kTransferred;
    }
  }
  return out;
}

PositionTable encode_positions(const Graph& full_graph, const SplitAssignment& split,
                               const PositionOptions& options, std::uint64_t seed, int threads) {
  if (options.skipgram.dim == 0) {
    PositionTable empty;
    empty.embeddings = Matrix(full_graph.num_nodes(), 0);
    empty.provenance.assign(static_cast<std::size_t>(full_graph.num_nodes()), Provenance::kZero);
    return empty;
  }
  const TrainingView view = training_view(full_graph, split);
  const WalkCorpus corpus =
      sample_walks(view.graph, options.walks_per_node, options.walk_length, seed, threads);
  const PositionTable trained = train_skipgram(corpus, options.skipgram, seed);
  return transfer_positions(full_graph, lift_to_full(trained, view.to_full, full_graph.num_nodes()),
                            split);
}

void save_positions(const fs::path& dir, const PositionTable& table, const nlohmann::json& meta) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "positions.csv");
    char buf[32];
    for (Index i = 0; i < table.embeddings.rows(); ++i) {
      for (Index j = 0; j < table.embeddings.cols(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", table.embeddings(i, j));
        if (j) out << ',';
        out << buf;
      }
      out << '\n';
    }
  }
  nlohmann::json doc = meta;
  doc["dim"] = table.dim();
  doc["num_nodes"] = table.num_nodes();
  doc["provenance_counts"] = {{"trained", table.count(Provenance::kTrained)},
                              {"transferred", table.count(Provenance::kTransferred)},
                              {"zero", table.count(Provenance::kZero)}};
  std::vector<int> codes;
  for (Provenance p : table.provenance) codes.push_back(static_cast<int>(p));
  doc["provenance"] = codes;
  std::ofstream out(dir / "positions.meta.json");
  out << doc.dump(2) << '\n';
}

PositionTable load_positions(const fs::path& dir) {
  std::ifstream meta_in(dir / "positions.meta.json");
  if (!meta_in) throw std::runtime_error((dir / "positions.meta.json").string() + ": cannot open file");
  const nlohmann::json meta = nlohmann::json::parse(meta_in);
  const auto n = meta.at("num_nodes").get<NodeId>();
  const auto d = meta.at("dim").get<Index>();
  PositionTable table;
  table.embeddings = Matrix::Zero(n, d);
  for (int code : meta.at("provenance").get<std::vector<int>>()) {
    table.provenance.push_back(static_cast<Provenance>(code));
  }
  std::ifstream in(dir / "positions.csv");
  if (!in) throw std::runtime_error((dir / "positions.csv").string() + ": cannot open file");
  std::string line;
  for (NodeId i = 0; i < n; ++i) {
    if (!std::getline(in, line)) {
      throw std::runtime_error((dir / "positions.csv").string() + ": expected " +
                               std::to_string(n) + " rows");
    }
    const char* p = line.c_str();
    for (Index j = 0; j < d; ++j) {
      char* end = nullptr;
      table.embeddings(i, j) = std::strtod(p, &end);
      if (end == p) {
        throw std::runtime_error((dir / "positions.csv").string() + ":" + std::to_string(i + 1) +
                                 ": bad number");
      }
      p = (*end == ',') ? end + 1 : end;
    }
  }
  return table;
}

}  // namespace gdistill
