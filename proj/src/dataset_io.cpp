#include "gdistill/dataset_io.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gdistill {

namespace fs = std::filesystem;

namespace {

std::ifstream open_input(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError(file.string() + ": cannot open file");
  return in;
}

[[noreturn]] void fail(const fs::path& file, std::size_t line, const std::string& what) {
  throw DataError(file.string() + ":" + std::to_string(line) + ": " + what);
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
  token = trim(token);
  if (token.empty()) return false;
  if (token.front() == '+') token.remove_prefix(1);
  const auto* end = token.data() + token.size();
  const auto res = std::from_chars(token.data(), end, out);
  return res.ec == std::errc() && res.ptr == end;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Dataset load_dataset(const fs::path& dir) {
  const fs::path features_file = dir / "features.csv";
  const fs::path labels_file = dir / "labels.csv";
  const fs::path edges_file = dir / "edges.tsv";

  std::vector<std::vector<double>> rows;
  {
    auto in = open_input(features_file);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      std::vector<double> row;
      std::string_view rest(line);
      while (true) {
        const auto comma = rest.find(',');
        double v = 0.0;
        if (!parse_number(rest.substr(0, comma), v)) fail(features_file, lineno, "bad number");
        row.push_back(v);
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
      if (!rows.empty() && row.size() != rows.front().size()) {
        fail(features_file, lineno,
             "ragged row: " + std::to_string(row.size()) + " values, expected " +
                 std::to_string(rows.front().size()));
      }
      rows.push_back(std::move(row));
    }
  }
  const auto n = static_cast<NodeId>(rows.size());
  const Index dim = rows.empty() ? 0 : static_cast<Index>(rows.front().size());
  Matrix content(n, dim);
  for (NodeId i = 0; i < n; ++i) {
    for (Index j = 0; j < dim; ++j) content(i, j) = rows[i][j];
  }

  std::vector<int> labels;
  int max_label = -1;
  {
    auto in = open_input(labels_file);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      int y = 0;
      if (!parse_number(std::string_view(line), y)) fail(labels_file, lineno, "bad label");
      if (y < 0) fail(labels_file, lineno, "label " + std::to_string(y) + " out of range");
      max_label = std::max(max_label, y);
      labels.push_back(y);
    }
    if (static_cast<NodeId>(labels.size()) != n) {
      fail(labels_file, lineno,
           std::to_string(labels.size()) + " labels for " + std::to_string(n) + " feature rows");
    }
  }

  std::vector<Edge> edges;
  {
    auto in = open_input(edges_file);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string_view body(line);
      if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
      body = trim(body);
      if (body.empty()) continue;
      const auto sep = body.find_first_of(" \t");
      if (sep == std::string_view::npos) fail(edges_file, lineno, "expected two node ids");
      Edge e;
      if (!parse_number(body.substr(0, sep), e.src) || !parse_number(body.substr(sep + 1), e.dst)) {
        fail(edges_file, lineno, "bad node id");
      }
      for (NodeId id : {e.src, e.dst}) {
        if (id < 0 || id >= n) {
          fail(edges_file, lineno,
               "node " + std::to_string(id) + " outside [0, " + std::to_string(n) + ")");
        }
      }
      edges.push_back(e);
    }
  }

  Dataset ds;
  ds.graph = Graph::from_edges(n, edges, std::move(content), std::move(labels), max_label + 1,
                               &ds.edge_stats);
  if (fs::exists(dir / "split.json")) ds.split = read_split_json(dir / "split.json", n);
  return ds;
}

void save_dataset(const fs::path& dir, const Graph& graph, const SplitAssignment* split) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "edges.tsv");
    out << "# src\tdst\n";
    for (const Edge& e : graph.edges()) out << e.src << '\t' << e.dst << '\n';
  }
  {
    std::ofstream out(dir / "features.csv");
    const Matrix& c = graph.content();
    for (Index i = 0; i < c.rows(); ++i) {
      for (Index j = 0; j < c.cols(); ++j) {
        if (j) out << ',';
        out << format_double(c(i, j));
      }
      out << '\n';
    }
  }
  {
    std::ofstream out(dir / "labels.csv");
    for (int y : graph.labels()) out << y << '\n';
  }
  if (split) write_split_json(dir / "split.json", *split);
}

SplitAssignment read_split_json(const fs::path& file, NodeId num_nodes) {
  auto in = open_input(file);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(file.string() + ": " + e.what());
  }
  auto list = [&](const char* key) {
    if (!doc.contains(key) || !doc[key].is_array()) {
      throw DataError(file.string() + ": missing integer array \"" + key + "\"");
    }
    return doc[key].get<std::vector<NodeId>>();
  };
  try {
    return SplitAssignment::from_lists(num_nodes, list("labeled"), list("observed"),
                                       list("inductive"));
  } catch (const std::logic_error& e) {
    throw DataError(file.string() + ": " + e.what());
  }
}

void write_split_json(const fs::path& file, const SplitAssignment& split) {
  nlohmann::json doc;
  doc["labeled"] = split.nodes(NodeRole::kLabeled);
  doc["observed"] = split.nodes(NodeRole::kObserved);
  doc["inductive"] = split.nodes(NodeRole::kInductive);
  std::ofstream out(file);
  out << doc.dump() << '\n';
}

}  // namespace gdistill
