#pragma once

#include "gdistill/graph.hpp"
#include "gdistill/random.hpp"
#include "gdistill/student.hpp"
#include "gdistill/tape.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace gdistill::test {

inline Matrix uniform_matrix(Index rows, Index cols, Rng& rng, double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

/// Rows on the simplex.
inline Matrix random_probs(Index rows, Index cols, Rng& rng) {
  Matrix m = uniform_matrix(rows, cols, rng, 0.1, 1.0);
  for (Index i = 0; i < rows; ++i) m.row(i) /= m.row(i).sum();
  return m;
}

/// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
inline double relative_error(const Matrix& a, const Matrix& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

/// Central differences of a scalar function of one matrix.
inline Matrix numeric_gradient(const std::function<double(const Matrix&)>& f, const Matrix& x,
                               double h = 1e-6) {
  Matrix g(x.rows(), x.cols());
  Matrix probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double orig = probe.data()[i];
    probe.data()[i] = orig + h;
    const double up = f(probe);
    probe.data()[i] = orig - h;
    const double down = f(probe);
    probe.data()[i] = orig;
    g.data()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Graph from an edge list with one-hot node-id features and given labels.
inline Graph make_graph(NodeId n, const std::vector<Edge>& edges, std::vector<int> labels = {},
                        int classes = 0) {
  if (labels.empty()) labels.assign(static_cast<std::size_t>(n), 0);
  if (classes == 0) classes = *std::max_element(labels.begin(), labels.end()) + 1;
  return Graph::from_edges(n, edges, Matrix::Identity(n, n), std::move(labels), classes);
}

/// Two disjoint cliques of `size` nodes, labeled 0 and 1.
inline Graph clique_pair(NodeId size) {
  std::vector<Edge> edges;
  std::vector<int> labels;
  for (int c = 0; c < 2; ++c) {
    for (NodeId i = 0; i < size; ++i) {
      labels.push_back(c);
      for (NodeId j = i + 1; j < size; ++j) edges.push_back({c * size + i, c * size + j});
    }
  }
  return make_graph(2 * size, edges, labels, 2);
}

/// Erdos-Renyi graph with random labels and Gaussian features.
inline Graph random_graph(NodeId n, double p, int classes, Index dim, Rng& rng) {
  std::bernoulli_distribution coin(p);
  std::uniform_int_distribution<int> label(0, classes - 1);
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (coin(rng)) edges.push_back({u, v});
    }
  }
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (auto& l : labels) l = label(rng);
  return Graph::from_edges(n, edges, uniform_matrix(n, dim, rng), labels, classes);
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("gdistill-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Builds a scalar from one matrix-valued primitive: sum(f(x) * weights).
using Unary = std::function<Var(const Var&)>;

inline double check_unary(const Unary& f, const Matrix& x, std::uint64_t seed) {
  Rng rng(seed);
  Matrix probe;
  {
    Tape t;
    probe = f(t.constant(x)).value();
  }
  const Matrix weights = uniform_matrix(probe.rows(), probe.cols(), rng);
  auto scalar = [&](const Matrix& in) {
    Tape t;
    return f(t.constant(in)).value().cwiseProduct(weights).sum();
  };
  Tape t;
  const Var xv = t.variable(x);
  const Var w = t.constant(weights);
  const Var loss = sum(mul(f(xv), w));
  const Matrix analytic = t.grad(loss, {xv})[0];
  return relative_error(analytic, numeric_gradient(scalar, x));
}

// Gradient of a binary primitive with respect to each argument.
using Binary = std::function<Var(const Var&, const Var&)>;

inline std::pair<double, double> check_binary(const Binary& f, const Matrix& a, const Matrix& b,
                                       std::uint64_t seed) {
  Rng rng(seed);
  Matrix probe;
  {
    Tape t;
    probe = f(t.constant(a), t.constant(b)).value();
  }
  const Matrix weights = uniform_matrix(probe.rows(), probe.cols(), rng);
  auto wrt_a = [&](const Matrix& in) {
    Tape t;
    return f(t.constant(in), t.constant(b)).value().cwiseProduct(weights).sum();
  };
  auto wrt_b = [&](const Matrix& in) {
    Tape t;
    return f(t.constant(a), t.constant(in)).value().cwiseProduct(weights).sum();
  };
  Tape t;
  const Var av = t.variable(a);
  const Var bv = t.variable(b);
  const Var loss = sum(mul(f(av, bv), t.constant(weights)));
  const auto g = t.grad(loss, {av, bv});
  return {relative_error(g[0], numeric_gradient(wrt_a, a)),
          relative_error(g[1], numeric_gradient(wrt_b, b))};
}

inline Matrix relu_of(const Matrix& m) { return m.cwiseMax(0.0); }

struct PlainForward {
  Matrix hidden;
  Matrix logits;
};

inline PlainForward plain_forward(const StudentModel& m, const Matrix& x) {
  Matrix h = x;
  for (std::size_t l = 0; l + 1 < m.layers.size(); ++l) {
    h = relu_of((h * m.layers[l].weight).rowwise() + m.layers[l].bias.row(0));
  }
  return {h, (h * m.layers.back().weight).rowwise() + m.layers.back().bias.row(0)};
}

inline Matrix plain_log_softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    const double lse = mx + std::log((logits.row(i).array() - mx).exp().sum());
    out.row(i) = logits.row(i).array() - lse;
  }
  return out;
}

inline double mean_ce(const Matrix& logp, const std::vector<std::int64_t>& rows, const std::vector<int>& targets) {
  double s = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) s -= logp(rows[i], targets[i]);
  return s / static_cast<double>(rows.size());
}

inline double mean_soft_ce(const Matrix& logp, const Matrix& z) {
  return -(z.cwiseProduct(logp)).sum() / static_cast<double>(z.rows());
}

inline double plain_rsd(const Matrix& h_gnn, const Matrix& h_mlp, const Matrix& w_m) {
  const Matrix t = relu_of(h_mlp * w_m);
  const double b = static_cast<double>(h_gnn.rows());
  return (h_gnn * h_gnn.transpose() - t * t.transpose()).squaredNorm() / (b * b);
}

inline Matrix rows_of(const Matrix& m, const std::vector<std::int64_t>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

// Independent Eigen evaluation of the weighted training objective.
inline double plain_objective(const StudentModel& m, const StudentObjective& o, const DistillConfig& c) {
  const PlainForward f = plain_forward(m, o.x);
  const Matrix logp = plain_log_softmax(f.logits);
  double total = mean_ce(logp, o.labeled_rows, o.labeled_targets);
  double entropy = 0.0;
  for (Index i = 0; i < o.soft_labels.size(); ++i) {
    const double z = o.soft_labels.data()[i];
    if (z > 0) entropy += z * std::log(z);
  }
  total += c.lambda * (entropy / static_cast<double>(o.x.rows()) + mean_soft_ce(logp, o.soft_labels));
  total += c.mu * plain_rsd(o.teacher_hidden, rows_of(f.hidden, o.batch), m.rsd_transform);

  Matrix xb = rows_of(o.x, o.batch);
  xb.leftCols(o.delta.cols()) += o.delta;
  const Matrix adv_logp = plain_log_softmax(plain_forward(m, xb).logits);
  std::vector<std::int64_t> rows;
  std::vector<int> targets;
  for (std::size_t i = 0; i < o.batch.size(); ++i) {
    for (std::size_t k = 0; k < o.labeled_rows.size(); ++k) {
      if (o.labeled_rows[k] == o.batch[i]) {
        rows.push_back(static_cast<std::int64_t>(i));
        targets.push_back(o.labeled_targets[k]);
      }
    }
  }
  double adv = mean_soft_ce(adv_logp, rows_of(o.soft_labels, o.batch));
  if (!rows.empty()) adv += mean_ce(adv_logp, rows, targets);
  return total + c.eta * adv;
}

struct Instance {
  StudentModel model;
  StudentObjective objective;
};

// 10 rows, 3 content + 2 position columns, 3 classes.
inline Instance random_instance(std::uint64_t seed) {
  Rng rng(seed);
  Instance in;
  in.model = init_student(3, 2, 3, 6, 2, seed);
  for (auto& l : in.model.layers) l.bias = uniform_matrix(1, l.out_dim(), rng, -0.5, 0.5);
  auto& o = in.objective;
  o.x = uniform_matrix(10, 5, rng);
  o.labeled_rows = {1, 4, 7};
  o.labeled_targets = {0, 2, 1};
  o.soft_labels = test::random_probs(10, 3, rng);
  o.batch = {0, 4, 5, 9, 2, 7};
  o.teacher_hidden = uniform_matrix(6, 4, rng);
  o.delta = uniform_matrix(6, 3, rng, -0.05, 0.05);
  return in;
}

// tr(Y^T A Y) / tr(Y^T D Y) with dense matrices.
inline double dense_cut_value(const std::vector<int>& pred, const Graph& g, int classes) {
  const NodeId n = g.num_nodes();
  Matrix a = Matrix::Zero(n, n);
  for (NodeId v = 0; v < n; ++v) {
    for (NodeId u : g.neighbors(v)) a(v, u) = 1.0;
  }
  const Matrix d = a.rowwise().sum().asDiagonal();
  Matrix y = Matrix::Zero(n, classes);
  for (NodeId v = 0; v < n; ++v) y(v, pred[static_cast<std::size_t>(v)]) = 1.0;
  return (y.transpose() * a * y).trace() / (y.transpose() * d * y).trace();
}

}  // namespace gdistill::test
