#include "gdistill/bench.hpp"

#include "gdistill/hash.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string_view>

namespace gdistill {

std::uint64_t prediction_checksum(const std::vector<int>& predictions) {
  return fnv1a64(std::string_view(reinterpret_cast<const char*>(predictions.data()),
                                  predictions.size() * sizeof(int)));
}

LatencyStats bench_inference(const std::function<std::vector<int>()>& forward, int repeats,
                             int warmup) {
  if (repeats < 10) throw std::invalid_argument("bench_inference: repeats must be >= 10");
  if (warmup < 0) throw std::invalid_argument("bench_inference: warmup must be >= 0");
  LatencyStats stats;
  stats.repeats = repeats;
  stats.warmup = warmup;
  for (int i = 0; i < warmup; ++i) stats.checksum = prediction_checksum(forward());
  using clock = std::chrono::steady_clock;
  for (int i = 0; i < repeats; ++i) {
    const auto start = clock::now();
    const std::vector<int> pred = forward();
    const auto stop = clock::now();
    const std::uint64_t sum = prediction_checksum(pred);
    if ((warmup > 0 || i > 0) && sum != stats.checksum) {
      throw std::runtime_error("bench_inference: predictions changed between runs");
    }
    stats.checksum = sum;
    stats.samples_us.push_back(std::chrono::duration<double, std::micro>(stop - start).count());
  }
  std::vector<double> sorted = stats.samples_us;
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  for (double s : sorted) total += s;
  stats.mean_us = total / static_cast<double>(sorted.size());
  auto rank = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size()))) - 1;
    return sorted[std::min(idx, sorted.size() - 1)];
  };
  stats.p50_us = rank(0.50);
  stats.p95_us = rank(0.95);
  return stats;
}

std::vector<int> serve_student(const StudentModel& model, const Matrix& features, ServingMode mode) {
  if (mode == ServingMode::kBatched) return argmax_rows(student_forward(model, features).logits);
  std::vector<int> out(static_cast<std::size_t>(features.rows()));
  Matrix row(1, features.cols());
  for (Index v = 0; v < features.rows(); ++v) {
    row.row(0) = features.row(v);
    out[v] = argmax_rows(student_forward(model, row).logits)[0];
  }
  return out;
}

std::vector<int> serve_teacher(const TeacherModel& model, const Graph& graph, ServingMode mode) {
  if (mode == ServingMode::kBatched) return argmax_rows(teacher_forward(model, graph).logits);
  return argmax_rows(teacher_logits_nodewise(model, graph));
}

}  // namespace gdistill
