#pragma once

#include "gdistill/student.hpp"
#include "gdistill/teacher.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace gdistill {

struct LatencyStats {
  double mean_us = 0.0;
  double p50_us = 0.0;
  double p95_us = 0.0;
  int repeats = 0;
  int warmup = 0;
  std::vector<double> samples_us;
  std::uint64_t checksum = 0;  // FNV-1a of the predictions of the last run
};

/// How a full-graph inference pass is executed.
enum class ServingMode {
  /// Every node is answered independently from its own inputs; a GNN rebuilds
  /// its multi-hop neighborhood per node.
  kNodewise,
  /// One batched pass over all nodes; a GNN shares aggregations layer by layer.
  kBatched,
};

/// Times `forward` `repeats` times after `warmup` untimed calls. Single
/// threaded wall clock. Throws if repeats < 10 or the checksum changes
/// between runs.
LatencyStats bench_inference(const std::function<std::vector<int>()>& forward, int repeats,
                             int warmup = 3);

std::vector<int> serve_student(const StudentModel& model, const Matrix& features, ServingMode mode);
std::vector<int> serve_teacher(const TeacherModel& model, const Graph& graph, ServingMode mode);

std::uint64_t prediction_checksum(const std::vector<int>& predictions);

}  // namespace gdistill
