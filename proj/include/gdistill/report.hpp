#pragma once

#include "gdistill/bench.hpp"
#include "gdistill/runners.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <vector>

namespace gdistill {

struct EvalReport {
  double accuracy_tran = 0.0;
  std::optional<double> accuracy_ind;  // absent for transductive splits
  double accuracy_prod = 0.0;
  std::size_t count_tran = 0;
  std::size_t count_ind = 0;
  double cut_value = 0.0;
  std::optional<LatencyStats> latency;
  std::vector<NoisePoint> noise_curve;
  nlohmann::json metadata = nlohmann::json::object();

  /// Throws std::logic_error when a range or interpolation invariant fails.
  void check() const;
};

/// Fills accuracy_prod from the other accuracy fields and counts.
void finalize_accuracies(EvalReport& report);

nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const LatencyStats& stats);

/// report.json, report.csv (metric,value rows) and, when the report has a
/// noise curve, noise_curve.csv.
void write_report(const std::filesystem::path& dir, const EvalReport& report);

/// Header alpha,mean_acc,std_acc.
void write_noise_curve_csv(const std::filesystem::path& file, const std::vector<NoisePoint>& curve);

}  // namespace gdistill
