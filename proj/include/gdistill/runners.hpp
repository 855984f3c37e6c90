#pragma once

#include "gdistill/metrics.hpp"
#include "gdistill/student.hpp"

#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace gdistill {

/// Worker count for sweep and ablation runners: GRAPHDISTILL_THREADS when set
/// to a positive integer, otherwise 1.
int runner_threads();

/// Runs job(i) for i in [0, count) on up to `threads` threads. Jobs must
/// write only to their own slot. If any job throws, the exception of the
/// lowest failing index is rethrown after all workers finish.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& job);

struct NoisePoint {
  double alpha = 0.0;
  MeanStd accuracy;
  std::vector<double> per_seed;
};

/// Test accuracy of a full retrain with content noise level alpha.
using NoiseRun = std::function<double(double alpha, std::uint64_t seed)>;

/// One point per alpha, in input order. Failures are rethrown as
/// std::runtime_error annotated with (alpha, seed).
std::vector<NoisePoint> noise_sweep(const NoiseRun& run, std::span<const double> alphas,
                                    std::span<const std::uint64_t> seeds, int threads = 1);

enum class Ablation { kFull, kNoPositions, kNoSimilarity, kNoAdversarial };

inline constexpr Ablation kAllAblations[] = {Ablation::kFull, Ablation::kNoPositions,
                                             Ablation::kNoSimilarity, Ablation::kNoAdversarial};

const char* ablation_name(Ablation which);

/// A training configuration with at most one component switched off.
struct AblationVariant {
  Ablation which = Ablation::kFull;
  DistillConfig distill;
  bool use_positions = true;
};

AblationVariant apply_ablation(const DistillConfig& base, Ablation which);

struct AblationRow {
  Ablation which = Ablation::kFull;
  MeanStd accuracy;
  std::vector<double> per_seed;
};

using AblationRun = std::function<double(const AblationVariant& variant, std::uint64_t seed)>;

/// Four rows (full, w/o POS, w/o RSD, w/o ADV) over the same seeds.
std::vector<AblationRow> ablation_run(const DistillConfig& base, const AblationRun& run,
                                      std::span<const std::uint64_t> seeds, int threads = 1);

}  // namespace gdistill
