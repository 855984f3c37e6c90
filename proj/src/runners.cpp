#include "gdistill/runners.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace gdistill {

int runner_threads() {
  if (const char* env = std::getenv("GRAPHDISTILL_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& job) {
  std::vector<std::exception_ptr> errors(count);
  auto guarded = [&](std::size_t i) {
    try {
      job(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) guarded(i);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, count); ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < count; i += workers) guarded(i);
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<NoisePoint> noise_sweep(const NoiseRun& run, std::span<const double> alphas,
                                    std::span<const std::uint64_t> seeds, int threads) {
  for (double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("noise_sweep: alpha outside [0, 1]");
  }
  if (seeds.empty()) throw std::invalid_argument("noise_sweep: no seeds");
  std::vector<double> results(alphas.size() * seeds.size());
  parallel_for(results.size(), threads, [&](std::size_t i) {
    const double alpha = alphas[i / seeds.size()];
    const std::uint64_t seed = seeds[i % seeds.size()];
    try {
      results[i] = run(alpha, seed);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << "noise_sweep (alpha=" << alpha << ", seed=" << seed << "): " << e.what();
      throw std::runtime_error(msg.str());
    }
  });
  std::vector<NoisePoint> curve;
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    NoisePoint p;
    p.alpha = alphas[a];
    p.per_seed.assign(results.begin() + static_cast<std::ptrdiff_t>(a * seeds.size()),
                      results.begin() + static_cast<std::ptrdiff_t>((a + 1) * seeds.size()));
    p.accuracy = mean_std(p.per_seed);
    curve.push_back(std::move(p));
  }
  return curve;
}

const char* ablation_name(Ablation which) {
  switch (which) {
    case Ablation::kFull: return "full";
    case Ablation::kNoPositions: return "w/o POS";
    case Ablation::kNoSimilarity: return "w/o RSD";
    case Ablation::kNoAdversarial: return "w/o ADV";
  }
  return "unknown";
}

AblationVariant apply_ablation(const DistillConfig& base, Ablation which) {
  AblationVariant v{which, base, true};
  switch (which) {
    case Ablation::kFull: break;
    case Ablation::kNoPositions: v.use_positions = false; break;
    case Ablation::kNoSimilarity: v.distill.mu = 0.0; break;
    case Ablation::kNoAdversarial: v.distill.eta = 0.0; break;
  }
  return v;
}

std::vector<AblationRow> ablation_run(const DistillConfig& base, const AblationRun& run,
                                      std::span<const std::uint64_t> seeds, int threads) {
  if (seeds.empty()) throw std::invalid_argument("ablation_run: no seeds");
  constexpr std::size_t kRows = std::size(kAllAblations);
  std::vector<double> results(kRows * seeds.size());
  parallel_for(results.size(), threads, [&](std::size_t i) {
    const AblationVariant variant = apply_ablation(base, kAllAblations[i / seeds.size()]);
    const std::uint64_t seed = seeds[i % seeds.size()];
    try {
      results[i] = run(variant, seed);
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("ablation_run (") + ablation_name(variant.which) +
                               ", seed=" + std::to_string(seed) + "): " + e.what());
    }
  });
  std::vector<AblationRow> rows;
  for (std::size_t r = 0; r < kRows; ++r) {
    AblationRow row;
    row.which = kAllAblations[r];
    row.per_seed.assign(results.begin() + static_cast<std::ptrdiff_t>(r * seeds.size()),
                        results.begin() + static_cast<std::ptrdiff_t>((r + 1) * seeds.size()));
    row.accuracy = mean_std(row.per_seed);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace gdistill
