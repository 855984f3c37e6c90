#pragma once

#include "gdistill/bench.hpp"
#include "gdistill/config.hpp"
#include "gdistill/distill.hpp"
#include "gdistill/report.hpp"
#include "gdistill/runners.hpp"
#include "gdistill/split.hpp"

#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gdistill {

// In-memory experiment building blocks. Every function is a deterministic
// function of (config, seed).

struct PreparedData {
  Graph graph;
  SplitAssignment split;
};

/// Generates or loads the dataset, then applies split.json when the dataset
/// has one and make_split(seed) otherwise.
PreparedData prepare_data(const RunConfig& config, std::uint64_t seed);

/// Teacher trained on the training view with observed nodes as validation.
TeacherFit fit_teacher(const PreparedData& data, const RunConfig& config, std::uint64_t seed);

/// Soft labels and hidden rows from the training view for every labeled and
/// observed node, indexed by full-graph ids.
TeacherOutputs teacher_targets(const TeacherModel& teacher, const PreparedData& data,
                               double temperature);

PositionTable fit_positions(const PreparedData& data, const RunConfig& config, std::uint64_t seed,
                            int threads = 1);

/// Student inputs over `content` (possibly noisy) and `positions` (may have
/// zero width). Validation nodes are the observed ones.
DistillData make_distill_data(const PreparedData& data, const Matrix& content,
                              const PositionTable& positions, const TeacherOutputs& targets);

/// Accuracies on observed (tran) and inductive (ind) nodes, their node-count
/// interpolation (prod), and the cut value on the full graph.
EvalReport score_predictions(std::span<const int> predictions, const PreparedData& data);

/// Teacher predictions on the full graph, inductive edges restored.
std::vector<int> teacher_predictions(const TeacherModel& teacher, const PreparedData& data);

/// Data, teacher and positions for one seed; shared by every student
/// variant trained with that seed.
struct SeedContext {
  std::uint64_t seed = 0;
  PreparedData data;
  TeacherModel teacher;
  TeacherOutputs targets;
  PositionTable positions;
};

SeedContext build_seed_context(const RunConfig& config, std::uint64_t seed, int threads = 1);

/// Trains the structure-aware student variant on content noised at `alpha`
/// and scores it.
EvalReport run_student_variant(const SeedContext& ctx, const AblationVariant& variant,
                               double alpha);

/// Content-only MLP trained on ground truth alone, same architecture and seed.
EvalReport run_content_mlp(const SeedContext& ctx, const DistillConfig& distill, double alpha);

/// Student and teacher full-graph latency on one graph.
struct ServingComparison {
  LatencyStats student;
  LatencyStats teacher;
  double speedup() const { return teacher.mean_us / student.mean_us; }
};

/// Times seeded-initialization models with the configured architectures.
/// Position columns are standard normal draws rather than zeros so the
/// student gets no benefit from skipped zero entries.
ServingComparison compare_serving(const Graph& graph, const RunConfig& config, ServingMode mode,
                                  std::uint64_t seed);

// Stages on disk.

/// A stage input that has not been produced yet.
class MissingArtifact : public std::runtime_error {
 public:
  explicit MissingArtifact(const std::filesystem::path& path, const std::string& what)
      : std::runtime_error("missing " + what + ": " + path.string()), path_(path) {}
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

struct StageOptions {
  bool force = false;
  bool check = false;
  int threads = 1;
};

struct StageResult {
  bool skipped = false;
  std::vector<std::pair<std::string, bool>> checks;  // name, passed; filled in check mode

  bool all_passed() const;
};

inline const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names{"prepare",  "train-teacher", "encode-positions",
                                              "distill",  "evaluate",      "noise-sweep",
                                              "ablate",   "bench"};
  return names;
}

/// <out>/run-<config hash>
std::filesystem::path run_directory(const RunConfig& config);

/// Runs one stage into run_directory(config)/<stage>, writing manifest.json
/// last. Skips when a manifest with the same config hash and input and
/// output hashes exists, unless options.force. Throws MissingArtifact when
/// an upstream stage has not run.
StageResult run_stage(const std::string& stage, const RunConfig& config,
                      const StageOptions& options, std::ostream& log);

}  // namespace gdistill
