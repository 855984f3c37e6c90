#pragma once

#include "gdistill/positions.hpp"
#include "gdistill/sbm.hpp"
#include "gdistill/student.hpp"
#include "gdistill/teacher.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace gdistill {

/// Invalid configuration; `key()` is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct DatasetConfig {
  std::string source = "sbm";  // "sbm" or "path"
  std::string path;            // dataset directory when source == "path"
  SbmParams sbm;
  std::uint64_t seed = 0;      // SBM generator seed, shared by every run seed
};

struct SplitConfig {
  double label_fraction = 0.1;
  double inductive_fraction = 0.2;
};

struct EvaluateConfig {
  std::vector<double> alphas{0.0, 0.5, 1.0};
  int repeats = 50;
  int warmup = 3;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::string serving = "nodewise";  // "nodewise" or "batched"
};

/// Every knob of a pipeline run. Defaults are the documented artifact choices.
struct RunConfig {
  DatasetConfig dataset;
  SplitConfig split;
  TeacherConfig teacher;
  PositionOptions positions;
  DistillConfig distill;  // distill.seed is not a key; runs set it from their seed
  EvaluateConfig evaluate;
  std::uint64_t seed = 0;
  std::string out = "runs";

  /// Throws ConfigError naming the first invalid key.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& config);

/// Overlays `j` on the defaults. Unknown keys and type mismatches throw
/// ConfigError; the result is validated.
RunConfig config_from_json(const nlohmann::json& j);

/// Sets a dotted key such as "distill.eta" in `j`. The value is parsed as
/// JSON when possible and taken as a string otherwise. Unknown keys throw.
void apply_override(nlohmann::json& j, const std::string& key, const std::string& value);

/// Reads a JSON config file (empty files are an error), applies overrides
/// in order, and returns the validated result.
RunConfig load_config(const std::filesystem::path& file,
                      const std::vector<std::pair<std::string, std::string>>& overrides = {});

/// Hex FNV-1a of the canonical JSON without `out`.
std::string config_hash(const RunConfig& config);

}  // namespace gdistill
