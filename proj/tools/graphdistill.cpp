// graphdistill: command-line driver for the distillation pipeline.

#include "gdistill/config.hpp"
#include "gdistill/pipeline.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitCheck = 3;

using Overrides = std::vector<std::pair<std::string, std::string>>;

// Pulls dotted `--section.key=value` / `--section.key value` flags out of argv.
std::vector<std::string> split_overrides(int argc, char** argv, Overrides& overrides) {
  std::vector<std::string> rest;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg.rfind("--", 0) != 0) {
      rest.push_back(arg);
      continue;
    }
    const std::string body = arg.substr(2);
    const auto eq = body.find('=');
    const std::string key = body.substr(0, eq);
    if (key.find('.') == std::string::npos) {
      rest.push_back(arg);
      continue;
    }
    if (eq != std::string::npos) {
      overrides.emplace_back(key, body.substr(eq + 1));
    } else if (i + 1 < argc) {
      overrides.emplace_back(key, argv[++i]);
    } else {
      throw gdistill::ConfigError(key, "missing value");
    }
  }
  return rest;
}

gdistill::RunConfig resolve(const std::string& file, Overrides overrides) {
  if (file.empty()) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : overrides) gdistill::apply_override(j, k, v);
    return gdistill::config_from_json(j);
  }
  return gdistill::load_config(file, overrides);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distill a graph neural network teacher into a structure-aware MLP student", "graphdistill"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file;
  std::string dataset;
  std::string out;
  std::uint64_t seed = 0;
  bool force = false;
  bool check = false;
  app.add_option("--seed", seed, "Run seed (overrides the config)");
  app.add_option("--out", out, "Output root (overrides the config)");
  app.add_option("--dataset", dataset, "\"sbm\" or a dataset directory");
  app.add_flag("--force", force, "Re-run stages whose manifests are current");
  app.add_flag("--check", check, "Exit 3 when a stage check fails");

  std::vector<std::string> stages;
  for (const auto& name : gdistill::stage_names()) {
    auto* sub = app.add_subcommand(name, "Run the " + name + " stage");
    sub->add_option("config", config_file, "JSON config file");
  }
  auto* run = app.add_subcommand("run", "prepare, train-teacher, encode-positions, distill, evaluate");
  run->add_option("config", config_file, "JSON config file");
  auto* validate = app.add_subcommand("validate", "Check a config and print it with defaults filled");
  validate->add_option("config", config_file, "JSON config file")->required();

  Overrides overrides;
  try {
    std::vector<std::string> rest = split_overrides(argc, argv, overrides);
    std::reverse(rest.begin(), rest.end());
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  } catch (const gdistill::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  if (app.count("--seed")) overrides.emplace_back("seed", std::to_string(seed));
  if (app.count("--out")) overrides.emplace_back("out", nlohmann::json(out).dump());
  if (app.count("--dataset")) {
    if (dataset == "sbm") {
      overrides.emplace_back("dataset.source", "\"sbm\"");
    } else {
      overrides.emplace_back("dataset.source", "\"path\"");
      overrides.emplace_back("dataset.path", nlohmann::json(dataset).dump());
    }
  }

  gdistill::RunConfig config;
  try {
    config = resolve(config_file, overrides);
  } catch (const gdistill::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  if (validate->parsed()) {
    std::cout << gdistill::to_json(config).dump(2) << '\n';
    return 0;
  }

  std::vector<std::string> todo;
  if (run->parsed()) {
    todo = {"prepare", "train-teacher", "encode-positions", "distill", "evaluate"};
  } else {
    for (const auto* sub : app.get_subcommands()) todo.push_back(sub->get_name());
  }

  const gdistill::StageOptions options{force, check, gdistill::runner_threads()};
  bool checks_ok = true;
  try {
    for (const auto& stage : todo) {
      std::cerr << "== " << stage << " -> " << (gdistill::run_directory(config) / stage).string() << '\n';
      const auto result = gdistill::run_stage(stage, config, options, std::cerr);
      for (const auto& [name, ok] : result.checks) {
        if (check) std::cerr << "check " << stage << '/' << name << ": " << (ok ? "PASS" : "FAIL") << '\n';
        checks_ok = checks_ok && ok;
      }
    }
  } catch (const gdistill::MissingArtifact& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const gdistill::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  std::cout << gdistill::run_directory(config).string() << '\n';
  return check && !checks_ok ? kExitCheck : 0;
}
