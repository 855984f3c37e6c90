#include "gdistill/config.hpp"

#include "gdistill/hash.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace gdistill {

using nlohmann::json;

namespace {

void require(bool ok, const std::string& key, const std::string& rule) {
  if (!ok) throw ConfigError(key, rule);
}

bool finite_in(double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; }

bool compatible(const json& defaults, const json& given) {
  if (defaults.is_number_float()) return given.is_number();
  if (defaults.is_number_unsigned()) return given.is_number_unsigned();
  if (defaults.is_number_integer()) return given.is_number_integer();
  return defaults.type() == given.type();
}

// Copies `given` over `target`, which starts as the defaults.
void overlay(json& target, const json& given, const std::string& prefix) {
  if (!given.is_object()) throw ConfigError(prefix.empty() ? "<root>" : prefix, "expected an object");
  for (const auto& [key, value] : given.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!target.contains(key)) throw ConfigError(path, "unknown key");
    json& slot = target[key];
    if (slot.is_object()) {
      overlay(slot, value, path);
    } else if (slot.is_array()) {
      if (!value.is_array()) throw ConfigError(path, "expected an array");
      const bool unsigned_items = path == "evaluate.seeds";
      for (const auto& item : value) {
        if (unsigned_items ? !item.is_number_unsigned() : !item.is_number()) {
          throw ConfigError(path, unsigned_items ? "expected non-negative integers"
                                                 : "expected numbers");
        }
      }
      slot = value;
    } else {
      if (!compatible(slot, value)) {
        throw ConfigError(path, "expected " + std::string(slot.type_name()) + ", got " +
                                    value.type_name());
      }
      slot = value;
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  out = j.at(key).get<T>();
}

}  // namespace

void RunConfig::validate() const {
  require(dataset.source == "sbm" || dataset.source == "path", "dataset.source",
          "must be \"sbm\" or \"path\"");
  if (dataset.source == "path") require(!dataset.path.empty(), "dataset.path", "must be set");
  require(dataset.sbm.blocks >= 1, "dataset.sbm.blocks", "must be >= 1");
  require(dataset.sbm.nodes_per_block >= 1, "dataset.sbm.nodes_per_block", "must be >= 1");
  require(finite_in(dataset.sbm.p_in, 0, 1), "dataset.sbm.p_in", "must be in [0, 1]");
  require(finite_in(dataset.sbm.p_out, 0, dataset.sbm.p_in), "dataset.sbm.p_out",
          "must be in [0, p_in]");
  require(dataset.sbm.feature_dim >= 1, "dataset.sbm.feature_dim", "must be >= 1");
  require(finite_in(dataset.sbm.feature_signal, 0, 1), "dataset.sbm.feature_signal",
          "must be in [0, 1]");

  require(finite_in(split.label_fraction, 0, 1) && split.label_fraction > 0 &&
              split.label_fraction < 1,
          "split.label_fraction", "must be in (0, 1)");
  require(finite_in(split.inductive_fraction, 0, 1) && split.inductive_fraction < 1,
          "split.inductive_fraction", "must be in [0, 1)");

  require(teacher.hidden_dim >= 1, "teacher.hidden_dim", "must be >= 1");
  require(teacher.num_layers >= 2, "teacher.num_layers", "must be >= 2");
  require(std::isfinite(teacher.learning_rate) && teacher.learning_rate > 0,
          "teacher.learning_rate", "must be > 0");
  require(teacher.epochs >= 0, "teacher.epochs", "must be >= 0");
  require(std::isfinite(teacher.weight_decay) && teacher.weight_decay >= 0,
          "teacher.weight_decay", "must be >= 0");

  require(positions.skipgram.dim >= 0, "positions.dim", "must be >= 0");
  require(positions.walks_per_node >= 1, "positions.walks_per_node", "must be >= 1");
  require(positions.walk_length >= 1, "positions.walk_length", "must be >= 1");
  require(positions.skipgram.window >= 1, "positions.window", "must be >= 1");
  require(positions.skipgram.negatives >= 0, "positions.negatives", "must be >= 0");
  require(positions.skipgram.epochs >= 0, "positions.epochs", "must be >= 0");
  require(std::isfinite(positions.skipgram.learning_rate) && positions.skipgram.learning_rate > 0,
          "positions.learning_rate", "must be > 0");

  try {
    distill.validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const auto space = msg.find(' ');
    throw ConfigError(msg.substr(0, space), msg.substr(space + 1));
  }

  require(!evaluate.alphas.empty(), "evaluate.alphas", "must not be empty");
  for (double a : evaluate.alphas) require(finite_in(a, 0, 1), "evaluate.alphas", "must be in [0, 1]");
  require(evaluate.repeats >= 10, "evaluate.repeats", "must be >= 10");
  require(evaluate.warmup >= 0, "evaluate.warmup", "must be >= 0");
  require(!evaluate.seeds.empty(), "evaluate.seeds", "must not be empty");
  require(evaluate.serving == "nodewise" || evaluate.serving == "batched", "evaluate.serving",
          "must be \"nodewise\" or \"batched\"");
  require(!out.empty(), "out", "must not be empty");
}

json to_json(const RunConfig& c) {
  const auto& s = c.dataset.sbm;
  const auto& d = c.distill;
  const auto& p = c.positions;
  return {
      {"dataset",
       {{"source", c.dataset.source},
        {"path", c.dataset.path},
        {"seed", c.dataset.seed},
        {"sbm",
         {{"blocks", s.blocks},
          {"nodes_per_block", s.nodes_per_block},
          {"p_in", s.p_in},
          {"p_out", s.p_out},
          {"feature_dim", s.feature_dim},
          {"feature_signal", s.feature_signal}}}}},
      {"split",
       {{"label_fraction", c.split.label_fraction},
        {"inductive_fraction", c.split.inductive_fraction}}},
      {"teacher",
       {{"hidden_dim", c.teacher.hidden_dim},
        {"num_layers", c.teacher.num_layers},
        {"learning_rate", c.teacher.learning_rate},
        {"epochs", c.teacher.epochs},
        {"weight_decay", c.teacher.weight_decay}}},
      {"positions",
       {{"dim", p.skipgram.dim},
        {"walks_per_node", p.walks_per_node},
        {"walk_length", p.walk_length},
        {"window", p.skipgram.window},
        {"negatives", p.skipgram.negatives},
        {"epochs", p.skipgram.epochs},
        {"learning_rate", p.skipgram.learning_rate}}},
      {"distill",
       {{"lambda", d.lambda},
        {"mu", d.mu},
        {"eta", d.eta},
        {"epsilon", d.epsilon},
        {"step_size", d.step_size},
        {"pgd_steps", d.pgd_steps},
        {"rsd_batch", d.rsd_batch},
        {"learning_rate", d.learning_rate},
        {"epochs", d.epochs},
        {"hidden_dim", d.hidden_dim},
        {"num_hidden_layers", d.num_hidden_layers},
        {"temperature", d.temperature},
        {"weight_decay", d.weight_decay}}},
      {"evaluate",
       {{"alphas", c.evaluate.alphas},
        {"repeats", c.evaluate.repeats},
        {"warmup", c.evaluate.warmup},
        {"seeds", c.evaluate.seeds},
        {"serving", c.evaluate.serving}}},
      {"seed", c.seed},
      {"out", c.out},
  };
}

RunConfig config_from_json(const json& given) {
  json j = to_json(RunConfig{});
  overlay(j, given, "");
  RunConfig c;
  const json& ds = j["dataset"];
  read(ds, "source", c.dataset.source);
  read(ds, "path", c.dataset.path);
  read(ds, "seed", c.dataset.seed);
  const json& sbm = ds["sbm"];
  read(sbm, "blocks", c.dataset.sbm.blocks);
  read(sbm, "nodes_per_block", c.dataset.sbm.nodes_per_block);
  read(sbm, "p_in", c.dataset.sbm.p_in);
  read(sbm, "p_out", c.dataset.sbm.p_out);
  read(sbm, "feature_dim", c.dataset.sbm.feature_dim);
  read(sbm, "feature_signal", c.dataset.sbm.feature_signal);
  read(j["split"], "label_fraction", c.split.label_fraction);
  read(j["split"], "inductive_fraction", c.split.inductive_fraction);
  const json& t = j["teacher"];
  read(t, "hidden_dim", c.teacher.hidden_dim);
  read(t, "num_layers", c.teacher.num_layers);
  read(t, "learning_rate", c.teacher.learning_rate);
  read(t, "epochs", c.teacher.epochs);
  read(t, "weight_decay", c.teacher.weight_decay);
  const json& p = j["positions"];
  read(p, "dim", c.positions.skipgram.dim);
  read(p, "walks_per_node", c.positions.walks_per_node);
  read(p, "walk_length", c.positions.walk_length);
  read(p, "window", c.positions.skipgram.window);
  read(p, "negatives", c.positions.skipgram.negatives);
  read(p, "epochs", c.positions.skipgram.epochs);
  read(p, "learning_rate", c.positions.skipgram.learning_rate);
  const json& d = j["distill"];
  read(d, "lambda", c.distill.lambda);
  read(d, "mu", c.distill.mu);
  read(d, "eta", c.distill.eta);
  read(d, "epsilon", c.distill.epsilon);
  read(d, "step_size", c.distill.step_size);
  read(d, "pgd_steps", c.distill.pgd_steps);
  read(d, "rsd_batch", c.distill.rsd_batch);
  read(d, "learning_rate", c.distill.learning_rate);
  read(d, "epochs", c.distill.epochs);
  read(d, "hidden_dim", c.distill.hidden_dim);
  read(d, "num_hidden_layers", c.distill.num_hidden_layers);
  read(d, "temperature", c.distill.temperature);
  read(d, "weight_decay", c.distill.weight_decay);
  const json& e = j["evaluate"];
  read(e, "alphas", c.evaluate.alphas);
  read(e, "repeats", c.evaluate.repeats);
  read(e, "warmup", c.evaluate.warmup);
  read(e, "seeds", c.evaluate.seeds);
  read(e, "serving", c.evaluate.serving);
  read(j, "seed", c.seed);
  read(j, "out", c.out);
  c.distill.seed = c.seed;
  c.validate();
  return c;
}

void apply_override(json& j, const std::string& key, const std::string& value) {
  const json defaults = to_json(RunConfig{});
  const json* schema = &defaults;
  json* slot = &j;
  std::stringstream parts(key);
  std::string part;
  std::vector<std::string> path;
  while (std::getline(parts, part, '.')) path.push_back(part);
  if (path.empty()) throw ConfigError(key, "empty key");
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (!schema->is_object() || !schema->contains(path[i])) throw ConfigError(key, "unknown key");
    schema = &(*schema)[path[i]];
    if (!slot->is_object()) *slot = json::object();
    slot = &(*slot)[path[i]];
  }
  if (schema->is_object()) throw ConfigError(key, "cannot override a whole section");
  json parsed = json::parse(value, nullptr, false);
  *slot = parsed.is_discarded() ? json(value) : parsed;
}

RunConfig load_config(const std::filesystem::path& file,
                      const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::ifstream in(file);
  if (!in) throw ConfigError("<file>", file.string() + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw ConfigError("<file>", file.string() + ": empty config");
  }
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("<file>", file.string() + ": not valid JSON");
  if (!j.is_object()) throw ConfigError("<root>", "expected an object");
  for (const auto& [key, value] : overrides) apply_override(j, key, value);
  return config_from_json(j);
}

std::string config_hash(const RunConfig& config) {
  json j = to_json(config);
  j.erase("out");
  return to_hex(fnv1a64(j.dump()));
}

}  // namespace gdistill
