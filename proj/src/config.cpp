#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "rlmut/checksum.hpp"
#include "rlmut/error.hpp"
#include "rlmut/pipeline.hpp"

namespace rlmut {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& why) {
  throw ValidationError(path + ": " + why);
}

void only_keys(const json& j, const std::string& path, const std::set<std::string>& known) {
  if (!j.is_object()) bad(path, "expected an object");
  for (const auto& [key, _] : j.items())
    if (!known.contains(key)) bad(path.empty() ? key : path + "/" + key, "unknown field");
}

std::string child(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "/" + key;
}

std::int64_t get_int(const json& j, const std::string& path, std::int64_t lo, std::int64_t hi) {
  if (!j.is_number_integer()) bad(path, "expected an integer");
  if (j.is_number_unsigned() && j.get<std::uint64_t>() >
                                    static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
    bad(path, "out of range");
  const auto v = j.get<std::int64_t>();
  if (v < lo) bad(path, "must be at least " + std::to_string(lo));
  if (v > hi) bad(path, "must be at most " + std::to_string(hi));
  return v;
}

int get_count(const json& parent, const std::string& path, const char* key, int fallback) {
  if (!parent.contains(key)) return fallback;
  return static_cast<int>(
      get_int(parent.at(key), child(path, key), 1, std::numeric_limits<int>::max()));
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) bad(path, "expected a string");
  return j.get<std::string>();
}

template <typename F>
auto with_path(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ValidationError& e) {
    bad(path, e.what());
  }
}

}  // namespace

PipelineConfig default_config(EnvKind env, Algorithm algorithm) {
  PipelineConfig cfg;
  cfg.env = env;
  cfg.algorithm = algorithm;
  cfg.hp = Hyperparameters::defaults(algorithm);
  for (OperatorId op : catalog(algorithm)) cfg.operators.push_back(OperatorPlan{op, 5, {}});
  return cfg;
}

void validate(const PipelineConfig& cfg) {
  if (cfg.n < 2) bad("n", "must be at least 2");
  if (cfg.hp.algorithm != cfg.algorithm)
    bad("hyperparameters/algorithm", "must match the top-level algorithm");
  validate(cfg.hp);
  if (cfg.operators.empty()) bad("operators", "must list at least one operator");
  std::set<OperatorId> seen;
  for (std::size_t k = 0; k < cfg.operators.size(); ++k) {
    const OperatorPlan& plan = cfg.operators[k];
    const std::string path = "operators/" + std::to_string(k);
    if (!applicable(plan.op, cfg.algorithm))
      bad(path + "/operator", std::string(to_string(plan.op)) + " is not applicable to " +
                                  std::string(to_string(cfg.algorithm)));
    if (!seen.insert(plan.op).second) bad(path + "/operator", "listed twice");
    if (plan.configs < 1) bad(path + "/configs", "must be at least 1");
    if (plan.space.empty()) {
      with_path(path, [&] { return default_space(plan.op, cfg.hp); });
    } else {
      with_path(path + "/space", [&] { return custom_space(plan.op, cfg.hp, plan.space); });
    }
  }
  const GeneratorPlan& g = cfg.generators;
  if (g.weak_pool < 1) bad("generators/weak/pool", "must be at least 1");
  if (g.weak_select < 1) bad("generators/weak/select", "must be at least 1");
  if (g.weak_select > g.weak_pool) bad("generators/weak/select", "must not exceed pool");
  if (g.strong_count < 1) bad("generators/strong/count", "must be at least 1");
  if (g.strong_candidates < 1) bad("generators/strong/candidates", "must be at least 1");
  if (g.random_count && *g.random_count < 1) bad("generators/random/count", "must be at least 1");
  validate(cfg.stats);
  if (cfg.replay_sample < 1) bad("replay_sample", "must be at least 1");
  if (cfg.workers < 1) bad("workers", "must be at least 1");
  if (cfg.artifacts.empty()) bad("artifacts", "must not be empty");
}

nlohmann::json config_to_json(const PipelineConfig& cfg) {
  json ops = json::array();
  for (const OperatorPlan& p : cfg.operators) {
    json o{{"operator", to_string(p.op)}, {"configs", p.configs}};
    if (!p.space.empty()) o["space"] = p.space;
    ops.push_back(o);
  }
  json gens{{"weak", {{"pool", cfg.generators.weak_pool}, {"select", cfg.generators.weak_select}}},
            {"strong",
             {{"count", cfg.generators.strong_count},
              {"candidates", cfg.generators.strong_candidates}}}};
  if (cfg.generators.random_count) gens["random"] = {{"count", *cfg.generators.random_count}};
  return json{{"schema_version", kConfigSchemaVersion},
              {"env", to_string(cfg.env)},
              {"algorithm", to_string(cfg.algorithm)},
              {"n", cfg.n},
              {"hyperparameters", cfg.hp},
              {"operators", ops},
              {"generators", gens},
              {"stats", cfg.stats},
              {"replay_sample", cfg.replay_sample},
              {"seed", cfg.seed},
              {"artifacts", cfg.artifacts},
              {"workers", cfg.workers}};
}

PipelineConfig config_from_json(const nlohmann::json& j) {
  only_keys(j, "", {"schema_version", "env", "algorithm", "n", "hyperparameters", "operators",
                    "generators", "stats", "replay_sample", "seed", "artifacts", "workers"});
  if (!j.contains("schema_version")) bad("schema_version", "missing");
  const auto version = get_int(j.at("schema_version"), "schema_version", 1,
                               std::numeric_limits<int>::max());
  if (version != kConfigSchemaVersion)
    bad("schema_version", "unsupported version " + std::to_string(version) + " (expected " +
                              std::to_string(kConfigSchemaVersion) + ")");
  if (!j.contains("env")) bad("env", "missing");
  if (!j.contains("algorithm")) bad("algorithm", "missing");
  const std::string env_name = get_string(j.at("env"), "env");
  const std::string algorithm_name = get_string(j.at("algorithm"), "algorithm");
  const EnvKind env = with_path("env", [&] { return env_kind_from_string(env_name); });
  const Algorithm algorithm =
      with_path("algorithm", [&] { return algorithm_from_string(algorithm_name); });

  PipelineConfig cfg = default_config(env, algorithm);
  if (j.contains("n"))
    cfg.n = static_cast<int>(get_int(j.at("n"), "n", std::numeric_limits<int>::min(),
                                     std::numeric_limits<int>::max()));

  if (j.contains("hyperparameters")) {
    json hpj = j.at("hyperparameters");
    if (!hpj.is_object()) bad("hyperparameters", "expected an object");
    if (hpj.contains("algorithm") && hpj.at("algorithm") != to_string(algorithm))
      bad("hyperparameters/algorithm", "must match the top-level algorithm");
    hpj["algorithm"] = to_string(algorithm);
    try {
      cfg.hp = hpj.get<Hyperparameters>();
    } catch (const ValidationError&) {
      throw;
    } catch (const json::exception& e) {
      bad("hyperparameters", e.what());
    }
  }

  if (j.contains("operators")) {
    const json& ops = j.at("operators");
    if (!ops.is_array()) bad("operators", "expected an array");
    cfg.operators.clear();
    for (std::size_t k = 0; k < ops.size(); ++k) {
      const std::string path = "operators/" + std::to_string(k);
      const json& o = ops[k];
      only_keys(o, path, {"operator", "configs", "space"});
      if (!o.contains("operator")) bad(path + "/operator", "missing");
      OperatorPlan plan;
      const std::string op_name = get_string(o.at("operator"), path + "/operator");
      plan.op = with_path(path + "/operator", [&] { return operator_from_string(op_name); });
      if (o.contains("configs"))
        plan.configs = static_cast<int>(get_int(o.at("configs"), path + "/configs",
                                                std::numeric_limits<int>::min(),
                                                std::numeric_limits<int>::max()));
      if (o.contains("space")) {
        const json& sp = o.at("space");
        if (!sp.is_array()) bad(path + "/space", "expected an array of numbers");
        for (std::size_t v = 0; v < sp.size(); ++v) {
          if (!sp[v].is_number()) bad(path + "/space/" + std::to_string(v), "expected a number");
          plan.space.push_back(sp[v].get<double>());
        }
        if (plan.space.empty()) bad(path + "/space", "must not be empty");
      }
      cfg.operators.push_back(plan);
    }
  }

  if (j.contains("generators")) {
    const json& g = j.at("generators");
    only_keys(g, "generators", {"weak", "strong", "random"});
    if (g.contains("weak")) {
      only_keys(g.at("weak"), "generators/weak", {"pool", "select"});
      cfg.generators.weak_pool =
          get_count(g.at("weak"), "generators/weak", "pool", cfg.generators.weak_pool);
      cfg.generators.weak_select =
          get_count(g.at("weak"), "generators/weak", "select", cfg.generators.weak_select);
    }
    if (g.contains("strong")) {
      only_keys(g.at("strong"), "generators/strong", {"count", "candidates"});
      cfg.generators.strong_count =
          get_count(g.at("strong"), "generators/strong", "count", cfg.generators.strong_count);
      cfg.generators.strong_candidates = get_count(g.at("strong"), "generators/strong",
                                                   "candidates", cfg.generators.strong_candidates);
    }
    if (g.contains("random")) {
      only_keys(g.at("random"), "generators/random", {"count"});
      if (!g.at("random").contains("count")) bad("generators/random/count", "missing");
      cfg.generators.random_count = get_count(g.at("random"), "generators/random", "count", 1);
    }
  }

  if (j.contains("stats")) {
    try {
      cfg.stats = j.at("stats").get<StatsConfig>();
    } catch (const json::exception& e) {
      bad("stats", e.what());
    }
  }
  if (j.contains("replay_sample"))
    cfg.replay_sample = static_cast<int>(
        get_int(j.at("replay_sample"), "replay_sample", 1, std::numeric_limits<int>::max()));
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) bad("seed", "expected a non-negative integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("artifacts")) cfg.artifacts = get_string(j.at("artifacts"), "artifacts");
  if (j.contains("workers"))
    cfg.workers = static_cast<int>(get_int(j.at("workers"), "workers", 1, 1024));

  validate(cfg);
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path.string() + ": cannot open config file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": not valid JSON (" + e.what() + ")");
  }
  return config_from_json(j);
}

std::string config_checksum(const PipelineConfig& cfg) {
  json j = config_to_json(cfg);
  j.erase("artifacts");
  j.erase("workers");
  Fnv1a h;
  h.update(j.dump());
  return hex64(h.digest());
}

}  // namespace rlmut
