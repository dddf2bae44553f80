// Python extension: thin wrappers over the library. Structured values cross
// the boundary as JSON text; the rlmut package decodes them.
#include <map>
#include <optional>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rlmut/error.hpp"
#include "rlmut/pipeline.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

rlmut::EnvKind env(const std::string& name) { return rlmut::env_kind_from_string(name); }

std::vector<std::vector<double>> configs_to_lists(const std::vector<rlmut::EnvConfig>& cs) {
  std::vector<std::vector<double>> out;
  for (const auto& c : cs) out.push_back(c.values);
  return out;
}

std::vector<rlmut::EnvConfig> lists_to_configs(const std::vector<std::vector<double>>& vs) {
  std::vector<rlmut::EnvConfig> out;
  for (const auto& v : vs) out.push_back(rlmut::EnvConfig{v});
  return out;
}

std::string train_agent(const std::string& env_name, const std::string& hp_json,
                        std::uint64_t seed) {
  const auto hp = json::parse(hp_json).get<rlmut::Hyperparameters>();
  rlmut::TrainResult r;
  {
    py::gil_scoped_release release;
    r = rlmut::train(env(env_name), hp, seed);
  }
  json trs = json::array();
  for (const auto& c : r.log.trs()) trs.push_back(c.values);
  return json{{"agent", r.agent}, {"trs", trs}}.dump();
}

std::string evaluate_agent(const std::string& agent_json, const std::string& env_name,
                           const std::vector<std::vector<double>>& configs) {
  const auto agent = json::parse(agent_json).get<rlmut::TrainedAgent>();
  const auto cs = lists_to_configs(configs);
  return json(rlmut::evaluate(agent, env(env_name), cs)).dump();
}

std::string run_all(const std::string& config_json, int workers) {
  rlmut::PipelineConfig cfg = rlmut::config_from_json(json::parse(config_json));
  if (workers > 0) cfg.workers = workers;
  rlmut::validate(cfg);
  rlmut::MutationReport rep;
  {
    py::gil_scoped_release release;
    rep = rlmut::Pipeline(cfg).run_all();
  }
  return rlmut::report_to_json(rep).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "rlmut native core";

  // Translators run newest first, so the base class goes in first.
  py::register_exception<rlmut::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<rlmut::ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<rlmut::MissingArtifactError>(m, "MissingArtifactError",
                                                      PyExc_FileNotFoundError);

  m.def("fisher_exact",
        py::overload_cast<std::int64_t, std::int64_t, std::int64_t, std::int64_t>(
            &rlmut::fisher_exact),
        py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"));
  m.def(
      "killed_pair",
      [](std::int64_t so, std::int64_t fo, std::int64_t sm, std::int64_t fm, double alpha) {
        rlmut::StatsConfig cfg;
        cfg.alpha = alpha;
        return std::string(
            rlmut::to_string(rlmut::killed_pair(rlmut::ContingencyTable{so, fo, sm, fm}, cfg)));
      },
      py::arg("s_o"), py::arg("f_o"), py::arg("s_m"), py::arg("f_m"), py::arg("alpha") = 0.05);
  m.def(
      "killing_rate",
      [](const std::vector<std::string>& verdicts, double threshold) {
        std::vector<rlmut::PairResult> pairs;
        for (const auto& v : verdicts) {
          rlmut::PairResult r;
          r.verdict = rlmut::pair_verdict_from_string(v);
          pairs.push_back(r);
        }
        rlmut::StatsConfig cfg;
        cfg.kill_threshold = threshold;
        return json(rlmut::killing_rate(pairs, cfg)).dump();
      },
      py::arg("verdicts"), py::arg("threshold") = 0.5);
  m.def("mutation_score",
        py::overload_cast<const std::vector<std::vector<double>>&>(&rlmut::mutation_score),
        py::arg("rates_per_operator"));
  m.def("sensitivity", &rlmut::sensitivity, py::arg("ms_weak"), py::arg("ms_strong"));
  m.def(
      "probability_of_improvement",
      [](const std::vector<bool>& o, const std::vector<bool>& mu, int samples, std::uint64_t seed) {
        rlmut::StatsConfig cfg;
        cfg.bootstrap_samples = samples;
        rlmut::Stream s(seed);
        const auto e = rlmut::probability_of_improvement(o, mu, cfg, s);
        return py::make_tuple(e.estimate, e.ci_low, e.ci_high);
      },
      py::arg("original"), py::arg("mutant"), py::arg("samples") = 2000, py::arg("seed") = 0);

  m.def(
      "random_configs",
      [](const std::string& kind, int count, std::uint64_t seed) {
        return configs_to_lists(rlmut::random_generator(env(kind), count, seed));
      },
      py::arg("env"), py::arg("count"), py::arg("seed"));

  m.def(
      "catalog",
      [](const std::string& algorithm) {
        std::vector<std::string> out;
        for (auto op : rlmut::catalog(rlmut::algorithm_from_string(algorithm)))
          out.emplace_back(rlmut::to_string(op));
        return out;
      },
      py::arg("algorithm"));
  m.def(
      "default_hyperparameters",
      [](const std::string& algorithm) {
        return json(rlmut::Hyperparameters::defaults(rlmut::algorithm_from_string(algorithm)))
            .dump();
      },
      py::arg("algorithm"));
  m.def(
      "default_space",
      [](const std::string& op, const std::string& hp_json) {
        const auto hp = json::parse(hp_json).get<rlmut::Hyperparameters>();
        return rlmut::default_space(rlmut::operator_from_string(op), hp).values;
      },
      py::arg("operator"), py::arg("hyperparameters"));
  m.def(
      "apply_mutation",
      [](const std::string& op, double value, const std::string& hp_json) {
        const auto hp = json::parse(hp_json).get<rlmut::Hyperparameters>();
        return json(rlmut::apply(rlmut::MutantSpec{rlmut::operator_from_string(op), 0, value}, hp))
            .dump();
      },
      py::arg("operator"), py::arg("value"), py::arg("hyperparameters"));

  m.def("train", &train_agent, py::arg("env"), py::arg("hyperparameters"), py::arg("seed"));
  m.def("evaluate", &evaluate_agent, py::arg("agent"), py::arg("env"), py::arg("configs"));

  m.def(
      "normalize_config",
      [](const std::string& config_json) {
        return rlmut::config_to_json(rlmut::config_from_json(json::parse(config_json))).dump();
      },
      py::arg("config"));
  m.def(
      "derive_seed",
      [](std::uint64_t root, const std::string& phase, std::optional<std::string> op, int j,
         int instance) {
        static const std::map<std::string, rlmut::SeedPhase> phases{
            {"train", rlmut::SeedPhase::Train},         {"sample", rlmut::SeedPhase::Sample},
            {"replay", rlmut::SeedPhase::Replay},       {"weak", rlmut::SeedPhase::Weak},
            {"strong", rlmut::SeedPhase::Strong},       {"predictor", rlmut::SeedPhase::Predictor},
            {"random", rlmut::SeedPhase::Random},       {"bootstrap", rlmut::SeedPhase::Bootstrap}};
        const auto it = phases.find(phase);
        if (it == phases.end()) throw rlmut::ValidationError("unknown seed phase: " + phase);
        std::optional<rlmut::OperatorId> id;
        if (op) id = rlmut::operator_from_string(*op);
        return rlmut::derive_seed(root, it->second, id, j, instance);
      },
      py::arg("root"), py::arg("phase"), py::arg("operator") = py::none(), py::arg("j") = 0,
      py::arg("instance") = 0);
  m.def("run_all", &run_all, py::arg("config"), py::arg("workers") = 0);
  m.def(
      "load_report",
      [](const std::string& path) { return rlmut::report_to_json(rlmut::load_report(path)).dump(); },
      py::arg("path"));
}
