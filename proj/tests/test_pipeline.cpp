#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <regex>

#include "oracles.hpp"
#include "rlmut/error.hpp"
#include "rlmut/pipeline.hpp"

using namespace rlmut;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rlmut_test_" + name);
  fs::remove_all(p);
  return p;
}

nlohmann::json tiny_json() {
  return nlohmann::json::parse(R"({
    "schema_version": 1,
    "env": "CartPole",
    "algorithm": "A2C",
    "n": 2,
    "hyperparameters": {"total_steps": 20000, "n_steps": 16, "hidden": [32],
                        "learning_rate": 0.001},
    "operators": [
      {"operator": "SDF", "configs": 2, "space": [0.9, 0.95]},
      {"operator": "NEI", "configs": 2, "space": [150, 12000]}
    ],
    "generators": {"weak": {"pool": 20, "select": 5},
                   "strong": {"count": 5, "candidates": 20},
                   "random": {"count": 5}},
    "stats": {"bootstrap_samples": 50},
    "replay_sample": 20,
    "seed": 3
  })");
}

std::string config_error(const nlohmann::json& j) {
  try {
    config_from_json(j);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

std::vector<EpisodeOutcome> outcomes(const std::string& pattern) {
  std::vector<EpisodeOutcome> out;
  for (char c : pattern) out.push_back(EpisodeOutcome{c == 'S', 1, 0.0, 1.0});
  return out;
}

OperatorReport scored_operator(OperatorId op, double weak, double strong) {
  OperatorReport r;
  r.op = op;
  r.status = SelectionStatus::Selected;
  r.representative = 0;
  r.scores = {{"weak", weak}, {"strong", strong}};
  r.sensitivity = sensitivity(weak, strong);
  ConfigReport c;
  c.spec = MutantSpec{op, 0, 0.5};
  c.killable = true;
  c.representative = true;
  r.configs.push_back(c);
  return r;
}

MutationReport synthetic_report() {
  MutationReport rep;
  rep.generators = {"weak", "strong"};
  rep.empty_scope = false;
  rep.operators = {scored_operator(OperatorId::SDF, 0.40, 0.44),
                   scored_operator(OperatorId::SLS, 0.50, 0.75),
                   scored_operator(OperatorId::SNU, 0.90, 0.80)};
  for (const char* g : {"weak", "strong"}) rep.mutation_score[g] = *recompute_mutation_score(rep, g);
  rep.sensitivity = sensitivity(rep.mutation_score["weak"], rep.mutation_score["strong"]);
  return rep;
}

}  // namespace

TEST(Config, DefaultsAndRoundTrip) {
  const PipelineConfig cfg = config_from_json(tiny_json());
  EXPECT_EQ(cfg.n, 2);
  EXPECT_EQ(cfg.hp.algorithm, Algorithm::A2C);
  EXPECT_EQ(cfg.hp.total_steps, 20000);
  EXPECT_EQ(cfg.operators.size(), 2u);
  EXPECT_EQ(cfg.operators[1].space, (std::vector<double>{150, 12000}));
  EXPECT_EQ(*cfg.generators.random_count, 5);
  EXPECT_EQ(config_from_json(config_to_json(cfg)), cfg);

  const PipelineConfig d = default_config(EnvKind::CartPole, Algorithm::DQN);
  EXPECT_EQ(d.n, 10);
  EXPECT_EQ(d.operators.size(), 6u);
  for (const auto& p : d.operators) EXPECT_EQ(p.configs, 5);
}

TEST(Config, ErrorsCarryTheFieldPath) {
  auto j = tiny_json();
  j["operators"][0]["configs"] = 0;
  EXPECT_EQ(config_error(j), "operators/0/configs: must be at least 1");

  j = tiny_json();
  j["n"] = 1;
  EXPECT_EQ(config_error(j), "n: must be at least 2");

  j = tiny_json();
  j["hyperparameters"]["gamma"] = 2.0;
  EXPECT_NE(config_error(j).find("hyperparameters/gamma"), std::string::npos);

  j = tiny_json();
  j["operators"][1]["operator"] = "SLS";
  EXPECT_NE(config_error(j).find("operators/1/operator"), std::string::npos);

  j = tiny_json();
  j["generators"]["weak"]["select"] = 50;
  EXPECT_EQ(config_error(j), "generators/weak/select: must not exceed pool");

  j = tiny_json();
  j["colour"] = "blue";
  EXPECT_EQ(config_error(j), "colour: unknown field");

  j = tiny_json();
  j.erase("schema_version");
  EXPECT_EQ(config_error(j), "schema_version: missing");

  j = tiny_json();
  j["seed"] = -4;
  EXPECT_NE(config_error(j).find("seed"), std::string::npos);

  j = tiny_json();
  j["operators"][0]["space"] = {0.99};
  EXPECT_NE(config_error(j).find("operators/0/space"), std::string::npos);
}

TEST(Config, ChecksumIgnoresWorkersAndPaths) {
  PipelineConfig a = config_from_json(tiny_json());
  PipelineConfig b = a;
  b.workers = 8;
  b.artifacts = "/elsewhere";
  EXPECT_EQ(config_checksum(a), config_checksum(b));
  b.seed = 4;
  EXPECT_NE(config_checksum(a), config_checksum(b));
}

TEST(DeriveSeed, PairingAndSeparation) {
  EXPECT_EQ(derive_seed(1, SeedPhase::Train, OperatorId::SDF, 0, 3),
            derive_seed(1, SeedPhase::Train, OperatorId::NEI, 2, 3));
  EXPECT_EQ(derive_seed(1, SeedPhase::Train, std::nullopt, 0, 3),
            derive_seed(1, SeedPhase::Train, OperatorId::SDF, 4, 3));
  EXPECT_NE(derive_seed(1, SeedPhase::Train, std::nullopt, 0, 3),
            derive_seed(1, SeedPhase::Train, std::nullopt, 0, 4));
  EXPECT_NE(derive_seed(1, SeedPhase::Strong, OperatorId::SDF, 0, 3),
            derive_seed(1, SeedPhase::Strong, OperatorId::SDF, 1, 3));
  EXPECT_NE(derive_seed(1, SeedPhase::Strong, OperatorId::SDF, 0, 3),
            derive_seed(1, SeedPhase::Weak, OperatorId::SDF, 0, 3));
  EXPECT_NE(derive_seed(1, SeedPhase::Train, std::nullopt, 0, 3),
            derive_seed(2, SeedPhase::Train, std::nullopt, 0, 3));
}

TEST(RunJobs, EveryJobOnceAndLowestErrorWins) {
  for (int workers : {1, 3, 8}) {
    std::vector<std::atomic<int>> hits(100);
    run_jobs(100, workers, [&](std::size_t i) { ++hits[i]; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
    try {
      run_jobs(50, workers, [](std::size_t i) {
        if (i == 17 || i == 40) throw std::runtime_error("job " + std::to_string(i));
      });
      FAIL();
    } catch (const std::runtime_error& e) {
      EXPECT_STREQ(e.what(), "job 17");
    }
  }
}

TEST(Replay, IdentityMutantIsNotKillable) {
  const std::vector<std::vector<EpisodeOutcome>> o{outcomes("SSSSSFFSSS"), outcomes("SSSSSSSSSS"),
                                                   outcomes("FFFFFSSSSS")};
  const ReplayAnalysis a = analyze_replay(o, o, StatsConfig{});
  EXPECT_FALSE(a.killable);
  EXPECT_FALSE(a.trivial);
  EXPECT_EQ(a.kill.killed_count, 0);
  EXPECT_DOUBLE_EQ(a.triviality->ratio, 0.0);
}

TEST(Replay, SeparatedMutantIsKillableAndTrivial) {
  const std::vector<std::vector<EpisodeOutcome>> o(3, outcomes(std::string(20, 'S')));
  const std::vector<std::vector<EpisodeOutcome>> m(3, outcomes(std::string(20, 'F')));
  const ReplayAnalysis a = analyze_replay(o, m, StatsConfig{});
  EXPECT_TRUE(a.killable);
  EXPECT_TRUE(a.trivial);
  EXPECT_DOUBLE_EQ(a.kill.rate, 1.0);
}

TEST(Replay, TableCounts) {
  const ContingencyTable t = make_table(outcomes("SSFS"), outcomes("SFFF"));
  EXPECT_EQ(t, (ContingencyTable{3, 1, 1, 3}));
  EXPECT_THROW(make_table(outcomes("SS"), outcomes("S")), ContractError);
}

TEST(Pairing, PrefixChecks) {
  const std::vector<EnvConfig> a{{{1}}, {{2}}, {{3}}};
  const std::vector<EnvConfig> b{{{1}}, {{2}}};
  const std::vector<EnvConfig> c{{{1}}, {{5}}};
  PairingCheck p = check_pairing(a, b);
  EXPECT_TRUE(p.shared_prefix);
  EXPECT_TRUE(p.mutant_is_prefix);
  p = check_pairing(b, a);
  EXPECT_TRUE(p.shared_prefix);
  EXPECT_FALSE(p.mutant_is_prefix);
  p = check_pairing(a, c);
  EXPECT_FALSE(p.shared_prefix);
}

TEST(Report, MutationScoreFromStoredRates) {
  const MutationReport rep = synthetic_report();
  EXPECT_NEAR(rep.mutation_score.at("weak"), (0.40 + 0.50 + 0.90) / 3.0, 1e-15);
  EXPECT_NEAR(rep.mutation_score.at("strong"), (0.44 + 0.75 + 0.80) / 3.0, 1e-15);
  EXPECT_NEAR(*rep.operators[1].sensitivity, 0.33, 0.005);

  const MutationReport back = report_from_json(nlohmann::json::parse(report_to_json(rep).dump()));
  for (const char* g : {"weak", "strong"})
    EXPECT_EQ(*recompute_mutation_score(back, g), rep.mutation_score.at(g));
  EXPECT_EQ(report_to_json(back).dump(), report_to_json(rep).dump());
  EXPECT_FALSE(recompute_mutation_score(back, "random"));
}

TEST(Report, CsvRowPerOperatorConfigGenerator) {
  const MutationReport rep = synthetic_report();
  const std::string csv = report_csv(rep);
  // header + 3 operators x 1 config x (trs + weak + strong); generator maps are
  // empty in the synthetic report so only the trs rows appear
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 3);
  EXPECT_EQ(csv.rfind("operator,j,value,generator,", 0), 0u);
}

TEST(Plots, TwoFilesThreeGroupsStableBytes) {
  const MutationReport rep = synthetic_report();
  const fs::path dir = scratch("plots");
  const auto files = emit_plots(rep, dir);
  ASSERT_EQ(files.size(), 2u);
  const std::string ms = read_file(dir / "ms.svg");
  std::size_t groups = 0;
  for (std::size_t p = ms.find("class=\"group\""); p != std::string::npos;
       p = ms.find("class=\"group\"", p + 1))
    ++groups;
  EXPECT_EQ(groups, 3u);
  EXPECT_EQ(ms.rfind("<svg", 0), 0u);
  // bar heights never exceed the axis
  const std::regex height("height=\"([0-9.]+)\" fill=\"#(9ecae1|3182bd)\"");
  for (auto it = std::sregex_iterator(ms.begin(), ms.end(), height); it != std::sregex_iterator();
       ++it)
    EXPECT_LE(std::stod((*it)[1]), 240.0);
  emit_plots(rep, dir / "again");
  EXPECT_EQ(read_file(dir / "again" / "ms.svg"), ms);
  EXPECT_EQ(read_file(dir / "again" / "sensitivity.svg"), read_file(dir / "sensitivity.svg"));
}

TEST(Plots, EmptyScopeWritesNothing) {
  MutationReport rep;
  const fs::path dir = scratch("plots_empty");
  EXPECT_TRUE(emit_plots(rep, dir).empty());
  EXPECT_FALSE(fs::exists(dir / "ms.svg"));
}

TEST(Pipeline, PhasesNeedTheirInputs) {
  PipelineConfig cfg = config_from_json(tiny_json());
  cfg.artifacts = scratch("missing").string();
  EXPECT_THROW(phase_replay(cfg), MissingArtifactError);
  EXPECT_THROW(phase_score(cfg), MissingArtifactError);
}

TEST(Pipeline, EndToEndIsConsistentAndResumable) {
  PipelineConfig cfg = config_from_json(tiny_json());
  cfg.artifacts = scratch("e2e").string();
  const MutationReport rep = Pipeline(cfg).run_all();
  const fs::path root(cfg.artifacts);
  for (const char* f : {"manifest.json", "report.json", "report.csv", "kills.csv",
                        "originals/0/agent.json", "originals/1/training_log.jsonl",
                        "mutants/SDF/0/1/agent.json", "mutants/NEI/0/0/replay.json",
                        "suites/weak.json", "suites/random.json"})
    EXPECT_TRUE(fs::exists(root / f)) << f;

  EXPECT_EQ(rep.generators, (std::vector<std::string>{"weak", "strong", "random"}));
  EXPECT_EQ(rep.operators.size(), 2u);
  for (const OperatorReport& op : rep.operators) {
    int killable = 0, trivial = 0;
    for (const ConfigReport& c : op.configs) {
      killable += c.killable;
      trivial += c.trivial;
      EXPECT_EQ(c.replay.n(), 2);
      for (const PairingCheck& p : c.pairing) EXPECT_TRUE(p.shared_prefix);
      EXPECT_EQ(c.representative, op.representative && *op.representative == c.spec.j);
    }
    EXPECT_DOUBLE_EQ(op.percent_killable, static_cast<double>(killable) / op.configs.size());
    EXPECT_DOUBLE_EQ(op.percent_trivial, static_cast<double>(trivial) / op.configs.size());
    if (op.representative) {
      const ConfigReport& c = op.configs[*op.representative];
      for (const auto& [gen, rate] : op.scores) EXPECT_EQ(rate, c.generators.at(gen).rate);
    }
  }
  // 150 steps of training cannot balance the pole
  const auto& nei = rep.operators[1].configs;
  const auto tiny = std::find_if(nei.begin(), nei.end(),
                                 [](const ConfigReport& c) { return c.spec.value == 150; });
  ASSERT_NE(tiny, nei.end());
  EXPECT_TRUE(tiny->killable);
  EXPECT_TRUE(tiny->trivial);
  EXPECT_FALSE(rep.empty_scope);
  for (const auto& [gen, ms] : rep.mutation_score) EXPECT_EQ(*recompute_mutation_score(rep, gen), ms);

  const std::string first = read_file(root / "report.json");
  EXPECT_EQ(report_to_json(load_report(root / "report.json")).dump(2) + "\n", first);
  // rerun over the same artifacts: nothing changes
  Pipeline(cfg).run_all();
  EXPECT_EQ(read_file(root / "report.json"), first);

  // a replay-only rerun after deleting the report converges to the same bytes
  fs::remove(root / "report.json");
  phase_replay(cfg);
  phase_score(cfg);
  EXPECT_EQ(read_file(root / "report.json"), first);

  // artifacts from another config are refused
  PipelineConfig other = cfg;
  other.seed = 99;
  EXPECT_THROW(Pipeline{other}, ValidationError);
}
