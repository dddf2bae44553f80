#include "rlmut/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "rlmut/checksum.hpp"
#include "rlmut/error.hpp"

namespace rlmut {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string file_checksum(const std::string& text) {
  Fnv1a h;
  h.update(text);
  return hex64(h.digest());
}

std::string original_dir(int i) { return "originals/" + std::to_string(i); }

std::string mutant_dir(OperatorId op, int j, int i) {
  return "mutants/" + std::string(to_string(op)) + "/" + std::to_string(j) + "/" +
         std::to_string(i);
}

std::string config_key(OperatorId op, int j) {
  return std::string(to_string(op)) + "_" + std::to_string(j);
}

std::vector<bool> success_flags(std::span<const EpisodeOutcome> outcomes) {
  std::vector<bool> out;
  out.reserve(outcomes.size());
  for (const EpisodeOutcome& o : outcomes) out.push_back(o.success);
  return out;
}

std::mutex& log_mutex() {
  static std::mutex mu;
  return mu;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, SeedPhase phase, std::optional<OperatorId> op,
                          int j, int instance) {
  const auto phase_word = static_cast<std::uint64_t>(phase);
  const auto instance_word = static_cast<std::uint64_t>(instance);
  if (phase == SeedPhase::Train) return hash_words({root, phase_word, instance_word});
  const std::uint64_t op_word = op ? static_cast<std::uint64_t>(*op) + 1 : 0;
  return hash_words({root, phase_word, op_word, static_cast<std::uint64_t>(j), instance_word});
}

void run_jobs(std::size_t count, int workers, const std::function<void(std::size_t)>& job) {
  if (count == 0) return;
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t k = next.fetch_add(1);
      if (k >= count) return;
      try {
        job(k);
      } catch (...) {
        errors[k] = std::current_exception();
        stop = true;
      }
    }
  };
  const std::size_t threads =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, workers)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

ContingencyTable make_table(std::span<const EpisodeOutcome> original,
                            std::span<const EpisodeOutcome> mutant) {
  if (original.size() != mutant.size())
    throw ContractError("contingency table: original and mutant ran different suites");
  ContingencyTable t;
  for (const EpisodeOutcome& o : original) (o.success ? t.s_o : t.f_o) += 1;
  for (const EpisodeOutcome& m : mutant) (m.success ? t.s_m : t.f_m) += 1;
  return t;
}

ReplayAnalysis analyze_replay(std::span<const std::vector<EpisodeOutcome>> originals,
                              std::span<const std::vector<EpisodeOutcome>> mutants,
                              const StatsConfig& cfg) {
  if (originals.size() != mutants.size() || originals.empty())
    throw ContractError("replay analysis: need one mutant per original instance");
  std::vector<PairResult> pairs;
  std::vector<TrivialityPair> triv;
  for (std::size_t i = 0; i < originals.size(); ++i) {
    pairs.push_back(evaluate_pair(make_table(originals[i], mutants[i]), cfg));
    TrivialityPair tp;
    for (std::size_t c = 0; c < originals[i].size(); ++c) {
      if (!originals[i][c].success) continue;
      ++tp.original_successes;
      if (!mutants[i][c].success) ++tp.mutant_failures;
    }
    triv.push_back(tp);
  }
  ReplayAnalysis a;
  a.kill = killing_rate(pairs, cfg);
  a.killable = a.kill.killed;
  const bool any_success = std::any_of(triv.begin(), triv.end(), [](const TrivialityPair& p) {
    return p.original_successes > 0;
  });
  if (any_success) {
    a.triviality = triviality(triv, cfg);
    a.trivial = a.triviality->trivial;
  }
  return a;
}

PairingCheck check_pairing(std::span<const EnvConfig> original_trs,
                           std::span<const EnvConfig> mutant_trs) {
  PairingCheck p;
  p.original_episodes = original_trs.size();
  p.mutant_episodes = mutant_trs.size();
  const std::size_t common = std::min(original_trs.size(), mutant_trs.size());
  p.shared_prefix = std::equal(original_trs.begin(), original_trs.begin() + common,
                               mutant_trs.begin());
  p.mutant_is_prefix = p.shared_prefix && mutant_trs.size() <= original_trs.size();
  return p;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifactError(path.string() + " cannot be read");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << text;
    if (!out.flush()) throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

// Registry of produced artifacts: relative path -> checksum of its bytes.
class Manifest {
 public:
  Manifest(fs::path root, std::string config_checksum)
      : root_(std::move(root)), config_checksum_(std::move(config_checksum)) {
    const fs::path path = root_ / "manifest.json";
    if (!fs::exists(path)) return;
    json j;
    try {
      j = json::parse(read_file(path));
    } catch (const json::exception& e) {
      throw Error(path.string() + ": unreadable manifest (" + e.what() + ")");
    }
    if (j.value("config_checksum", std::string()) != config_checksum_)
      throw ValidationError("artifacts: " + root_.string() +
                            " holds results of a different configuration; use a fresh directory");
    for (const auto& [rel, entry] : j.at("artifacts").items())
      entries_[rel] = Entry{entry.at("checksum").get<std::string>(),
                            entry.at("phase").get<std::string>()};
    for (const auto& p : j.at("completed_phases")) phases_.insert(p.get<std::string>());
  }

  bool verified(const std::string& rel) const {
    std::string expected;
    {
      std::lock_guard lock(mu_);
      const auto it = entries_.find(rel);
      if (it == entries_.end()) return false;
      expected = it->second.checksum;
    }
    const fs::path path = root_ / rel;
    if (!fs::exists(path)) return false;
    return file_checksum(read_file(path)) == expected;
  }

  void record(const std::string& rel, const std::string& checksum, const std::string& phase) {
    std::lock_guard lock(mu_);
    entries_[rel] = Entry{checksum, phase};
    save_locked();
  }

  void complete_phase(const std::string& phase) {
    std::lock_guard lock(mu_);
    phases_.insert(phase);
    save_locked();
  }

 private:
  struct Entry {
    std::string checksum;
    std::string phase;
  };

  void save_locked() const {
    json artifacts = json::object();
    for (const auto& [rel, e] : entries_)
      artifacts[rel] = json{{"checksum", e.checksum}, {"phase", e.phase}};
    json j{{"schema_version", 1},
           {"config_checksum", config_checksum_},
           {"artifacts", artifacts},
           {"completed_phases", phases_}};
    write_file_atomic(root_ / "manifest.json", j.dump(2) + "\n");
  }

  mutable std::mutex mu_;
  fs::path root_;
  std::string config_checksum_;
  std::map<std::string, Entry> entries_;
  std::set<std::string> phases_;
};

struct Pipeline::Sampled {
  OperatorId op;
  MutationSpace space;
  SampledConfigs sampled;
};

Pipeline::Pipeline(PipelineConfig cfg, Logger log)
    : cfg_(std::move(cfg)), root_(cfg_.artifacts), log_(std::move(log)) {
  validate(cfg_);
  fs::create_directories(root_);
  manifest_ = std::make_unique<Manifest>(root_, config_checksum(cfg_));
}

Pipeline::~Pipeline() = default;

void Pipeline::log(const std::string& line) const {
  if (!log_) return;
  std::lock_guard lock(log_mutex());
  log_(line);
}

bool Pipeline::have(const std::string& rel) const { return manifest_->verified(rel); }

void Pipeline::require(const std::string& rel) const {
  if (!have(rel))
    throw MissingArtifactError((root_ / rel).string() +
                               " is missing or does not match the manifest; run the phase that "
                               "produces it first");
}

void Pipeline::store(const std::string& rel, const std::string& text, const std::string& phase) {
  write_file_atomic(root_ / rel, text);
  manifest_->record(rel, file_checksum(text), phase);
}

nlohmann::json Pipeline::load_json(const std::string& rel) const {
  require(rel);
  return json::parse(read_file(root_ / rel));
}

TrainedAgent Pipeline::load_agent(const std::string& rel) const {
  return load_json(rel).get<TrainedAgent>();
}

TrainingLog Pipeline::load_log(const std::string& rel) const {
  require(rel);
  std::istringstream in(read_file(root_ / rel));
  return read_training_log(in);
}

std::vector<Pipeline::Sampled> Pipeline::sampled_configs() {
  std::vector<Sampled> out;
  for (const OperatorPlan& plan : cfg_.operators) {
    Sampled s{plan.op,
              plan.space.empty() ? default_space(plan.op, cfg_.hp)
                                 : custom_space(plan.op, cfg_.hp, plan.space),
              {}};
    Stream stream(derive_seed(cfg_.seed, SeedPhase::Sample, plan.op, 0, 0));
    s.sampled = sample_configs(s.space, plan.configs, stream);
    const std::string rel = "mutants/" + std::string(to_string(plan.op)) + "/configs.json";
    if (!have(rel)) {
      const json j{{"operator", to_string(plan.op)},
                   {"original", s.space.original},
                   {"space", s.space.values},
                   {"exhausted", s.sampled.exhausted},
                   {"specs", s.sampled.specs}};
      store(rel, j.dump(2) + "\n", "train_mutants");
      if (s.sampled.exhausted)
        log("warning: " + std::string(to_string(plan.op)) + " space has only " +
            std::to_string(s.space.values.size()) + " values; using all of them");
    }
    out.push_back(std::move(s));
  }
  return out;
}

void Pipeline::train_originals() {
  log("phase train_originals: " + std::to_string(cfg_.n) + " instances");
  run_jobs(static_cast<std::size_t>(cfg_.n), cfg_.workers, [&](std::size_t k) {
    const int i = static_cast<int>(k);
    const std::string dir = original_dir(i);
    if (have(dir + "/agent.json") && have(dir + "/training_log.jsonl")) return;
    const auto seed = derive_seed(cfg_.seed, SeedPhase::Train, std::nullopt, 0, i);
    TrainResult r = train(cfg_.env, cfg_.hp, seed);
    std::ostringstream log_text;
    write_training_log(log_text, r.log);
    store(dir + "/training_log.jsonl", log_text.str(), "train_originals");
    store(dir + "/agent.json", json(r.agent).dump() + "\n", "train_originals");
    log("  original " + std::to_string(i) + ": " + std::to_string(r.log.episodes.size()) +
        " episodes");
  });
  manifest_->complete_phase("train_originals");
}

void Pipeline::train_mutants() {
  const auto sampled = sampled_configs();
  struct Job {
    MutantSpec spec;
    int instance;
  };
  std::vector<Job> jobs;
  for (const Sampled& s : sampled)
    for (const MutantSpec& spec : s.sampled.specs)
      for (int i = 0; i < cfg_.n; ++i) jobs.push_back(Job{spec, i});
  log("phase train_mutants: " + std::to_string(jobs.size()) + " mutant instances");
  run_jobs(jobs.size(), cfg_.workers, [&](std::size_t k) {
    const Job& job = jobs[k];
    const std::string dir = mutant_dir(job.spec.op, job.spec.j, job.instance);
    if (have(dir + "/agent.json") && have(dir + "/training_log.jsonl")) return;
    const Hyperparameters hp = apply(job.spec, cfg_.hp);
    const auto seed =
        derive_seed(cfg_.seed, SeedPhase::Train, job.spec.op, job.spec.j, job.instance);
    TrainResult r = train(cfg_.env, hp, seed);
    std::ostringstream log_text;
    write_training_log(log_text, r.log);
    store(dir + "/training_log.jsonl", log_text.str(), "train_mutants");
    store(dir + "/agent.json", json(r.agent).dump() + "\n", "train_mutants");
    log("  mutant " + config_key(job.spec.op, job.spec.j) + " instance " +
        std::to_string(job.instance) + ": " + std::to_string(r.log.episodes.size()) +
        " episodes");
  });
  manifest_->complete_phase("train_mutants");
}

void Pipeline::replay() {
  const auto sampled = sampled_configs();
  log("phase replay");
  for (int i = 0; i < cfg_.n; ++i) {
    require(original_dir(i) + "/agent.json");
    require(original_dir(i) + "/training_log.jsonl");
  }
  for (const Sampled& s : sampled)
    for (const MutantSpec& spec : s.sampled.specs)
      for (int i = 0; i < cfg_.n; ++i) {
        require(mutant_dir(spec.op, spec.j, i) + "/agent.json");
        require(mutant_dir(spec.op, spec.j, i) + "/training_log.jsonl");
      }

  // Originals on a seeded subsample of their own training configurations.
  run_jobs(static_cast<std::size_t>(cfg_.n), cfg_.workers, [&](std::size_t k) {
    const int i = static_cast<int>(k);
    const std::string rel = original_dir(i) + "/replay.json";
    if (have(rel)) return;
    const auto trs = load_log(original_dir(i) + "/training_log.jsonl").trs();
    std::vector<std::size_t> idx(trs.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const std::size_t take = std::min(idx.size(), static_cast<std::size_t>(cfg_.replay_sample));
    Stream stream(derive_seed(cfg_.seed, SeedPhase::Replay, std::nullopt, 0, i));
    for (std::size_t t = 0; t < take; ++t)
      std::swap(idx[t], idx[t + stream.uniform_index(idx.size() - t)]);
    idx.resize(take);
    std::sort(idx.begin(), idx.end());
    std::vector<EnvConfig> configs;
    for (std::size_t t : idx) configs.push_back(trs[t]);
    const auto outcomes = evaluate(load_agent(original_dir(i) + "/agent.json"), cfg_.env, configs);
    const json j{{"indices", idx}, {"configs", configs}, {"outcomes", outcomes}};
    store(rel, j.dump() + "\n", "replay");
  });

  std::vector<std::vector<EnvConfig>> replay_configs(static_cast<std::size_t>(cfg_.n));
  std::vector<std::vector<EpisodeOutcome>> original_outcomes(static_cast<std::size_t>(cfg_.n));
  std::vector<std::vector<EnvConfig>> original_trs(static_cast<std::size_t>(cfg_.n));
  for (int i = 0; i < cfg_.n; ++i) {
    const json j = load_json(original_dir(i) + "/replay.json");
    replay_configs[i] = j.at("configs").get<std::vector<EnvConfig>>();
    original_outcomes[i] = j.at("outcomes").get<std::vector<EpisodeOutcome>>();
    original_trs[i] = load_log(original_dir(i) + "/training_log.jsonl").trs();
  }

  struct Job {
    MutantSpec spec;
    int instance;
  };
  std::vector<Job> jobs;
  for (const Sampled& s : sampled)
    for (const MutantSpec& spec : s.sampled.specs)
      for (int i = 0; i < cfg_.n; ++i) jobs.push_back(Job{spec, i});
  run_jobs(jobs.size(), cfg_.workers, [&](std::size_t k) {
    const Job& job = jobs[k];
    const std::string dir = mutant_dir(job.spec.op, job.spec.j, job.instance);
    if (have(dir + "/replay.json")) return;
    const auto outcomes =
        evaluate(load_agent(dir + "/agent.json"), cfg_.env, replay_configs[job.instance]);
    const auto mutant_trs = load_log(dir + "/training_log.jsonl").trs();
    const PairingCheck p = check_pairing(original_trs[job.instance], mutant_trs);
    const json j{{"outcomes", outcomes},
                 {"pairing",
                  {{"original_episodes", p.original_episodes},
                   {"mutant_episodes", p.mutant_episodes},
                   {"shared_prefix", p.shared_prefix},
                   {"mutant_is_prefix", p.mutant_is_prefix}}}};
    store(dir + "/replay.json", j.dump() + "\n", "replay");
  });

  json ops = json::array();
  MutationReport partial;
  for (const Sampled& s : sampled) {
    OperatorReport op;
    op.op = s.op;
    op.original = s.space.original;
    op.exhausted = s.sampled.exhausted;
    std::vector<ConfigVerdict> verdicts;
    int killable = 0;
    int trivial = 0;
    for (const MutantSpec& spec : s.sampled.specs) {
      std::vector<std::vector<EpisodeOutcome>> mutant_outcomes;
      ConfigReport c;
      c.spec = spec;
      for (int i = 0; i < cfg_.n; ++i) {
        const json j = load_json(mutant_dir(spec.op, spec.j, i) + "/replay.json");
        mutant_outcomes.push_back(j.at("outcomes").get<std::vector<EpisodeOutcome>>());
        const json& pj = j.at("pairing");
        c.pairing.push_back(PairingCheck{pj.at("original_episodes").get<std::size_t>(),
                                         pj.at("mutant_episodes").get<std::size_t>(),
                                         pj.at("shared_prefix").get<bool>(),
                                         pj.at("mutant_is_prefix").get<bool>()});
      }
      const ReplayAnalysis a = analyze_replay(original_outcomes, mutant_outcomes, cfg_.stats);
      c.replay = a.kill;
      c.killable = a.killable;
      if (a.triviality) c.trivial_ratio = a.triviality->ratio;
      c.trivial = a.trivial;
      killable += c.killable ? 1 : 0;
      trivial += c.trivial ? 1 : 0;
      verdicts.push_back(ConfigVerdict{spec, c.killable, c.trivial});
      op.configs.push_back(std::move(c));
    }
    const double count = static_cast<double>(op.configs.size());
    op.percent_killable = killable / count;
    op.percent_trivial = trivial / count;
    const Selection sel = select_representative(op.original, verdicts);
    op.status = sel.status;
    if (sel.representative) {
      op.representative = sel.representative->j;
      op.configs[static_cast<std::size_t>(sel.representative->j)].representative = true;
    }
    log("  " + std::string(to_string(op.op)) + ": killable " + std::to_string(killable) + "/" +
        std::to_string(op.configs.size()) + ", trivial " + std::to_string(trivial) + "/" +
        std::to_string(op.configs.size()) + ", " + std::string(to_string(op.status)) +
        (op.representative ? " j=" + std::to_string(*op.representative) : ""));
    partial.operators.push_back(std::move(op));
  }
  partial.env = cfg_.env;
  partial.algorithm = cfg_.algorithm;
  partial.n = cfg_.n;
  partial.seed = cfg_.seed;
  store("replay.json", report_to_json(partial).dump(2) + "\n", "replay");
  manifest_->complete_phase("replay");
}

MutationReport Pipeline::score() {
  log("phase score");
  MutationReport report = report_from_json(load_json("replay.json"));
  report.generators = {"weak", "strong"};
  if (cfg_.generators.random_count) report.generators.push_back("random");

  struct Rep {
    std::size_t op_index;
    MutantSpec spec;
  };
  std::vector<Rep> reps;
  for (std::size_t k = 0; k < report.operators.size(); ++k) {
    const OperatorReport& op = report.operators[k];
    if (op.representative)
      reps.push_back(Rep{k, op.configs[static_cast<std::size_t>(*op.representative)].spec});
  }

  std::vector<TrainedAgent> originals;
  for (int i = 0; i < cfg_.n; ++i) originals.push_back(load_agent(original_dir(i) + "/agent.json"));

  std::map<std::string, Suite> shared_suites;
  {
    const std::string rel = "suites/weak.json";
    if (!have(rel)) {
      Suite s;
      s.generator = GeneratorSpec::weak(cfg_.generators.weak_pool, cfg_.generators.weak_select,
                                        derive_seed(cfg_.seed, SeedPhase::Weak, std::nullopt, 0, 0));
      s.configs = weak_generator(s.generator, cfg_.env, originals);
      store(rel, json(s).dump(2) + "\n", "score");
    }
    shared_suites["weak"] = load_json(rel).get<Suite>();
  }
  if (cfg_.generators.random_count) {
    const std::string rel = "suites/random.json";
    if (!have(rel)) {
      Suite s;
      s.generator = GeneratorSpec::random(
          *cfg_.generators.random_count,
          derive_seed(cfg_.seed, SeedPhase::Random, std::nullopt, 0, 0));
      s.configs = random_generator(cfg_.env, s.generator.count, s.generator.seed);
      store(rel, json(s).dump(2) + "\n", "score");
    }
    shared_suites["random"] = load_json(rel).get<Suite>();
  }

  // One failure predictor and strong suite per representative configuration,
  // trained on the mutant instances' replay outcomes.
  run_jobs(reps.size(), cfg_.workers, [&](std::size_t k) {
    const MutantSpec& spec = reps[k].spec;
    const std::string key = config_key(spec.op, spec.j);
    const std::string suite_rel = "suites/strong/" + key + ".json";
    const std::string predictor_rel = "suites/predictors/" + key + ".json";
    if (have(suite_rel) && have(predictor_rel)) return;
    std::vector<std::pair<EnvConfig, EpisodeOutcome>> data;
    for (int i = 0; i < cfg_.n; ++i) {
      const auto configs = load_json(original_dir(i) + "/replay.json")
                               .at("configs")
                               .get<std::vector<EnvConfig>>();
      const auto outcomes = load_json(mutant_dir(spec.op, spec.j, i) + "/replay.json")
                                .at("outcomes")
                                .get<std::vector<EpisodeOutcome>>();
      for (std::size_t c = 0; c < configs.size(); ++c) data.emplace_back(configs[c], outcomes[c]);
    }
    const FailurePredictor predictor = train_failure_predictor(
        data, derive_seed(cfg_.seed, SeedPhase::Predictor, spec.op, spec.j, 0));
    Suite s;
    s.generator =
        GeneratorSpec::strong(cfg_.generators.strong_count, cfg_.generators.strong_candidates,
                              derive_seed(cfg_.seed, SeedPhase::Strong, spec.op, spec.j, 0));
    s.configs = strong_generator(s.generator, cfg_.env, predictor);
    store(predictor_rel, json(predictor).dump() + "\n", "score");
    store(suite_rel, json(s).dump(2) + "\n", "score");
    log("  predictor " + key + ": accuracy " + std::to_string(predictor.training_accuracy) +
        (predictor.degenerate ? " (degenerate)" : ""));
  });

  struct Job {
    std::size_t rep;
    std::size_t gen;
    int instance;
  };
  std::vector<Job> jobs;
  for (std::size_t r = 0; r < reps.size(); ++r)
    for (std::size_t g = 0; g < report.generators.size(); ++g)
      for (int i = 0; i < cfg_.n; ++i) jobs.push_back(Job{r, g, i});

  auto score_rel = [&](const Job& job) {
    const MutantSpec& spec = reps[job.rep].spec;
    return "scores/" + report.generators[job.gen] + "/" + config_key(spec.op, spec.j) + "/" +
           std::to_string(job.instance) + ".json";
  };

  std::map<std::string, Suite> strong_suites;
  for (const Rep& r : reps) {
    const std::string key = config_key(r.spec.op, r.spec.j);
    strong_suites[key] = load_json("suites/strong/" + key + ".json").get<Suite>();
  }

  run_jobs(jobs.size(), cfg_.workers, [&](std::size_t k) {
    const Job& job = jobs[k];
    const std::string rel = score_rel(job);
    if (have(rel)) return;
    const MutantSpec& spec = reps[job.rep].spec;
    const std::string& gen = report.generators[job.gen];
    const Suite& suite =
        gen == "strong" ? strong_suites.at(config_key(spec.op, spec.j)) : shared_suites.at(gen);
    const auto original = evaluate(originals[job.instance], cfg_.env, suite.configs);
    const auto mutant = evaluate(load_agent(mutant_dir(spec.op, spec.j, job.instance) + "/agent.json"),
                                 cfg_.env, suite.configs);
    const PairResult pair = evaluate_pair(make_table(original, mutant), cfg_.stats);
    Stream stream(hash_words(
        {derive_seed(cfg_.seed, SeedPhase::Bootstrap, spec.op, spec.j, job.instance), job.gen}));
    const ImprovementEstimate poi = probability_of_improvement(
        success_flags(original), success_flags(mutant), cfg_.stats, stream);
    const json j{{"pair", pair},
                 {"improvement", poi},
                 {"bootstrap_killed", bootstrap_killed(poi)},
                 {"original", success_flags(original)},
                 {"mutant", success_flags(mutant)}};
    store(rel, j.dump() + "\n", "score");
  });

  report.bootstrap_pairs = 0;
  report.bootstrap_agreements = 0;
  std::vector<std::vector<double>> per_gen_rates(report.generators.size());
  for (std::size_t r = 0; r < reps.size(); ++r) {
    OperatorReport& op = report.operators[reps[r].op_index];
    ConfigReport& c = op.configs[static_cast<std::size_t>(reps[r].spec.j)];
    for (std::size_t g = 0; g < report.generators.size(); ++g) {
      std::vector<PairResult> pairs;
      for (int i = 0; i < cfg_.n; ++i) {
        const json j = load_json(score_rel(Job{r, g, i}));
        pairs.push_back(j.at("pair").get<PairResult>());
        ++report.bootstrap_pairs;
        const bool fisher = pairs.back().verdict == PairVerdict::Killed;
        if (j.at("bootstrap_killed").get<bool>() == fisher) ++report.bootstrap_agreements;
      }
      const KillRecord rec = killing_rate(pairs, cfg_.stats);
      c.generators[report.generators[g]] = rec;
      op.scores[report.generators[g]] = rec.rate;
      per_gen_rates[g].push_back(rec.rate);
    }
    op.sensitivity = sensitivity(op.scores.at("weak"), op.scores.at("strong"));
  }

  report.empty_scope = reps.empty();
  report.mutation_score.clear();
  report.sensitivity.reset();
  if (!report.empty_scope) {
    for (std::size_t g = 0; g < report.generators.size(); ++g) {
      std::vector<std::vector<double>> rates;
      for (double r : per_gen_rates[g]) rates.push_back({r});
      report.mutation_score[report.generators[g]] = mutation_score(rates);
    }
    report.sensitivity =
        sensitivity(report.mutation_score.at("weak"), report.mutation_score.at("strong"));
    log("  MS weak " + std::to_string(report.mutation_score.at("weak")) + ", strong " +
        std::to_string(report.mutation_score.at("strong")) + ", sensitivity " +
        std::to_string(*report.sensitivity));
  } else {
    log("  no killable, non-trivial operator: mutation score undefined");
  }

  store("report.json", report_to_json(report).dump(2) + "\n", "score");
  store("report.csv", report_csv(report), "score");
  store("kills.csv", kills_csv(report), "score");
  manifest_->complete_phase("score");
  return report;
}

MutationReport Pipeline::run_all() {
  train_originals();
  train_mutants();
  replay();
  return score();
}

void phase_train_originals(const PipelineConfig& cfg) { Pipeline(cfg).train_originals(); }
void phase_train_mutants(const PipelineConfig& cfg) { Pipeline(cfg).train_mutants(); }
void phase_replay(const PipelineConfig& cfg) { Pipeline(cfg).replay(); }
MutationReport phase_score(const PipelineConfig& cfg) { return Pipeline(cfg).score(); }

}  // namespace rlmut
