#ifndef RLMUT_PIPELINE_HPP_
#define RLMUT_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rlmut/agents.hpp"
#include "rlmut/envs.hpp"
#include "rlmut/mutation.hpp"
#include "rlmut/stats.hpp"
#include "rlmut/testgen.hpp"

namespace rlmut {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr int kReportSchemaVersion = 1;

struct OperatorPlan {
  OperatorId op = OperatorId::SDF;
  int configs = 5;
  // Explicit mutation space in the target field's units; default grid if empty.
  std::vector<double> space;

  friend bool operator==(const OperatorPlan&, const OperatorPlan&) = default;
};

struct GeneratorPlan {
  int weak_pool = 200;
  int weak_select = 50;
  int strong_count = 100;
  int strong_candidates = 500;
  // A random suite of this size is scored too when set.
  std::optional<int> random_count;

  friend bool operator==(const GeneratorPlan&, const GeneratorPlan&) = default;
};

struct PipelineConfig {
  EnvKind env = EnvKind::CartPole;
  Algorithm algorithm = Algorithm::DQN;
  int n = 10;
  Hyperparameters hp;
  std::vector<OperatorPlan> operators;
  GeneratorPlan generators;
  StatsConfig stats;
  // TRS configs replayed per original instance.
  int replay_sample = 100;
  std::uint64_t seed = 0;
  std::string artifacts = "artifacts";
  int workers = 1;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

// Every applicable operator with five configurations.
PipelineConfig default_config(EnvKind env, Algorithm algorithm);

// Throws ValidationError prefixed with the offending field path.
void validate(const PipelineConfig& cfg);

nlohmann::json config_to_json(const PipelineConfig& cfg);
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);

// Checksum of everything that can influence results (not workers or paths).
std::string config_checksum(const PipelineConfig& cfg);

enum class SeedPhase : std::uint64_t {
  Train = 1,
  Sample = 2,
  Replay = 3,
  Weak = 4,
  Strong = 5,
  Predictor = 6,
  Random = 7,
  Bootstrap = 8,
};

// Training seeds depend on the instance alone, so instance i of every mutant
// shares the seed of original i. Other phases mix in every component.
std::uint64_t derive_seed(std::uint64_t root, SeedPhase phase, std::optional<OperatorId> op,
                          int j, int instance);

// Runs job(0..count-1) on up to `workers` threads. Rethrows the exception of
// the lowest failing job index after all threads stop.
void run_jobs(std::size_t count, int workers, const std::function<void(std::size_t)>& job);

struct ReplayAnalysis {
  KillRecord kill;
  std::optional<TrivialityResult> triviality;
  bool killable = false;
  bool trivial = false;
};

// Kill and triviality analysis of one mutant configuration from per-instance
// outcomes on shared configs (original i and mutant i on the same list).
ReplayAnalysis analyze_replay(std::span<const std::vector<EpisodeOutcome>> originals,
                              std::span<const std::vector<EpisodeOutcome>> mutants,
                              const StatsConfig& cfg);

ContingencyTable make_table(std::span<const EpisodeOutcome> original,
                            std::span<const EpisodeOutcome> mutant);

struct PairingCheck {
  std::size_t original_episodes = 0;
  std::size_t mutant_episodes = 0;
  // The shorter sequence is a prefix of the longer one.
  bool shared_prefix = false;
  // The mutant's sequence is a prefix of the original's.
  bool mutant_is_prefix = false;
};

PairingCheck check_pairing(std::span<const EnvConfig> original_trs,
                           std::span<const EnvConfig> mutant_trs);

struct ConfigReport {
  MutantSpec spec;
  KillRecord replay;
  bool killable = false;
  std::optional<double> trivial_ratio;
  bool trivial = false;
  bool representative = false;
  // Generator name -> kill record on that generator's suite.
  std::map<std::string, KillRecord> generators;
  std::vector<PairingCheck> pairing;
};

struct OperatorReport {
  OperatorId op = OperatorId::SDF;
  double original = 0.0;
  bool exhausted = false;
  std::vector<ConfigReport> configs;
  // Shares of sampled configs, in [0, 1].
  double percent_killable = 0.0;
  double percent_trivial = 0.0;
  SelectionStatus status = SelectionStatus::LikelyEquivalent;
  std::optional<int> representative;
  // Killing rate of the representative per generator.
  std::map<std::string, double> scores;
  std::optional<double> sensitivity;
};

struct MutationReport {
  EnvKind env = EnvKind::CartPole;
  Algorithm algorithm = Algorithm::DQN;
  int n = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> generators;
  std::vector<OperatorReport> operators;
  // No operator has a representative; scores and sensitivity are absent.
  bool empty_scope = true;
  std::map<std::string, double> mutation_score;
  std::optional<double> sensitivity;
  std::size_t bootstrap_pairs = 0;
  std::size_t bootstrap_agreements = 0;
};

nlohmann::json report_to_json(const MutationReport& report);
MutationReport report_from_json(const nlohmann::json& j);
MutationReport load_report(const std::filesystem::path& path);

// Mutation score recomputed from the stored per-operator killing rates.
std::optional<double> recompute_mutation_score(const MutationReport& report,
                                               const std::string& generator);

// One row per (operator, config, generator); the replay on training
// configurations appears as generator "trs".
std::string report_csv(const MutationReport& report);
// One row per (operator, config, generator, instance).
std::string kills_csv(const MutationReport& report);

// Grouped Weak/Strong bars and sensitivity bars. Returns the files written;
// none when the report has an empty scope.
std::vector<std::filesystem::path> emit_plots(const MutationReport& report,
                                              const std::filesystem::path& dir);

// Writes `text` to `path` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

class Manifest;

class Pipeline {
 public:
  using Logger = std::function<void(const std::string&)>;

  explicit Pipeline(PipelineConfig cfg, Logger log = {});
  ~Pipeline();

  Pipeline(const Pipeline&) = delete;
  Pipeline& operator=(const Pipeline&) = delete;

  void train_originals();
  void train_mutants();
  void replay();
  MutationReport score();
  MutationReport run_all();

  const PipelineConfig& config() const { return cfg_; }
  const std::filesystem::path& root() const { return root_; }

 private:
  struct Sampled;

  void log(const std::string& line) const;
  std::vector<Sampled> sampled_configs();
  TrainedAgent load_agent(const std::string& rel) const;
  TrainingLog load_log(const std::string& rel) const;
  nlohmann::json load_json(const std::string& rel) const;
  void store(const std::string& rel, const std::string& text, const std::string& phase);
  bool have(const std::string& rel) const;
  void require(const std::string& rel) const;

  PipelineConfig cfg_;
  std::filesystem::path root_;
  Logger log_;
  std::unique_ptr<Manifest> manifest_;
};

// Single-phase entry points over a fresh Pipeline.
void phase_train_originals(const PipelineConfig& cfg);
void phase_train_mutants(const PipelineConfig& cfg);
void phase_replay(const PipelineConfig& cfg);
MutationReport phase_score(const PipelineConfig& cfg);

}  // namespace rlmut

#endif  // RLMUT_PIPELINE_HPP_
