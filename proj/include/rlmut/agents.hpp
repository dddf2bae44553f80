#ifndef RLMUT_AGENTS_HPP_
#define RLMUT_AGENTS_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rlmut/envs.hpp"
#include "rlmut/nn.hpp"
#include "rlmut/rng.hpp"

namespace rlmut {

enum class Algorithm { DQN, A2C };

std::string_view to_string(Algorithm algorithm);
Algorithm algorithm_from_string(std::string_view name);

enum class TargetUpdateMode { Hard, Polyak };

// Every knob a mutation operator can reach, plus the ones it cannot.
struct Hyperparameters {
  Algorithm algorithm = Algorithm::DQN;
  double gamma = 0.99;
  std::int64_t total_steps = 60000;
  double learning_rate = 1e-3;
  std::vector<int> hidden = {64, 64};
  double max_grad_norm = 10.0;

  // DQN
  std::int64_t replay_capacity = 10000;
  int batch_size = 64;
  std::int64_t learning_starts = 1000;
  // One gradient step every train_freq environment steps.
  int train_freq = 1;
  TargetUpdateMode target_update_mode = TargetUpdateMode::Hard;
  std::int64_t target_update_interval = 500;
  double tau = 1.0;
  double epsilon_initial = 1.0;
  double epsilon_final = 0.05;
  double epsilon_decay_fraction = 0.1;

  // A2C
  int n_steps = 32;
  double entropy_coef = 0.01;
  double value_coef = 0.5;

  static Hyperparameters defaults(Algorithm algorithm);

  friend bool operator==(const Hyperparameters&, const Hyperparameters&) = default;
};

// Throws ValidationError naming the offending field.
void validate(const Hyperparameters& hp);

void to_json(nlohmann::json& j, const Hyperparameters& hp);
// Missing keys take the algorithm's defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, Hyperparameters& hp);

struct TrainedAgent {
  EnvKind env = EnvKind::CartPole;
  Hyperparameters hp;
  // Q-network for DQN, policy (logits) network for A2C.
  nn::Network network;
  // A2C state-value network; absent for DQN.
  std::optional<nn::Network> critic;
  std::uint64_t seed = 0;
  std::int64_t steps_consumed = 0;

  std::uint64_t checksum() const;
};

void to_json(nlohmann::json& j, const TrainedAgent& agent);
void from_json(const nlohmann::json& j, TrainedAgent& agent);

struct EpisodeRecord {
  EnvConfig config;
  EpisodeOutcome outcome;
  // The step budget ran out mid-episode.
  bool truncated = false;

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

struct TrainingLog {
  std::uint64_t seed = 0;
  std::vector<EpisodeRecord> episodes;

  // Episode-initial configurations in training order.
  std::vector<EnvConfig> trs() const;
};

// One JSON object per line, one line per episode.
void write_training_log(std::ostream& out, const TrainingLog& log);
TrainingLog read_training_log(std::istream& in);

struct TrainResult {
  TrainedAgent agent;
  TrainingLog log;
};

// Consumes exactly hp.total_steps environment steps; an episode still running
// when the budget expires is truncated. Throws DivergenceError on NaN.
TrainResult train(EnvKind kind, const Hyperparameters& hp, std::uint64_t seed);

enum class ActionMode { Deterministic, Stochastic };

// Deterministic mode takes the argmax (ties to the lowest index). Stochastic
// mode samples the A2C policy and is rejected for DQN.
int act(const TrainedAgent& agent, std::span<const double> observation, ActionMode mode,
        Stream* stream = nullptr);

std::vector<EpisodeOutcome> evaluate(const TrainedAgent& agent, EnvKind kind,
                                     std::span<const EnvConfig> configs);

// Lowest index among the maxima.
int argmax(std::span<const double> values);

}  // namespace rlmut

#endif  // RLMUT_AGENTS_HPP_
