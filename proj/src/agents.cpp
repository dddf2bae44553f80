#include "rlmut/agents.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <string>

#include "rlmut/checksum.hpp"
#include "rlmut/error.hpp"

namespace rlmut {

namespace {

using nn::Matrix;

// Stream keys derived from the training seed.
enum StreamKey : std::uint64_t {
  kConfigStream = 1,
  kInitStream = 2,
  kActionStream = 3,
  kReplayStream = 4,
  kCriticInitStream = 5,
};

std::uint64_t stream_seed(std::uint64_t seed, StreamKey key) {
  return hash_words({seed, key});
}

// Episode ends that should still bootstrap: hitting the cap without a
// threshold violation.
bool ended_by_time_limit(EnvKind kind, const State& s) {
  if (!s.terminal) return false;
  if (kind == EnvKind::CartPole) return s.terminal_reason == TerminalReason::Success;
  const int row = static_cast<int>(s.observation[0]);
  const int col = static_cast<int>(s.observation[1]);
  return s.terminal_reason == TerminalReason::Failure && !grid_bridge::is_hazard(row, col);
}

std::vector<int> layer_sizes_for(EnvKind kind, const Hyperparameters& hp) {
  std::vector<int> sizes;
  sizes.push_back(static_cast<int>(observation_width(kind)));
  sizes.insert(sizes.end(), hp.hidden.begin(), hp.hidden.end());
  sizes.push_back(action_count(kind));
  return sizes;
}

struct EpisodeTracker {
  EnvKind kind;
  EnvConfig config;
  State state;
  EpisodeOutcome outcome;

  void start(const EnvConfig& c) {
    config = c;
    state = reset(kind, c);
    outcome = EpisodeOutcome{};
    outcome.min_qoc = qoc_step(kind, state);
  }

  void advance(StepResult&& next) {
    outcome.return_sum += next.reward;
    state = std::move(next.state);
    outcome.min_qoc = std::min(outcome.min_qoc, qoc_step(kind, state));
    outcome.length = state.step_count;
    outcome.success = state.terminal_reason == TerminalReason::Success;
  }

  EpisodeRecord record(bool truncated) const {
    return EpisodeRecord{config, outcome, truncated};
  }
};

class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t obs_dim)
      : obs_(obs_dim, capacity),
        next_obs_(obs_dim, capacity),
        actions_(capacity),
        rewards_(capacity),
        dones_(capacity) {}

  void add(std::span<const double> obs, int action, double reward,
           std::span<const double> next_obs, bool done) {
    for (std::size_t d = 0; d < obs.size(); ++d) {
      obs_(d, head_) = obs[d];
      next_obs_(d, head_) = next_obs[d];
    }
    actions_[head_] = action;
    rewards_[head_] = reward;
    dones_[head_] = done ? 1.0 : 0.0;
    head_ = (head_ + 1) % capacity();
    size_ = std::min(size_ + 1, capacity());
  }

  std::size_t capacity() const { return actions_.size(); }
  std::size_t size() const { return size_; }

  void sample(Stream& stream, std::size_t batch, Matrix& obs, Matrix& next_obs,
              std::vector<int>& actions, std::vector<double>& rewards,
              std::vector<double>& dones) const {
    obs.resize(obs_.rows(), static_cast<Eigen::Index>(batch));
    next_obs.resize(obs_.rows(), static_cast<Eigen::Index>(batch));
    actions.resize(batch);
    rewards.resize(batch);
    dones.resize(batch);
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t i = stream.uniform_index(size_);
      obs.col(static_cast<Eigen::Index>(b)) = obs_.col(static_cast<Eigen::Index>(i));
      next_obs.col(static_cast<Eigen::Index>(b)) = next_obs_.col(static_cast<Eigen::Index>(i));
      actions[b] = actions_[i];
      rewards[b] = rewards_[i];
      dones[b] = dones_[i];
    }
  }

 private:
  Matrix obs_;
  Matrix next_obs_;
  std::vector<int> actions_;
  std::vector<double> rewards_;
  std::vector<double> dones_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
};

double epsilon_at(const Hyperparameters& hp, std::int64_t t) {
  const double decay_steps = hp.epsilon_decay_fraction * static_cast<double>(hp.total_steps);
  const double progress =
      decay_steps <= 0.0 ? 1.0 : std::min(1.0, static_cast<double>(t) / decay_steps);
  return hp.epsilon_initial + (hp.epsilon_final - hp.epsilon_initial) * progress;
}

TrainResult train_dqn(EnvKind kind, const Hyperparameters& hp, std::uint64_t seed) {
  Stream config_stream(stream_seed(seed, kConfigStream));
  Stream action_stream(stream_seed(seed, kActionStream));
  Stream replay_stream(stream_seed(seed, kReplayStream));

  TrainResult result;
  result.log.seed = seed;
  TrainedAgent& agent = result.agent;
  agent.env = kind;
  agent.hp = hp;
  agent.seed = seed;
  agent.network = nn::Network::init(layer_sizes_for(kind, hp), stream_seed(seed, kInitStream));
  nn::Network target = agent.network;
  nn::Optimizer optimizer(
      nn::OptimizerConfig{.kind = nn::OptimizerKind::Adam,
                          .learning_rate = hp.learning_rate,
                          .max_grad_norm = hp.max_grad_norm},
      agent.network);

  const int actions = action_count(kind);
  ReplayBuffer buffer(static_cast<std::size_t>(hp.replay_capacity), observation_width(kind));
  Matrix batch_obs, batch_next;
  std::vector<int> batch_actions;
  std::vector<double> batch_rewards, batch_dones;
  nn::SelectedMseLoss loss;

  EpisodeTracker episode{kind, {}, {}, {}};
  episode.start(sample_config(kind, config_stream));

  for (std::int64_t t = 0; t < hp.total_steps; ++t) {
    const double eps = epsilon_at(hp, t);
    int action;
    if (action_stream.uniform01() < eps) {
      action = static_cast<int>(action_stream.uniform_index(static_cast<std::size_t>(actions)));
    } else {
      action = argmax(agent.network.forward(episode.state.observation));
    }

    const std::vector<double> obs = episode.state.observation;
    StepResult next = step(kind, episode.state, action);
    const bool done = next.state.terminal && !ended_by_time_limit(kind, next.state);
    buffer.add(obs, action, next.reward, next.state.observation, done);
    episode.advance(std::move(next));

    const std::int64_t steps_done = t + 1;
    if (steps_done > hp.learning_starts && steps_done % hp.train_freq == 0) {
      buffer.sample(replay_stream, static_cast<std::size_t>(hp.batch_size), batch_obs,
                    batch_next, batch_actions, batch_rewards, batch_dones);
      const Matrix next_q = target.forward_batch(batch_next);
      loss.selected = batch_actions;
      loss.targets.resize(batch_rewards.size());
      for (std::size_t b = 0; b < batch_rewards.size(); ++b) {
        const double best = next_q.col(static_cast<Eigen::Index>(b)).maxCoeff();
        loss.targets[b] = batch_rewards[b] + hp.gamma * (1.0 - batch_dones[b]) * best;
      }
      try {
        nn::backprop_step(agent.network, optimizer, batch_obs, loss);
      } catch (const NumericalError& e) {
        throw DivergenceError(std::string("DQN diverged: ") + e.what(), t);
      }
      if (hp.target_update_mode == TargetUpdateMode::Polyak)
        target.polyak_update(agent.network, hp.tau);
    }
    if (hp.target_update_mode == TargetUpdateMode::Hard &&
        steps_done % hp.target_update_interval == 0) {
      target = agent.network;
    }

    if (episode.state.terminal) {
      result.log.episodes.push_back(episode.record(false));
      if (steps_done < hp.total_steps) episode.start(sample_config(kind, config_stream));
    }
  }
  if (!episode.state.terminal) result.log.episodes.push_back(episode.record(true));
  agent.steps_consumed = hp.total_steps;
  return result;
}

struct Transition {
  std::vector<double> obs;
  int action;
  double reward;
  std::vector<double> next_obs;
  bool terminal;     // true end, no bootstrap
  bool time_limit;   // episode ended at the cap, bootstrap from next_obs
};

int sample_from(std::span<const double> probs, Stream& stream) {
  const double u = stream.uniform01();
  double cumulative = 0.0;
  int last_positive = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] > 0.0) last_positive = static_cast<int>(k);
    cumulative += probs[k];
    if (u < cumulative) return static_cast<int>(k);
  }
  return last_positive;
}

TrainResult train_a2c(EnvKind kind, const Hyperparameters& hp, std::uint64_t seed) {
  Stream config_stream(stream_seed(seed, kConfigStream));
  Stream action_stream(stream_seed(seed, kActionStream));

  TrainResult result;
  result.log.seed = seed;
  TrainedAgent& agent = result.agent;
  agent.env = kind;
  agent.hp = hp;
  agent.seed = seed;
  agent.network = nn::Network::init(layer_sizes_for(kind, hp), stream_seed(seed, kInitStream));
  std::vector<int> critic_sizes = layer_sizes_for(kind, hp);
  critic_sizes.back() = 1;
  agent.critic = nn::Network::init(critic_sizes, stream_seed(seed, kCriticInitStream));
  nn::Network& actor = agent.network;
  nn::Network& critic = *agent.critic;
  const nn::OptimizerConfig opt_config{.kind = nn::OptimizerKind::Adam,
                                       .learning_rate = hp.learning_rate,
                                       .max_grad_norm = hp.max_grad_norm};
  nn::Optimizer actor_opt(opt_config, actor);
  nn::Optimizer critic_opt(opt_config, critic);

  const int actions = action_count(kind);
  const auto obs_dim = static_cast<Eigen::Index>(observation_width(kind));
  auto value_of = [&](std::span<const double> obs) { return critic.forward(obs)[0]; };

  std::vector<Transition> rollout;
  rollout.reserve(static_cast<std::size_t>(hp.n_steps));
  EpisodeTracker episode{kind, {}, {}, {}};
  episode.start(sample_config(kind, config_stream));

  nn::Gradients actor_grads, critic_grads;
  auto update = [&](std::int64_t t) {
    const std::size_t n = rollout.size();
    std::vector<double> returns(n);
    double running = 0.0;
    for (std::size_t k = n; k-- > 0;) {
      const Transition& tr = rollout[k];
      if (tr.terminal) {
        running = tr.reward;
      } else if (tr.time_limit || k + 1 == n) {
        running = tr.reward + hp.gamma * value_of(tr.next_obs);
      } else {
        running = tr.reward + hp.gamma * running;
      }
      returns[k] = running;
    }
    Matrix inputs(obs_dim, static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k)
      for (Eigen::Index d = 0; d < obs_dim; ++d)
        inputs(d, static_cast<Eigen::Index>(k)) = rollout[k].obs[static_cast<std::size_t>(d)];
    Matrix outputs(actions + 1, static_cast<Eigen::Index>(n));
    outputs.topRows(actions) = actor.forward_batch(inputs);
    outputs.bottomRows(1) = critic.forward_batch(inputs);

    nn::ActorCriticLoss loss;
    loss.value_coef = hp.value_coef;
    loss.entropy_coef = hp.entropy_coef;
    loss.returns = returns;
    for (std::size_t k = 0; k < n; ++k) {
      loss.actions.push_back(rollout[k].action);
      loss.advantages.push_back(returns[k] - outputs(actions, static_cast<Eigen::Index>(k)));
    }
    Matrix output_grad;
    const double value = nn::evaluate_loss(loss, outputs, &output_grad);
    try {
      if (!std::isfinite(value)) throw NumericalError("non-finite loss");
      nn::backward(actor, inputs, output_grad.topRows(actions), actor_grads);
      nn::backward(critic, inputs, output_grad.bottomRows(1), critic_grads);
      nn::check_finite(actor_grads);
      nn::check_finite(critic_grads);
    } catch (const NumericalError& e) {
      throw DivergenceError(std::string("A2C diverged: ") + e.what(), t);
    }
    actor_opt.apply(actor, actor_grads);
    critic_opt.apply(critic, critic_grads);
    rollout.clear();
  };

  for (std::int64_t t = 0; t < hp.total_steps; ++t) {
    const std::vector<double> logits = actor.forward(episode.state.observation);
    const std::vector<double> probs = nn::softmax(logits);
    for (double p : probs)
      if (!std::isfinite(p)) throw DivergenceError("A2C produced a non-finite policy", t);
    const int action = sample_from(probs, action_stream);

    std::vector<double> obs = episode.state.observation;
    StepResult next = step(kind, episode.state, action);
    const bool time_limit = ended_by_time_limit(kind, next.state);
    rollout.push_back(Transition{std::move(obs), action, next.reward, next.state.observation,
                                 next.state.terminal && !time_limit, time_limit});
    episode.advance(std::move(next));

    const std::int64_t steps_done = t + 1;
    if (static_cast<int>(rollout.size()) == hp.n_steps || steps_done == hp.total_steps)
      update(t);

    if (episode.state.terminal) {
      result.log.episodes.push_back(episode.record(false));
      if (steps_done < hp.total_steps) episode.start(sample_config(kind, config_stream));
    }
  }
  if (!episode.state.terminal) result.log.episodes.push_back(episode.record(true));
  agent.steps_consumed = hp.total_steps;
  return result;
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ValidationError(std::string("hyperparameters/") + key + ": wrong type");
    }
  }
}

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  return algorithm == Algorithm::DQN ? "DQN" : "A2C";
}

Algorithm algorithm_from_string(std::string_view name) {
  if (name == "DQN") return Algorithm::DQN;
  if (name == "A2C") return Algorithm::A2C;
  throw ValidationError("unknown algorithm '" + std::string(name) + "'");
}

Hyperparameters Hyperparameters::defaults(Algorithm algorithm) {
  Hyperparameters hp;
  hp.algorithm = algorithm;
  if (algorithm == Algorithm::A2C) {
    hp.total_steps = 120000;
    hp.learning_rate = 1e-4;
    hp.max_grad_norm = 0.5;
  }
  return hp;
}

void validate(const Hyperparameters& hp) {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ValidationError("hyperparameters/" + field + ": " + why);
  };
  if (!(hp.gamma > 0.0 && hp.gamma <= 1.0)) fail("gamma", "must lie in (0, 1]");
  if (hp.total_steps <= 0) fail("total_steps", "must be positive");
  if (!(hp.learning_rate > 0.0) || !std::isfinite(hp.learning_rate))
    fail("learning_rate", "must be positive");
  for (int h : hp.hidden)
    if (h <= 0) fail("hidden", "layer sizes must be positive");
  if (!(hp.max_grad_norm >= 0.0)) fail("max_grad_norm", "must be non-negative");

  if (hp.algorithm == Algorithm::DQN) {
    if (hp.replay_capacity <= 0) fail("replay_capacity", "must be positive");
    if (hp.batch_size <= 0) fail("batch_size", "must be positive");
    if (hp.train_freq <= 0) fail("train_freq", "must be positive");
    if (hp.learning_starts < 0) fail("learning_starts", "must be non-negative");
    if (hp.learning_starts >= hp.total_steps)
      fail("learning_starts", "must be smaller than total_steps");
    if (hp.target_update_interval <= 0) fail("target_update_interval", "must be positive");
    if (!(hp.tau > 0.0 && hp.tau <= 1.0)) fail("tau", "must lie in (0, 1]");
    if (!(hp.epsilon_initial >= 0.0 && hp.epsilon_initial <= 1.0))
      fail("epsilon_initial", "must lie in [0, 1]");
    if (!(hp.epsilon_final >= 0.0 && hp.epsilon_final <= 1.0))
      fail("epsilon_final", "must lie in [0, 1]");
    if (hp.epsilon_final > hp.epsilon_initial)
      fail("epsilon_final", "must not exceed epsilon_initial");
    if (!(hp.epsilon_decay_fraction >= 0.0 && hp.epsilon_decay_fraction <= 1.0))
      fail("epsilon_decay_fraction", "must lie in [0, 1]");
  } else {
    if (hp.n_steps <= 0) fail("n_steps", "must be positive");
    if (!(hp.entropy_coef >= 0.0) || !std::isfinite(hp.entropy_coef))
      fail("entropy_coef", "must be non-negative");
    if (!(hp.value_coef > 0.0) || !std::isfinite(hp.value_coef))
      fail("value_coef", "must be positive");
  }
}

void to_json(nlohmann::json& j, const Hyperparameters& hp) {
  j = nlohmann::json{
      {"algorithm", to_string(hp.algorithm)},
      {"gamma", hp.gamma},
      {"total_steps", hp.total_steps},
      {"learning_rate", hp.learning_rate},
      {"hidden", hp.hidden},
      {"max_grad_norm", hp.max_grad_norm},
  };
  if (hp.algorithm == Algorithm::DQN) {
    j["replay_capacity"] = hp.replay_capacity;
    j["batch_size"] = hp.batch_size;
    j["learning_starts"] = hp.learning_starts;
    j["train_freq"] = hp.train_freq;
    j["target_update_mode"] = hp.target_update_mode == TargetUpdateMode::Hard ? "hard" : "polyak";
    j["target_update_interval"] = hp.target_update_interval;
    j["tau"] = hp.tau;
    j["epsilon_initial"] = hp.epsilon_initial;
    j["epsilon_final"] = hp.epsilon_final;
    j["epsilon_decay_fraction"] = hp.epsilon_decay_fraction;
  } else {
    j["n_steps"] = hp.n_steps;
    j["entropy_coef"] = hp.entropy_coef;
    j["value_coef"] = hp.value_coef;
  }
}

void from_json(const nlohmann::json& j, Hyperparameters& hp) {
  if (!j.is_object()) throw ValidationError("hyperparameters: must be an object");
  Algorithm algorithm = hp.algorithm;
  if (j.contains("algorithm")) {
    if (!j.at("algorithm").is_string())
      throw ValidationError("hyperparameters/algorithm: must be a string");
    algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
  }
  hp = Hyperparameters::defaults(algorithm);

  static const std::set<std::string> common = {"algorithm", "gamma", "total_steps",
                                               "learning_rate", "hidden", "max_grad_norm"};
  static const std::set<std::string> dqn = {
      "replay_capacity", "batch_size", "learning_starts", "train_freq", "target_update_mode",
      "target_update_interval", "tau", "epsilon_initial", "epsilon_final",
      "epsilon_decay_fraction"};
  static const std::set<std::string> a2c = {"n_steps", "entropy_coef", "value_coef"};
  for (const auto& [key, value] : j.items()) {
    const bool known = common.contains(key) ||
                       (algorithm == Algorithm::DQN ? dqn.contains(key) : a2c.contains(key));
    if (!known)
      throw ValidationError("hyperparameters/" + key + ": unknown field for " +
                            std::string(to_string(algorithm)));
  }

  read_field(j, "gamma", hp.gamma);
  read_field(j, "total_steps", hp.total_steps);
  read_field(j, "learning_rate", hp.learning_rate);
  read_field(j, "hidden", hp.hidden);
  read_field(j, "max_grad_norm", hp.max_grad_norm);
  read_field(j, "replay_capacity", hp.replay_capacity);
  read_field(j, "batch_size", hp.batch_size);
  read_field(j, "learning_starts", hp.learning_starts);
  read_field(j, "train_freq", hp.train_freq);
  if (j.contains("target_update_mode")) {
    std::string mode;
    read_field(j, "target_update_mode", mode);
    if (mode == "hard") {
      hp.target_update_mode = TargetUpdateMode::Hard;
    } else if (mode == "polyak") {
      hp.target_update_mode = TargetUpdateMode::Polyak;
    } else {
      throw ValidationError("hyperparameters/target_update_mode: expected 'hard' or 'polyak'");
    }
  }
  read_field(j, "target_update_interval", hp.target_update_interval);
  read_field(j, "tau", hp.tau);
  read_field(j, "epsilon_initial", hp.epsilon_initial);
  read_field(j, "epsilon_final", hp.epsilon_final);
  read_field(j, "epsilon_decay_fraction", hp.epsilon_decay_fraction);
  read_field(j, "n_steps", hp.n_steps);
  read_field(j, "entropy_coef", hp.entropy_coef);
  read_field(j, "value_coef", hp.value_coef);
}

std::uint64_t TrainedAgent::checksum() const {
  Fnv1a h;
  h.update(to_string(env));
  h.update(nlohmann::json(hp).dump());
  h.update_value(network.checksum());
  if (critic) h.update_value(critic->checksum());
  h.update_value(seed);
  h.update_value(steps_consumed);
  return h.digest();
}

void to_json(nlohmann::json& j, const TrainedAgent& agent) {
  j = nlohmann::json{{"env", to_string(agent.env)},
                     {"hyperparameters", agent.hp},
                     {"network", agent.network},
                     {"seed", agent.seed},
                     {"steps_consumed", agent.steps_consumed}};
  if (agent.critic) j["critic"] = *agent.critic;
}

void from_json(const nlohmann::json& j, TrainedAgent& agent) {
  agent.env = env_kind_from_string(j.at("env").get<std::string>());
  agent.hp = j.at("hyperparameters").get<Hyperparameters>();
  agent.network = j.at("network").get<nn::Network>();
  agent.seed = j.at("seed").get<std::uint64_t>();
  agent.steps_consumed = j.at("steps_consumed").get<std::int64_t>();
  if (j.contains("critic")) {
    agent.critic = j.at("critic").get<nn::Network>();
  } else {
    agent.critic.reset();
  }
}

std::vector<EnvConfig> TrainingLog::trs() const {
  std::vector<EnvConfig> out;
  out.reserve(episodes.size());
  for (const auto& e : episodes) out.push_back(e.config);
  return out;
}

void write_training_log(std::ostream& out, const TrainingLog& log) {
  for (std::size_t i = 0; i < log.episodes.size(); ++i) {
    const EpisodeRecord& e = log.episodes[i];
    nlohmann::json line = e.outcome;
    line["episode"] = i;
    line["seed"] = log.seed;
    line["config"] = e.config;
    line["truncated"] = e.truncated;
    out << line.dump() << '\n';
  }
}

TrainingLog read_training_log(std::istream& in) {
  TrainingLog log;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    if (first) {
      log.seed = j.at("seed").get<std::uint64_t>();
      first = false;
    }
    EpisodeRecord e;
    e.outcome = j.get<EpisodeOutcome>();
    e.config = j.at("config").get<EnvConfig>();
    e.truncated = j.at("truncated").get<bool>();
    log.episodes.push_back(std::move(e));
  }
  return log;
}

TrainResult train(EnvKind kind, const Hyperparameters& hp, std::uint64_t seed) {
  validate(hp);
  return hp.algorithm == Algorithm::DQN ? train_dqn(kind, hp, seed) : train_a2c(kind, hp, seed);
}

int argmax(std::span<const double> values) {
  if (values.empty()) throw ValidationError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return static_cast<int>(best);
}

int act(const TrainedAgent& agent, std::span<const double> observation, ActionMode mode,
        Stream* stream) {
  const std::vector<double> out = agent.network.forward(observation);
  if (agent.hp.algorithm == Algorithm::DQN) {
    if (mode == ActionMode::Stochastic)
      throw ContractError("stochastic action selection is not supported for DQN");
    return argmax(out);
  }
  const std::vector<double> probs = nn::softmax(out);
  if (mode == ActionMode::Deterministic) return argmax(probs);
  if (stream == nullptr) throw ContractError("stochastic action selection needs a stream");
  return sample_from(probs, *stream);
}

std::vector<EpisodeOutcome> evaluate(const TrainedAgent& agent, EnvKind kind,
                                     std::span<const EnvConfig> configs) {
  if (configs.empty()) throw ValidationError("evaluate needs at least one config");
  if (kind != agent.env)
    throw ValidationError("agent was trained on " + std::string(to_string(agent.env)));
  const Policy policy = [&agent](std::span<const double> obs) {
    return act(agent, obs, ActionMode::Deterministic);
  };
  std::vector<EpisodeOutcome> out;
  out.reserve(configs.size());
  for (const EnvConfig& c : configs) out.push_back(run_episode(kind, c, policy));
  return out;
}

}  // namespace rlmut
