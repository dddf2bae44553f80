#include "rlmut/envs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "rlmut/error.hpp"

namespace rlmut {

namespace {

int max_hazard_distance() {
  using namespace grid_bridge;
  int best = 0;
  for (int r = 0; r < kRows; ++r) {
    for (int c = 0; c < kCols; ++c) {
      if (is_hazard(r, c)) continue;
      int nearest = std::numeric_limits<int>::max();
      for (int hr = 0; hr < kRows; ++hr)
        for (int hc = 0; hc < kCols; ++hc)
          if (is_hazard(hr, hc))
            nearest = std::min(nearest, std::abs(hr - r) + std::abs(hc - c));
      best = std::max(best, nearest);
    }
  }
  return best;
}

int hazard_distance(int row, int col) {
  using namespace grid_bridge;
  int nearest = std::numeric_limits<int>::max();
  for (int hr = 0; hr < kRows; ++hr)
    for (int hc = 0; hc < kCols; ++hc)
      if (is_hazard(hr, hc))
        nearest = std::min(nearest, std::abs(hr - row) + std::abs(hc - col));
  return nearest;
}

bool cartpole_failed(const std::vector<double>& s) {
  return std::abs(s[0]) > cartpole::kXThreshold ||
         std::abs(s[2]) > cartpole::kThetaThreshold;
}

StepResult cartpole_step(const State& state, int action) {
  using namespace cartpole;
  const double x = state.observation[0];
  const double x_dot = state.observation[1];
  const double theta = state.observation[2];
  const double theta_dot = state.observation[3];

  const double force = action == 1 ? kForceMag : -kForceMag;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double temp =
      (force + kPoleMassLength * theta_dot * theta_dot * sin_t) / kTotalMass;
  const double theta_acc =
      (kGravity * sin_t - cos_t * temp) /
      (kHalfPoleLength * (4.0 / 3.0 - kPoleMass * cos_t * cos_t / kTotalMass));
  const double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;

  StepResult out;
  out.state.observation = {x + kTau * x_dot, x_dot + kTau * x_acc,
                           theta + kTau * theta_dot,
                           theta_dot + kTau * theta_acc};
  out.state.step_count = state.step_count + 1;
  if (cartpole_failed(out.state.observation)) {
    out.state.terminal = true;
    out.state.terminal_reason = TerminalReason::Failure;
    out.reward = 0.0;
  } else {
    out.reward = 1.0;
    if (out.state.step_count >= kEpisodeCap) {
      out.state.terminal = true;
      out.state.terminal_reason = TerminalReason::Success;
    }
  }
  return out;
}

StepResult grid_bridge_step(const State& state, int action) {
  using namespace grid_bridge;
  static constexpr int kDr[] = {-1, 1, 0, 0};
  static constexpr int kDc[] = {0, 0, 1, -1};
  int row = static_cast<int>(state.observation[0]);
  int col = static_cast<int>(state.observation[1]);
  const int next_row = row + kDr[action];
  const int next_col = col + kDc[action];
  if (on_grid(next_row, next_col)) {
    row = next_row;
    col = next_col;
  }

  StepResult out;
  out.reward = kStepReward;
  out.state.observation = {static_cast<double>(row), static_cast<double>(col)};
  out.state.step_count = state.step_count + 1;
  if (is_hazard(row, col)) {
    out.state.terminal = true;
    out.state.terminal_reason = TerminalReason::Failure;
  } else if (row == kGoalRow && col == kGoalCol) {
    out.reward += kGoalBonus;
    out.state.terminal = true;
    out.state.terminal_reason = TerminalReason::Success;
  } else if (out.state.step_count >= kEpisodeCap) {
    out.state.terminal = true;
    out.state.terminal_reason = TerminalReason::Failure;
  }
  return out;
}

}  // namespace

std::string_view to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::CartPole:
      return "CartPole";
    case EnvKind::GridBridge:
      return "GridBridge";
  }
  return "?";
}

EnvKind env_kind_from_string(std::string_view name) {
  if (name == "CartPole") return EnvKind::CartPole;
  if (name == "GridBridge") return EnvKind::GridBridge;
  throw ValidationError("unknown environment kind '" + std::string(name) + "'");
}

std::size_t config_width(EnvKind kind) {
  return kind == EnvKind::CartPole ? 4 : 2;
}

std::size_t observation_width(EnvKind kind) { return config_width(kind); }

int action_count(EnvKind kind) { return kind == EnvKind::CartPole ? 2 : 4; }

int episode_cap(EnvKind kind) {
  return kind == EnvKind::CartPole ? cartpole::kEpisodeCap
                                   : grid_bridge::kEpisodeCap;
}

EnvConfig sample_config(EnvKind kind, Stream& stream) {
  switch (kind) {
    case EnvKind::CartPole: {
      EnvConfig config;
      config.values.resize(4);
      for (double& v : config.values)
        v = stream.uniform(-cartpole::kInitBound, cartpole::kInitBound);
      return config;
    }
    case EnvKind::GridBridge: {
      const auto [row, col] =
          grid_bridge::kStartCells[stream.uniform_index(std::size(grid_bridge::kStartCells))];
      return EnvConfig{{static_cast<double>(row), static_cast<double>(col)}};
    }
  }
  throw ContractError("unhandled environment kind");
}

void validate_config(EnvKind kind, const EnvConfig& config) {
  if (config.values.size() != config_width(kind)) {
    throw ValidationError(std::string(to_string(kind)) + " config needs " +
                          std::to_string(config_width(kind)) + " values, got " +
                          std::to_string(config.values.size()));
  }
  for (std::size_t i = 0; i < config.values.size(); ++i) {
    if (!std::isfinite(config.values[i]))
      throw ValidationError("config value " + std::to_string(i) + " is not finite");
  }
  if (kind == EnvKind::CartPole) {
    for (std::size_t i = 0; i < 4; ++i) {
      if (std::abs(config.values[i]) > cartpole::kInitBound) {
        throw ValidationError("CartPole config value " + std::to_string(i) +
                              " = " + std::to_string(config.values[i]) +
                              " outside [-0.05, 0.05]");
      }
    }
    return;
  }
  const double r = config.values[0];
  const double c = config.values[1];
  if (r != std::floor(r) || c != std::floor(c))
    throw ValidationError("GridBridge start cell must be integer-valued");
  const int row = static_cast<int>(r);
  const int col = static_cast<int>(c);
  if (!grid_bridge::on_grid(row, col))
    throw ValidationError("GridBridge start cell is off the grid");
  if (grid_bridge::is_hazard(row, col))
    throw ValidationError("GridBridge start cell is a hazard");
  if (row == grid_bridge::kGoalRow && col == grid_bridge::kGoalCol)
    throw ValidationError("GridBridge start cell is the goal");
}

State reset(EnvKind kind, const EnvConfig& config) {
  validate_config(kind, config);
  State state;
  state.observation = config.values;
  return state;
}

StepResult step(EnvKind kind, const State& state, int action) {
  if (state.terminal) throw ContractError("step called on a terminal state");
  if (action < 0 || action >= action_count(kind)) {
    throw ContractError("action " + std::to_string(action) + " out of range for " +
                        std::string(to_string(kind)));
  }
  return kind == EnvKind::CartPole ? cartpole_step(state, action)
                                   : grid_bridge_step(state, action);
}

double qoc_step(EnvKind kind, const State& state) {
  if (kind == EnvKind::CartPole) {
    const double x_margin =
        (cartpole::kXThreshold - std::abs(state.observation[0])) / cartpole::kXThreshold;
    const double theta_margin =
        (cartpole::kThetaThreshold - std::abs(state.observation[2])) /
        cartpole::kThetaThreshold;
    return std::clamp(std::min(x_margin, theta_margin), 0.0, 1.0);
  }
  static const int max_distance = max_hazard_distance();
  const int row = static_cast<int>(state.observation[0]);
  const int col = static_cast<int>(state.observation[1]);
  const double q = static_cast<double>(hazard_distance(row, col)) / max_distance;
  return std::clamp(q, 0.0, 1.0);
}

EpisodeOutcome run_episode(EnvKind kind, const EnvConfig& config,
                           const Policy& policy) {
  State state = reset(kind, config);
  EpisodeOutcome outcome;
  outcome.min_qoc = qoc_step(kind, state);
  while (!state.terminal) {
    const int action = policy(state.observation);
    if (action < 0 || action >= action_count(kind)) {
      throw ContractError("policy emitted action " + std::to_string(action) +
                          " at step " + std::to_string(state.step_count));
    }
    StepResult next = step(kind, state, action);
    outcome.return_sum += next.reward;
    state = std::move(next.state);
    outcome.min_qoc = std::min(outcome.min_qoc, qoc_step(kind, state));
  }
  outcome.success = state.terminal_reason == TerminalReason::Success;
  outcome.length = state.step_count;
  return outcome;
}

void to_json(nlohmann::json& j, const EnvConfig& config) { j = config.values; }

void from_json(const nlohmann::json& j, EnvConfig& config) {
  if (!j.is_array()) throw ValidationError("EnvConfig must be a JSON array");
  config.values = j.get<std::vector<double>>();
}

void to_json(nlohmann::json& j, const EpisodeOutcome& outcome) {
  j = nlohmann::json{{"success", outcome.success},
                     {"length", outcome.length},
                     {"return", outcome.return_sum},
                     {"min_qoc", outcome.min_qoc}};
}

void from_json(const nlohmann::json& j, EpisodeOutcome& outcome) {
  outcome.success = j.at("success").get<bool>();
  outcome.length = j.at("length").get<int>();
  outcome.return_sum = j.at("return").get<double>();
  outcome.min_qoc = j.at("min_qoc").get<double>();
}

}  // namespace rlmut
