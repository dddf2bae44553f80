#ifndef RLMUT_ENVS_HPP_
#define RLMUT_ENVS_HPP_

#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rlmut/rng.hpp"

namespace rlmut {

enum class EnvKind { CartPole, GridBridge };

std::string_view to_string(EnvKind kind);
EnvKind env_kind_from_string(std::string_view name);

// Initial configuration of an episode; this is what a test case is.
//  CartPole:   [x, x_dot, theta, theta_dot], each in [-0.05, 0.05]
//  GridBridge: [row, col] of a safe, non-goal start cell
struct EnvConfig {
  std::vector<double> values;

  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

enum class TerminalReason { None, Success, Failure };

struct State {
  std::vector<double> observation;
  int step_count = 0;
  bool terminal = false;
  TerminalReason terminal_reason = TerminalReason::None;

  friend bool operator==(const State&, const State&) = default;
};

struct StepResult {
  State state;
  double reward = 0.0;
};

struct EpisodeOutcome {
  bool success = false;
  int length = 0;
  double return_sum = 0.0;
  double min_qoc = 1.0;

  friend bool operator==(const EpisodeOutcome&, const EpisodeOutcome&) = default;
};

// Maps an observation to an action id.
using Policy = std::function<int(std::span<const double>)>;

namespace cartpole {

inline constexpr double kGravity = 9.8;
inline constexpr double kCartMass = 1.0;
inline constexpr double kPoleMass = 0.1;
inline constexpr double kTotalMass = kCartMass + kPoleMass;
inline constexpr double kHalfPoleLength = 0.5;
inline constexpr double kPoleMassLength = kPoleMass * kHalfPoleLength;
inline constexpr double kForceMag = 10.0;
inline constexpr double kTau = 0.02;
inline constexpr double kXThreshold = 2.4;
inline constexpr double kThetaThreshold = 12.0 * std::numbers::pi / 180.0;
inline constexpr double kInitBound = 0.05;
inline constexpr int kEpisodeCap = 200;

}  // namespace cartpole

namespace grid_bridge {

inline constexpr int kRows = 6;
inline constexpr int kCols = 8;
inline constexpr int kGoalRow = 2;
inline constexpr int kGoalCol = 7;
inline constexpr int kBridgeRow = 2;
inline constexpr int kBridgeFirstCol = 2;
inline constexpr int kBridgeLastCol = 5;
inline constexpr int kEpisodeCap = 64;
inline constexpr double kStepReward = -0.01;
// Added to the step reward on reaching the goal.
inline constexpr double kGoalBonus = 1.0;

// Every cell of columns 2..5 except the bridge row is a cliff.
constexpr bool is_hazard(int row, int col) {
  return col >= kBridgeFirstCol && col <= kBridgeLastCol && row != kBridgeRow;
}

constexpr bool on_grid(int row, int col) {
  return row >= 0 && row < kRows && col >= 0 && col < kCols;
}

// Cells sampled as episode starts.
inline constexpr std::pair<int, int> kStartCells[] = {{1, 0}, {2, 0}, {3, 0}};

}  // namespace grid_bridge

std::size_t config_width(EnvKind kind);
std::size_t observation_width(EnvKind kind);
int action_count(EnvKind kind);
int episode_cap(EnvKind kind);

EnvConfig sample_config(EnvKind kind, Stream& stream);

// Throws ValidationError describing the first violated constraint.
void validate_config(EnvKind kind, const EnvConfig& config);

State reset(EnvKind kind, const EnvConfig& config);

// Throws ContractError when `state` is terminal or `action` is out of range.
StepResult step(EnvKind kind, const State& state, int action);

// Normalized distance to the nearest failure condition, in [0, 1].
double qoc_step(EnvKind kind, const State& state);

// Runs one episode from `config`. Throws ContractError naming the step index
// when the policy emits an invalid action.
EpisodeOutcome run_episode(EnvKind kind, const EnvConfig& config,
                           const Policy& policy);

void to_json(nlohmann::json& j, const EnvConfig& config);
void from_json(const nlohmann::json& j, EnvConfig& config);
void to_json(nlohmann::json& j, const EpisodeOutcome& outcome);
void from_json(const nlohmann::json& j, EpisodeOutcome& outcome);

}  // namespace rlmut

#endif  // RLMUT_ENVS_HPP_
