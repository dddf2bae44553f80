#ifndef RLMUT_TESTGEN_HPP_
#define RLMUT_TESTGEN_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rlmut/agents.hpp"
#include "rlmut/envs.hpp"
#include "rlmut/nn.hpp"

namespace rlmut {

enum class GeneratorKind { Random, Weak, Strong };

std::string_view to_string(GeneratorKind kind);
GeneratorKind generator_kind_from_string(std::string_view name);

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::Random;
  // Random: suite size. Strong: number of selections.
  int count = 50;
  // Weak only.
  int pool = 200;
  int select = 50;
  // Strong only: candidates per selection.
  int candidates = 500;
  std::uint64_t seed = 0;

  static GeneratorSpec random(int count, std::uint64_t seed);
  static GeneratorSpec weak(int pool, int select, std::uint64_t seed);
  static GeneratorSpec strong(int count, int candidates, std::uint64_t seed);

  // Number of configs the generator emits.
  int suite_size() const;

  friend bool operator==(const GeneratorSpec&, const GeneratorSpec&) = default;
};

void validate(const GeneratorSpec& spec);
void to_json(nlohmann::json& j, const GeneratorSpec& spec);
void from_json(const nlohmann::json& j, GeneratorSpec& spec);

std::vector<EnvConfig> random_generator(EnvKind kind, int count, std::uint64_t seed);

// Pool indices ordered by descending score, ties by index; first `select`.
std::vector<std::size_t> rank_by_score(std::span<const double> scores, std::size_t select);

// Mean over originals of each pool config's episode min-QOC.
std::vector<double> weak_scores(EnvKind kind, std::span<const EnvConfig> pool,
                                std::span<const TrainedAgent> originals);

std::vector<EnvConfig> weak_generator(const GeneratorSpec& spec, EnvKind kind,
                                      std::span<const TrainedAgent> originals);

struct FailurePredictor {
  nn::Network network;
  // Per-dimension min-max bounds taken from the training data.
  std::vector<double> lower;
  std::vector<double> upper;
  std::size_t training_size = 0;
  double training_accuracy = 0.0;
  int epochs = 0;
  double final_loss = 0.0;
  // Only one outcome class was seen; predictions are that class's constant.
  bool degenerate = false;
  double constant_probability = 0.0;

  double failure_probability(std::span<const double> config) const;
  std::vector<double> failure_probabilities(std::span<const EnvConfig> configs) const;
};

void to_json(nlohmann::json& j, const FailurePredictor& p);
void from_json(const nlohmann::json& j, FailurePredictor& p);

struct PredictorConfig {
  std::vector<int> hidden = {32, 32};
  double learning_rate = 1e-3;
  int max_epochs = 200;
  double stop_loss = 1e-3;
  int batch_size = 32;
};

// Label 1 = failure. Examples are weighted by inverse class frequency.
// Throws ValidationError on an empty replay.
FailurePredictor train_failure_predictor(
    std::span<const std::pair<EnvConfig, EpisodeOutcome>> replay, std::uint64_t seed,
    const PredictorConfig& cfg = {});

// Candidates drawn for selection `batch` of a strong generator.
std::vector<EnvConfig> strong_candidates(const GeneratorSpec& spec, EnvKind kind, int batch);

using ConfigScorer = std::function<std::vector<double>(std::span<const EnvConfig>)>;

// For each of spec.count batches, the candidate with the highest score (ties
// to the lowest candidate index).
std::vector<EnvConfig> strong_generator(const GeneratorSpec& spec, EnvKind kind,
                                        const ConfigScorer& score);
std::vector<EnvConfig> strong_generator(const GeneratorSpec& spec, EnvKind kind,
                                        const FailurePredictor& predictor);

struct Suite {
  GeneratorSpec generator;
  std::vector<EnvConfig> configs;
};

void to_json(nlohmann::json& j, const Suite& s);
void from_json(const nlohmann::json& j, Suite& s);

}  // namespace rlmut

#endif  // RLMUT_TESTGEN_HPP_
