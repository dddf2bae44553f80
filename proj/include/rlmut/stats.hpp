#ifndef RLMUT_STATS_HPP_
#define RLMUT_STATS_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rlmut/rng.hpp"

namespace rlmut {

// [[s_o, f_o], [s_m, f_m]]: successes and failures of an original and a mutant
// on the same suite.
struct ContingencyTable {
  std::int64_t s_o = 0;
  std::int64_t f_o = 0;
  std::int64_t s_m = 0;
  std::int64_t f_m = 0;

  std::int64_t suite_length() const { return s_o + f_o; }

  friend bool operator==(const ContingencyTable&, const ContingencyTable&) = default;
};

// Throws ValidationError unless counts are non-negative and both rows sum to
// the same L > 0.
void validate(const ContingencyTable& t);

struct StatsConfig {
  double alpha = 0.05;
  double kill_threshold = 0.5;
  double trivial_threshold = 0.9;
  int bootstrap_samples = 2000;

  friend bool operator==(const StatsConfig&, const StatsConfig&) = default;
};

void validate(const StatsConfig& cfg);

// log(n!) from a table for n <= 10000, lgamma beyond.
long double log_factorial(std::int64_t n);

// Two-sided exact p-value for the 2x2 table [[a, b], [c, d]]: the total
// hypergeometric mass (fixed margins) of tables no more probable than the
// observed one. Rows may differ in length.
double fisher_exact(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d);
double fisher_exact(const ContingencyTable& t);

enum class PairVerdict { Killed, NotKilled, WeakerOriginal };

std::string_view to_string(PairVerdict v);
PairVerdict pair_verdict_from_string(std::string_view name);

PairVerdict killed_pair(const ContingencyTable& t, const StatsConfig& cfg);

struct PairResult {
  ContingencyTable table;
  double p_value = 1.0;
  PairVerdict verdict = PairVerdict::NotKilled;

  friend bool operator==(const PairResult&, const PairResult&) = default;
};

PairResult evaluate_pair(const ContingencyTable& t, const StatsConfig& cfg);

struct KillRecord {
  std::vector<PairResult> pairs;
  int killed_count = 0;
  int weaker = 0;
  // killed_count / (n - weaker); 0 when every pair is weaker-original.
  double rate = 0.0;
  bool killed = false;
  bool degenerate = false;

  int n() const { return static_cast<int>(pairs.size()); }

  friend bool operator==(const KillRecord&, const KillRecord&) = default;
};

KillRecord killing_rate(std::span<const PairResult> pairs, const StatsConfig& cfg);

struct TrivialityPair {
  // Configs on which the original succeeded, and how many of those the
  // mutant failed.
  std::int64_t original_successes = 0;
  std::int64_t mutant_failures = 0;
};

struct TrivialityResult {
  double ratio = 0.0;
  bool trivial = false;
  int pairs_used = 0;
};

// Throws ValidationError when no pair has an original success.
TrivialityResult triviality(std::span<const TrivialityPair> pairs, const StatsConfig& cfg);

// Mean over operators of the mean killing rate over that operator's configs.
double mutation_score(const std::vector<std::vector<double>>& rates_per_operator);
double mutation_score(const std::map<std::string, std::vector<double>>& rates_per_operator);

// (strong - weak) / strong, or 0 when strong is 0 or below weak.
double sensitivity(double ms_weak, double ms_strong);

struct ImprovementEstimate {
  double estimate = 0.5;
  double ci_low = 0.5;
  double ci_high = 0.5;
};

// P(X > Y) + P(X = Y) / 2 for X drawn from the original's outcomes and Y from
// the mutant's, with a stratified-bootstrap 95% percentile interval.
ImprovementEstimate probability_of_improvement(const std::vector<bool>& original,
                                               const std::vector<bool>& mutant,
                                               const StatsConfig& cfg, Stream& stream);

// Bootstrap counterpart of the killed predicate: the original is better with
// the whole interval above one half.
bool bootstrap_killed(const ImprovementEstimate& e);

void to_json(nlohmann::json& j, const ContingencyTable& t);
void from_json(const nlohmann::json& j, ContingencyTable& t);
void to_json(nlohmann::json& j, const StatsConfig& cfg);
void from_json(const nlohmann::json& j, StatsConfig& cfg);
void to_json(nlohmann::json& j, const PairResult& r);
void from_json(const nlohmann::json& j, PairResult& r);
void to_json(nlohmann::json& j, const KillRecord& r);
void from_json(const nlohmann::json& j, KillRecord& r);
void to_json(nlohmann::json& j, const ImprovementEstimate& e);
void from_json(const nlohmann::json& j, ImprovementEstimate& e);

}  // namespace rlmut

#endif  // RLMUT_STATS_HPP_
