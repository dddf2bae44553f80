#ifndef RLMUT_MUTATION_HPP_
#define RLMUT_MUTATION_HPP_

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rlmut/agents.hpp"
#include "rlmut/rng.hpp"

namespace rlmut {

enum class OperatorId { SDF, SLS, NEI, SNU, SPV, SMR, SEC, SNR };

std::string_view to_string(OperatorId op);
OperatorId operator_from_string(std::string_view name);

// Applicable operators in a fixed order.
std::vector<OperatorId> catalog(Algorithm algorithm);
bool applicable(OperatorId op, Algorithm algorithm);

// Operators whose target field is an integer step count.
bool is_integral(OperatorId op);

// The hyperparameter value an operator perturbs.
double original_value(OperatorId op, const Hyperparameters& hp);

struct MutationSpace {
  OperatorId op = OperatorId::SDF;
  double original = 0.0;
  // Distinct, never equal to `original`.
  std::vector<double> values;
};

// Default grid for `op` given the base hyperparameters. Step-count operators
// scale with hp.total_steps; values that would yield invalid hyperparameters
// or repeat the original are dropped. Throws ValidationError when the operator
// is not applicable or nothing is left.
MutationSpace default_space(OperatorId op, const Hyperparameters& hp);

// A space from explicit values (same units as the target field).
MutationSpace custom_space(OperatorId op, const Hyperparameters& hp,
                           std::span<const double> values);

struct MutantSpec {
  OperatorId op = OperatorId::SDF;
  int j = 0;
  double value = 0.0;

  friend bool operator==(const MutantSpec&, const MutantSpec&) = default;
};

void to_json(nlohmann::json& j, const MutantSpec& spec);
void from_json(const nlohmann::json& j, MutantSpec& spec);

struct SampledConfigs {
  std::vector<MutantSpec> specs;
  // Set when the space held fewer values than requested; specs is then the
  // whole space.
  bool exhausted = false;
};

// Draws `count` distinct values without replacement; j follows draw order.
SampledConfigs sample_configs(const MutationSpace& space, int count, Stream& stream);

// Rewrites the operator's target field (SPV also selects Polyak target
// updates, SNU hard ones). Throws ValidationError when the operator does not
// apply or the result is not a valid configuration.
Hyperparameters apply(const MutantSpec& spec, const Hyperparameters& hp);

enum class SelectionStatus { Selected, LikelyEquivalent, AllTrivial };

std::string_view to_string(SelectionStatus s);
SelectionStatus selection_status_from_string(std::string_view name);

struct ConfigVerdict {
  MutantSpec spec;
  bool killable = false;
  bool trivial = false;
};

struct Selection {
  std::optional<MutantSpec> representative;
  SelectionStatus status = SelectionStatus::LikelyEquivalent;
};

inline constexpr double kRelativeDistanceFloor = 1e-9;

double relative_distance(double value, double original);

// Among killable, non-trivial configs, the one closest to the original value
// in relative terms; ties go to the earlier entry.
Selection select_representative(double original, std::span<const ConfigVerdict> verdicts);

}  // namespace rlmut

#endif  // RLMUT_MUTATION_HPP_
