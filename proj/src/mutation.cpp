#include "rlmut/mutation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rlmut/error.hpp"

namespace rlmut {

namespace {

struct Entry {
  OperatorId op;
  const char* name;
};

constexpr Entry kNames[] = {
    {OperatorId::SDF, "SDF"}, {OperatorId::SLS, "SLS"}, {OperatorId::NEI, "NEI"},
    {OperatorId::SNU, "SNU"}, {OperatorId::SPV, "SPV"}, {OperatorId::SMR, "SMR"},
    {OperatorId::SEC, "SEC"}, {OperatorId::SNR, "SNR"},
};

std::int64_t steps_fraction(double fraction, std::int64_t total) {
  return std::max<std::int64_t>(1, std::llround(fraction * static_cast<double>(total)));
}

bool is_valid(const MutantSpec& spec, const Hyperparameters& hp) {
  try {
    apply(spec, hp);
    return true;
  } catch (const ValidationError&) {
    return false;
  }
}

}  // namespace

std::string_view to_string(OperatorId op) {
  for (const Entry& e : kNames)
    if (e.op == op) return e.name;
  return "?";
}

OperatorId operator_from_string(std::string_view name) {
  for (const Entry& e : kNames)
    if (name == e.name) return e.op;
  throw ValidationError("unknown mutation operator '" + std::string(name) + "'");
}

std::vector<OperatorId> catalog(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::DQN:
      return {OperatorId::SDF, OperatorId::SLS, OperatorId::NEI,
              OperatorId::SNU, OperatorId::SPV, OperatorId::SMR};
    case Algorithm::A2C:
      return {OperatorId::SDF, OperatorId::NEI, OperatorId::SEC, OperatorId::SNR};
  }
  throw ValidationError("unknown algorithm");
}

bool applicable(OperatorId op, Algorithm algorithm) {
  const auto ops = catalog(algorithm);
  return std::find(ops.begin(), ops.end(), op) != ops.end();
}

bool is_integral(OperatorId op) {
  return op == OperatorId::SLS || op == OperatorId::NEI || op == OperatorId::SNU ||
         op == OperatorId::SNR;
}

double original_value(OperatorId op, const Hyperparameters& hp) {
  switch (op) {
    case OperatorId::SDF:
      return hp.gamma;
    case OperatorId::SLS:
      return static_cast<double>(hp.learning_starts);
    case OperatorId::NEI:
      return static_cast<double>(hp.total_steps);
    case OperatorId::SNU:
      return static_cast<double>(hp.target_update_interval);
    case OperatorId::SPV:
      return hp.tau;
    case OperatorId::SMR:
      return hp.epsilon_final;
    case OperatorId::SEC:
      return hp.entropy_coef;
    case OperatorId::SNR:
      return static_cast<double>(hp.n_steps);
  }
  return 0.0;
}

MutationSpace default_space(OperatorId op, const Hyperparameters& hp) {
  if (!applicable(op, hp.algorithm))
    throw ValidationError(std::string(to_string(op)) + " is not applicable to " +
                          std::string(to_string(hp.algorithm)));
  const std::int64_t total = hp.total_steps;
  std::vector<double> grid;
  auto fractions = [&](std::initializer_list<double> fs) {
    for (double f : fs) grid.push_back(static_cast<double>(steps_fraction(f, total)));
  };
  switch (op) {
    case OperatorId::SDF:
      grid = {0.20, 0.35, 0.50, 0.65, 0.80};
      break;
    case OperatorId::SLS:
      fractions({0.05, 0.10, 0.25, 0.50, 0.75});
      break;
    case OperatorId::NEI:
      fractions({0.05, 0.10, 0.20, 0.35, 0.50});
      break;
    case OperatorId::SNU:
      grid.push_back(1.0);
      fractions({0.05, 0.10, 0.25, 0.50});
      break;
    case OperatorId::SPV:
      grid = {0.9, 0.99, 0.999, 1e-4, 1e-5};
      break;
    case OperatorId::SMR:
      grid = {0.3, 0.5, 0.7, 0.9, 0.95};
      break;
    case OperatorId::SEC:
      grid = {0.0, 0.2, 0.5, 1.0, 2.0};
      break;
    case OperatorId::SNR:
      grid = {1, 2, 256, 512, 1024};
      break;
  }

  MutationSpace space;
  space.op = op;
  space.original = original_value(op, hp);
  for (double v : grid) {
    if (v == space.original) continue;
    if (std::find(space.values.begin(), space.values.end(), v) != space.values.end()) continue;
    if (!is_valid(MutantSpec{op, 0, v}, hp)) continue;
    space.values.push_back(v);
  }
  if (space.values.empty())
    throw ValidationError(std::string(to_string(op)) + ": empty mutation space");
  return space;
}

MutationSpace custom_space(OperatorId op, const Hyperparameters& hp,
                           std::span<const double> values) {
  if (!applicable(op, hp.algorithm))
    throw ValidationError(std::string(to_string(op)) + " is not applicable to " +
                          std::string(to_string(hp.algorithm)));
  MutationSpace space;
  space.op = op;
  space.original = original_value(op, hp);
  for (double v : values) {
    const std::string where = std::string(to_string(op)) + " space value " + std::to_string(v);
    if (v == space.original) throw ValidationError(where + ": equals the original value");
    if (std::find(space.values.begin(), space.values.end(), v) != space.values.end())
      throw ValidationError(where + ": duplicate");
    apply(MutantSpec{op, 0, v}, hp);
    space.values.push_back(v);
  }
  if (space.values.empty())
    throw ValidationError(std::string(to_string(op)) + ": empty mutation space");
  return space;
}

void to_json(nlohmann::json& j, const MutantSpec& spec) {
  j = nlohmann::json::object();
  j["operator"] = to_string(spec.op);
  j["j"] = spec.j;
  if (is_integral(spec.op)) {
    j["value"] = std::llround(spec.value);
  } else {
    j["value"] = spec.value;
  }
}

void from_json(const nlohmann::json& j, MutantSpec& spec) {
  spec.op = operator_from_string(j.at("operator").get<std::string>());
  spec.j = j.at("j").get<int>();
  spec.value = j.at("value").get<double>();
}

SampledConfigs sample_configs(const MutationSpace& space, int count, Stream& stream) {
  if (count < 1) throw ValidationError("sample_configs: count must be at least 1");
  SampledConfigs out;
  std::vector<double> pool = space.values;
  const std::size_t take = std::min<std::size_t>(pool.size(), static_cast<std::size_t>(count));
  out.exhausted = pool.size() < static_cast<std::size_t>(count);
  // Partial Fisher-Yates.
  for (std::size_t k = 0; k < take; ++k) {
    const std::size_t pick = k + stream.uniform_index(pool.size() - k);
    std::swap(pool[k], pool[pick]);
    out.specs.push_back(MutantSpec{space.op, static_cast<int>(k), pool[k]});
  }
  return out;
}

Hyperparameters apply(const MutantSpec& spec, const Hyperparameters& hp) {
  const std::string name(to_string(spec.op));
  if (!applicable(spec.op, hp.algorithm))
    throw ValidationError(name + " is not applicable to " + std::string(to_string(hp.algorithm)));
  if (!std::isfinite(spec.value)) throw ValidationError(name + ": value must be finite");
  if (is_integral(spec.op) && spec.value != std::floor(spec.value))
    throw ValidationError(name + ": value must be an integer");

  Hyperparameters out = hp;
  const auto as_int = static_cast<std::int64_t>(spec.value);
  switch (spec.op) {
    case OperatorId::SDF:
      out.gamma = spec.value;
      break;
    case OperatorId::SLS:
      out.learning_starts = as_int;
      break;
    case OperatorId::NEI:
      out.total_steps = as_int;
      break;
    case OperatorId::SNU:
      out.target_update_mode = TargetUpdateMode::Hard;
      out.target_update_interval = as_int;
      break;
    case OperatorId::SPV:
      out.target_update_mode = TargetUpdateMode::Polyak;
      out.tau = spec.value;
      break;
    case OperatorId::SMR:
      out.epsilon_final = spec.value;
      break;
    case OperatorId::SEC:
      out.entropy_coef = spec.value;
      break;
    case OperatorId::SNR:
      if (as_int > std::numeric_limits<int>::max()) throw ValidationError(name + ": too large");
      out.n_steps = static_cast<int>(as_int);
      break;
  }
  try {
    validate(out);
  } catch (const ValidationError& e) {
    throw ValidationError(name + " value " + std::to_string(spec.value) + ": " + e.what());
  }
  return out;
}

std::string_view to_string(SelectionStatus s) {
  switch (s) {
    case SelectionStatus::Selected:
      return "selected";
    case SelectionStatus::LikelyEquivalent:
      return "likely_equivalent";
    case SelectionStatus::AllTrivial:
      return "all_trivial";
  }
  return "?";
}

SelectionStatus selection_status_from_string(std::string_view name) {
  if (name == "selected") return SelectionStatus::Selected;
  if (name == "likely_equivalent") return SelectionStatus::LikelyEquivalent;
  if (name == "all_trivial") return SelectionStatus::AllTrivial;
  throw ValidationError("unknown selection status '" + std::string(name) + "'");
}

double relative_distance(double value, double original) {
  return std::abs(value - original) / std::max(std::abs(original), kRelativeDistanceFloor);
}

Selection select_representative(double original, std::span<const ConfigVerdict> verdicts) {
  Selection sel;
  bool any_killable = false;
  double best = 0.0;
  for (const ConfigVerdict& v : verdicts) {
    if (!v.killable) continue;
    any_killable = true;
    if (v.trivial) continue;
    const double d = relative_distance(v.spec.value, original);
    if (!sel.representative || d < best) {
      sel.representative = v.spec;
      best = d;
    }
  }
  if (sel.representative) {
    sel.status = SelectionStatus::Selected;
  } else {
    sel.status = any_killable ? SelectionStatus::AllTrivial : SelectionStatus::LikelyEquivalent;
  }
  return sel;
}

}  // namespace rlmut
