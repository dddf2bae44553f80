#include "rlmut/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rlmut/error.hpp"

namespace rlmut {

namespace {

constexpr std::int64_t kLogFactorialTableSize = 10001;

// Relative slack when comparing point probabilities against the observed one.
constexpr long double kFisherSlack = 1e-12L;

const std::vector<long double>& log_factorial_table() {
  static const std::vector<long double> table = [] {
    std::vector<long double> t(kLogFactorialTableSize);
    t[0] = 0.0L;
    for (std::int64_t k = 1; k < kLogFactorialTableSize; ++k)
      t[k] = t[k - 1] + std::log(static_cast<long double>(k));
    return t;
  }();
  return table;
}

long double log_choose(std::int64_t n, std::int64_t k) {
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

double percentile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

// P(X > Y) + P(X = Y)/2 for independent Bernoulli draws.
double improvement(double p_o, double p_m) {
  return p_o * (1.0 - p_m) + 0.5 * (p_o * p_m + (1.0 - p_o) * (1.0 - p_m));
}

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> known,
                         std::string_view where) {
  if (!j.is_object()) throw ValidationError(std::string(where) + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return key == k; }) ==
        known.end())
      throw ValidationError(std::string(where) + "/" + key + ": unknown key");
  }
}

}  // namespace

void validate(const ContingencyTable& t) {
  if (t.s_o < 0 || t.f_o < 0 || t.s_m < 0 || t.f_m < 0)
    throw ValidationError("contingency table: counts must be non-negative");
  if (t.s_o + t.f_o != t.s_m + t.f_m)
    throw ValidationError("contingency table: rows must have equal length");
  if (t.s_o + t.f_o == 0) throw ValidationError("contingency table: empty suite");
}

void validate(const StatsConfig& cfg) {
  auto open_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!open_unit(cfg.alpha)) throw ValidationError("stats/alpha: must lie in (0, 1)");
  if (!open_unit(cfg.kill_threshold))
    throw ValidationError("stats/kill_threshold: must lie in (0, 1)");
  if (!open_unit(cfg.trivial_threshold))
    throw ValidationError("stats/trivial_threshold: must lie in (0, 1)");
  if (cfg.bootstrap_samples < 1)
    throw ValidationError("stats/bootstrap_samples: must be at least 1");
}

long double log_factorial(std::int64_t n) {
  if (n < 0) throw ValidationError("log_factorial: negative argument");
  if (n < kLogFactorialTableSize) return log_factorial_table()[static_cast<std::size_t>(n)];
  return std::lgamma(static_cast<long double>(n) + 1.0L);
}

double fisher_exact(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
  if (a < 0 || b < 0 || c < 0 || d < 0)
    throw ValidationError("fisher_exact: counts must be non-negative");
  const std::int64_t row1 = a + b;
  const std::int64_t row2 = c + d;
  const std::int64_t col1 = a + c;
  if (row1 + row2 == 0) throw ValidationError("fisher_exact: empty table");

  // Point probability of the table with top-left cell x, up to the constant
  // log C(N, col1) that cancels in the ratio below.
  auto log_term = [&](std::int64_t x) {
    return log_choose(row1, x) + log_choose(row2, col1 - x);
  };

  const std::int64_t lo = std::max<std::int64_t>(0, col1 - row2);
  const std::int64_t hi = std::min(row1, col1);
  const long double observed = log_term(a);

  long double peak = -std::numeric_limits<long double>::infinity();
  for (std::int64_t x = lo; x <= hi; ++x) peak = std::max(peak, log_term(x));

  long double total = 0.0L;
  long double tail = 0.0L;
  const long double cutoff = observed + std::log1p(kFisherSlack);
  for (std::int64_t x = lo; x <= hi; ++x) {
    const long double lt = log_term(x);
    const long double w = std::exp(lt - peak);
    total += w;
    if (lt <= cutoff) tail += w;
  }
  return static_cast<double>(std::min(1.0L, tail / total));
}

double fisher_exact(const ContingencyTable& t) {
  validate(t);
  return fisher_exact(t.s_o, t.f_o, t.s_m, t.f_m);
}

std::string_view to_string(PairVerdict v) {
  switch (v) {
    case PairVerdict::Killed:
      return "killed";
    case PairVerdict::NotKilled:
      return "not_killed";
    case PairVerdict::WeakerOriginal:
      return "weaker_original";
  }
  return "?";
}

PairVerdict pair_verdict_from_string(std::string_view name) {
  if (name == "killed") return PairVerdict::Killed;
  if (name == "not_killed") return PairVerdict::NotKilled;
  if (name == "weaker_original") return PairVerdict::WeakerOriginal;
  throw ValidationError("unknown pair verdict '" + std::string(name) + "'");
}

PairVerdict killed_pair(const ContingencyTable& t, const StatsConfig& cfg) {
  return evaluate_pair(t, cfg).verdict;
}

PairResult evaluate_pair(const ContingencyTable& t, const StatsConfig& cfg) {
  PairResult r;
  r.table = t;
  r.p_value = fisher_exact(t);
  if (t.f_o > t.f_m) {
    r.verdict = PairVerdict::WeakerOriginal;
  } else {
    r.verdict = r.p_value < cfg.alpha ? PairVerdict::Killed : PairVerdict::NotKilled;
  }
  return r;
}

KillRecord killing_rate(std::span<const PairResult> pairs, const StatsConfig& cfg) {
  if (pairs.empty()) throw ValidationError("killing_rate: no pairs");
  KillRecord rec;
  rec.pairs.assign(pairs.begin(), pairs.end());
  for (const PairResult& p : pairs) {
    if (p.verdict == PairVerdict::WeakerOriginal) ++rec.weaker;
    if (p.verdict == PairVerdict::Killed) ++rec.killed_count;
  }
  const int usable = rec.n() - rec.weaker;
  if (usable == 0) {
    rec.degenerate = true;
    rec.rate = 0.0;
    rec.killed = false;
    return rec;
  }
  rec.rate = static_cast<double>(rec.killed_count) / usable;
  rec.killed = rec.rate >= cfg.kill_threshold;
  return rec;
}

TrivialityResult triviality(std::span<const TrivialityPair> pairs, const StatsConfig& cfg) {
  TrivialityResult res;
  double sum = 0.0;
  for (const TrivialityPair& p : pairs) {
    if (p.original_successes < 0 || p.mutant_failures < 0 ||
        p.mutant_failures > p.original_successes)
      throw ValidationError("triviality: mutant failures must lie in [0, original successes]");
    if (p.original_successes == 0) continue;
    sum += static_cast<double>(p.mutant_failures) / static_cast<double>(p.original_successes);
    ++res.pairs_used;
  }
  if (res.pairs_used == 0)
    throw ValidationError("triviality: no original succeeds on its own training configurations");
  res.ratio = sum / res.pairs_used;
  res.trivial = res.ratio > cfg.trivial_threshold;
  return res;
}

double mutation_score(const std::vector<std::vector<double>>& rates_per_operator) {
  if (rates_per_operator.empty()) throw ValidationError("mutation_score: no operators");
  double outer = 0.0;
  for (const auto& rates : rates_per_operator) {
    if (rates.empty()) throw ValidationError("mutation_score: operator without configurations");
    double inner = 0.0;
    for (double r : rates) {
      if (!(r >= 0.0 && r <= 1.0))
        throw ValidationError("mutation_score: killing rates must lie in [0, 1]");
      inner += r;
    }
    outer += inner / static_cast<double>(rates.size());
  }
  return outer / static_cast<double>(rates_per_operator.size());
}

double mutation_score(const std::map<std::string, std::vector<double>>& rates_per_operator) {
  std::vector<std::vector<double>> rates;
  rates.reserve(rates_per_operator.size());
  for (const auto& [_, r] : rates_per_operator) rates.push_back(r);
  return mutation_score(rates);
}

double sensitivity(double ms_weak, double ms_strong) {
  if (!(ms_weak >= 0.0 && ms_weak <= 1.0) || !(ms_strong >= 0.0 && ms_strong <= 1.0))
    throw ValidationError("sensitivity: mutation scores must lie in [0, 1]");
  if (ms_strong == 0.0 || ms_strong < ms_weak) return 0.0;
  return (ms_strong - ms_weak) / ms_strong;
}

ImprovementEstimate probability_of_improvement(const std::vector<bool>& original,
                                               const std::vector<bool>& mutant,
                                               const StatsConfig& cfg, Stream& stream) {
  if (original.empty() || mutant.empty())
    throw ValidationError("probability_of_improvement: empty outcome list");
  validate(cfg);

  auto rate = [](const std::vector<bool>& v) {
    return static_cast<double>(std::count(v.begin(), v.end(), true)) /
           static_cast<double>(v.size());
  };
  auto resampled_rate = [&](const std::vector<bool>& v) {
    std::size_t hits = 0;
    for (std::size_t k = 0; k < v.size(); ++k) hits += v[stream.uniform_index(v.size())] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(v.size());
  };

  ImprovementEstimate e;
  e.estimate = improvement(rate(original), rate(mutant));

  std::vector<double> replicates(static_cast<std::size_t>(cfg.bootstrap_samples));
  for (double& r : replicates) {
    const double p_o = resampled_rate(original);
    const double p_m = resampled_rate(mutant);
    r = improvement(p_o, p_m);
  }
  std::sort(replicates.begin(), replicates.end());
  e.ci_low = std::min(percentile(replicates, 0.025), e.estimate);
  e.ci_high = std::max(percentile(replicates, 0.975), e.estimate);
  return e;
}

bool bootstrap_killed(const ImprovementEstimate& e) { return e.ci_low > 0.5; }

void to_json(nlohmann::json& j, const ContingencyTable& t) {
  j = nlohmann::json{{"s_o", t.s_o}, {"f_o", t.f_o}, {"s_m", t.s_m}, {"f_m", t.f_m}};
}

void from_json(const nlohmann::json& j, ContingencyTable& t) {
  t.s_o = j.at("s_o").get<std::int64_t>();
  t.f_o = j.at("f_o").get<std::int64_t>();
  t.s_m = j.at("s_m").get<std::int64_t>();
  t.f_m = j.at("f_m").get<std::int64_t>();
}

void to_json(nlohmann::json& j, const StatsConfig& cfg) {
  j = nlohmann::json{{"alpha", cfg.alpha},
                     {"kill_threshold", cfg.kill_threshold},
                     {"trivial_threshold", cfg.trivial_threshold},
                     {"bootstrap_samples", cfg.bootstrap_samples}};
}

void from_json(const nlohmann::json& j, StatsConfig& cfg) {
  reject_unknown_keys(j, {"alpha", "kill_threshold", "trivial_threshold", "bootstrap_samples"},
                      "stats");
  StatsConfig out;
  auto number = [&](const char* key, double& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_number())
      throw ValidationError(std::string("stats/") + key + ": expected a number");
    dst = j[key].get<double>();
  };
  number("alpha", out.alpha);
  number("kill_threshold", out.kill_threshold);
  number("trivial_threshold", out.trivial_threshold);
  if (j.contains("bootstrap_samples")) {
    if (!j["bootstrap_samples"].is_number_integer())
      throw ValidationError("stats/bootstrap_samples: expected an integer");
    out.bootstrap_samples = j["bootstrap_samples"].get<int>();
  }
  validate(out);
  cfg = out;
}

void to_json(nlohmann::json& j, const PairResult& r) {
  j = nlohmann::json{{"table", r.table}, {"p_value", r.p_value}, {"verdict", to_string(r.verdict)}};
}

void from_json(const nlohmann::json& j, PairResult& r) {
  r.table = j.at("table").get<ContingencyTable>();
  r.p_value = j.at("p_value").get<double>();
  r.verdict = pair_verdict_from_string(j.at("verdict").get<std::string>());
}

void to_json(nlohmann::json& j, const KillRecord& r) {
  j = nlohmann::json{{"pairs", r.pairs},   {"killed_count", r.killed_count},
                     {"weaker", r.weaker}, {"rate", r.rate},
                     {"killed", r.killed}, {"degenerate", r.degenerate}};
}

void from_json(const nlohmann::json& j, KillRecord& r) {
  r.pairs = j.at("pairs").get<std::vector<PairResult>>();
  r.killed_count = j.at("killed_count").get<int>();
  r.weaker = j.at("weaker").get<int>();
  r.rate = j.at("rate").get<double>();
  r.killed = j.at("killed").get<bool>();
  r.degenerate = j.at("degenerate").get<bool>();
}

void to_json(nlohmann::json& j, const ImprovementEstimate& e) {
  j = nlohmann::json{{"estimate", e.estimate}, {"ci_low", e.ci_low}, {"ci_high", e.ci_high}};
}

void from_json(const nlohmann::json& j, ImprovementEstimate& e) {
  e.estimate = j.at("estimate").get<double>();
  e.ci_low = j.at("ci_low").get<double>();
  e.ci_high = j.at("ci_high").get<double>();
}

}  // namespace rlmut
