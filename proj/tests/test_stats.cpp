#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "rlmut/error.hpp"
#include "rlmut/stats.hpp"

using namespace rlmut;

namespace {

ContingencyTable table(std::int64_t so, std::int64_t fo, std::int64_t sm, std::int64_t fm) {
  return ContingencyTable{so, fo, sm, fm};
}

PairResult pair_with(PairVerdict v) {
  PairResult r;
  r.verdict = v;
  return r;
}

KillRecord record(int killed, int weaker, int not_killed) {
  std::vector<PairResult> pairs;
  for (int i = 0; i < killed; ++i) pairs.push_back(pair_with(PairVerdict::Killed));
  for (int i = 0; i < weaker; ++i) pairs.push_back(pair_with(PairVerdict::WeakerOriginal));
  for (int i = 0; i < not_killed; ++i) pairs.push_back(pair_with(PairVerdict::NotKilled));
  return killing_rate(pairs, StatsConfig{});
}

}  // namespace

TEST(Fisher, IdenticalRowsGiveOne) {
  EXPECT_DOUBLE_EQ(fisher_exact(table(10, 0, 10, 0)), 1.0);
  EXPECT_DOUBLE_EQ(fisher_exact(table(5, 5, 5, 5)), 1.0);
}

TEST(Fisher, EightTwoTable) {
  // margins 10/10/10/10: weights C(10,x)^2, tail x in {0,1,2,8,9,10}
  const double expected = 4252.0 / 184756.0;
  EXPECT_NEAR(oracle::fisher(8, 2, 2, 8), expected, 1e-15);
  EXPECT_NEAR(fisher_exact(table(8, 2, 2, 8)), expected, 1e-12);
  EXPECT_NEAR(fisher_exact(table(8, 2, 2, 8)), 0.023, 5e-4);
}

TEST(Fisher, SeparatedFiftyIsTiny) {
  const double p = fisher_exact(table(50, 0, 0, 50));
  EXPECT_LT(p, 1e-12);
  EXPECT_GT(p, 0.0);
  // 2 / C(100, 50)
  EXPECT_NEAR(std::log(p), std::log(2.0) - std::lgamma(101.0) + 2 * std::lgamma(51.0), 1e-9);
  EXPECT_EQ(killed_pair(table(50, 0, 0, 50), StatsConfig{}), PairVerdict::Killed);
}

TEST(Fisher, MatchesEnumerationOnSmallTables) {
  double worst = 0.0;
  for (int r1 = 1; r1 <= 8; ++r1)
    for (int r2 = 1; r2 <= 8; ++r2)
      for (int a = 0; a <= r1; ++a)
        for (int c = 0; c <= r2; ++c)
          worst = std::max(worst, std::abs(fisher_exact(a, r1 - a, c, r2 - c) -
                                           oracle::fisher(a, r1 - a, c, r2 - c)));
  EXPECT_LT(worst, 1e-9);
}

TEST(Fisher, SymmetricUnderRowAndColumnSwaps) {
  for (int l = 1; l <= 15; ++l)
    for (int so = 0; so <= l; ++so)
      for (int sm = 0; sm <= l; ++sm) {
        const double p = fisher_exact(table(so, l - so, sm, l - sm));
        EXPECT_NEAR(p, fisher_exact(table(sm, l - sm, so, l - so)), 1e-12);
        EXPECT_NEAR(p, fisher_exact(table(l - so, so, l - sm, sm)), 1e-12);
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0);
      }
}

TEST(Fisher, LargeSuitesStayFinite) {
  const double p = fisher_exact(table(5000, 5000, 4900, 5100));
  EXPECT_TRUE(std::isfinite(p));
  EXPECT_GT(p, 0.0);
  EXPECT_LT(p, 1.0);
  EXPECT_EQ(fisher_exact(table(10000, 0, 10000, 0)), 1.0);
}

TEST(Fisher, RejectsEmptyAndUnequalTables) {
  EXPECT_THROW(fisher_exact(table(0, 0, 0, 0)), ValidationError);
  EXPECT_THROW(fisher_exact(table(3, 1, 1, 1)), ValidationError);
  EXPECT_THROW(fisher_exact(table(-1, 2, 1, 0)), ValidationError);
}

TEST(LogFactorial, AgreesWithLgamma) {
  for (std::int64_t n : {0, 1, 2, 10, 170, 9999, 10000, 10001, 50000})
    EXPECT_NEAR(static_cast<double>(log_factorial(n)), std::lgamma(static_cast<double>(n) + 1.0),
                1e-9 * std::max(1.0, std::lgamma(static_cast<double>(n) + 1.0)));
}

TEST(KilledPair, Examples) {
  const StatsConfig cfg;
  EXPECT_EQ(killed_pair(table(10, 0, 0, 10), cfg), PairVerdict::Killed);
  EXPECT_EQ(killed_pair(table(5, 5, 5, 5), cfg), PairVerdict::NotKilled);
  EXPECT_EQ(killed_pair(table(4, 6, 9, 1), cfg), PairVerdict::WeakerOriginal);
  // equal failures are not "weaker"
  EXPECT_EQ(killed_pair(table(3, 7, 3, 7), cfg), PairVerdict::NotKilled);
}

TEST(KilledPair, WeakerOriginalWinsEvenWhenSignificant) {
  EXPECT_EQ(killed_pair(table(0, 20, 20, 0), StatsConfig{}), PairVerdict::WeakerOriginal);
}

TEST(KilledPair, ThresholdIsStrict) {
  StatsConfig cfg;
  cfg.alpha = fisher_exact(table(8, 2, 2, 8));
  EXPECT_EQ(killed_pair(table(8, 2, 2, 8), cfg), PairVerdict::NotKilled);
  cfg.alpha = std::nextafter(cfg.alpha, 1.0);
  EXPECT_EQ(killed_pair(table(8, 2, 2, 8), cfg), PairVerdict::Killed);
}

TEST(KillingRate, HalfIsKilled) {
  const KillRecord r = record(4, 2, 4);
  EXPECT_EQ(r.n(), 10);
  EXPECT_EQ(r.weaker, 2);
  EXPECT_DOUBLE_EQ(r.rate, 0.5);
  EXPECT_TRUE(r.killed);
  EXPECT_FALSE(r.degenerate);
}

TEST(KillingRate, NoneKilled) {
  const KillRecord r = record(0, 0, 10);
  EXPECT_DOUBLE_EQ(r.rate, 0.0);
  EXPECT_FALSE(r.killed);
}

TEST(KillingRate, AllWeakerIsDegenerate) {
  const KillRecord r = record(0, 3, 0);
  EXPECT_TRUE(r.degenerate);
  EXPECT_FALSE(r.killed);
  EXPECT_DOUBLE_EQ(r.rate, 0.0);
}

TEST(KillingRate, JustBelowHalf) {
  const KillRecord r = record(4, 1, 5);
  EXPECT_NEAR(r.rate, 4.0 / 9.0, 1e-15);
  EXPECT_FALSE(r.killed);
}

TEST(KillingRate, RejectsEmpty) {
  EXPECT_THROW(killing_rate(std::vector<PairResult>{}, StatsConfig{}), ValidationError);
}

TEST(Triviality, Examples) {
  const StatsConfig cfg;
  std::vector<TrivialityPair> all_38(5, TrivialityPair{40, 38});
  auto t = triviality(all_38, cfg);
  EXPECT_DOUBLE_EQ(t.ratio, 0.95);
  EXPECT_TRUE(t.trivial);

  std::vector<TrivialityPair> exact{{10, 9}, {10, 9}};
  t = triviality(exact, cfg);
  EXPECT_DOUBLE_EQ(t.ratio, 0.9);
  EXPECT_FALSE(t.trivial);

  std::vector<TrivialityPair> never{{30, 0}, {12, 0}};
  t = triviality(never, cfg);
  EXPECT_DOUBLE_EQ(t.ratio, 0.0);
  EXPECT_FALSE(t.trivial);
}

TEST(Triviality, SkipsPairsWithoutOriginalSuccess) {
  std::vector<TrivialityPair> pairs{{0, 0}, {10, 10}, {20, 10}};
  const auto t = triviality(pairs, StatsConfig{});
  EXPECT_EQ(t.pairs_used, 2);
  EXPECT_DOUBLE_EQ(t.ratio, 0.75);
}

TEST(Triviality, Errors) {
  std::vector<TrivialityPair> skipped{{0, 0}, {0, 0}};
  EXPECT_THROW(triviality(skipped, StatsConfig{}), ValidationError);
  std::vector<TrivialityPair> bad{{3, 4}};
  EXPECT_THROW(triviality(bad, StatsConfig{}), ValidationError);
}

TEST(MutationScore, Examples) {
  EXPECT_DOUBLE_EQ(mutation_score({{1.0, 0.5}, {0.0}}), 0.375);
  EXPECT_DOUBLE_EQ(mutation_score({{1.0}}), 1.0);
  EXPECT_DOUBLE_EQ(mutation_score({{0.0, 0.0}, {0.0}}), 0.0);
  std::map<std::string, std::vector<double>> named{{"A", {1.0, 0.5}}, {"B", {0.0}}};
  EXPECT_DOUBLE_EQ(mutation_score(named), 0.375);
}

TEST(MutationScore, Errors) {
  EXPECT_THROW(mutation_score(std::vector<std::vector<double>>{}), ValidationError);
  EXPECT_THROW(mutation_score({{0.5}, {}}), ValidationError);
  EXPECT_THROW(mutation_score({{1.5}}), ValidationError);
}

TEST(MutationScore, AddingAnOperatorAtTheMeanKeepsIt) {
  Stream s(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<double>> rates(1 + s.uniform_index(5));
    for (auto& op : rates) {
      op.resize(1 + s.uniform_index(5));
      for (double& r : op) r = s.uniform01();
    }
    const double ms = mutation_score(rates);
    EXPECT_NEAR(ms, oracle::mutation_score(rates), 1e-12);
    rates.push_back(std::vector<double>(1 + s.uniform_index(4), ms));
    EXPECT_NEAR(mutation_score(rates), ms, 1e-12);
  }
}

TEST(Sensitivity, ReferenceRows) {
  EXPECT_NEAR(sensitivity(0.50, 0.75), 0.33, 0.005);
  EXPECT_NEAR(sensitivity(0.40, 0.44), 0.09, 0.005);
  EXPECT_NEAR(sensitivity(0.90, 0.80), 0.00, 0.005);
}

TEST(Sensitivity, Bounds) {
  EXPECT_EQ(sensitivity(0.0, 0.0), 0.0);
  EXPECT_EQ(sensitivity(0.3, 0.3), 0.0);
  EXPECT_EQ(sensitivity(0.0, 1.0), 1.0);
  for (double w = 0.0; w <= 1.0; w += 0.05)
    for (double st = 0.0; st <= 1.0; st += 0.05) {
      const double v = sensitivity(w, st);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  EXPECT_THROW(sensitivity(-0.1, 0.5), ValidationError);
  EXPECT_THROW(sensitivity(0.1, 1.5), ValidationError);
}

TEST(Improvement, Dominance) {
  Stream s(1);
  const auto e = probability_of_improvement(std::vector<bool>(20, true),
                                            std::vector<bool>(20, false), StatsConfig{}, s);
  EXPECT_DOUBLE_EQ(e.estimate, 1.0);
  EXPECT_DOUBLE_EQ(e.ci_low, 1.0);
  EXPECT_TRUE(bootstrap_killed(e));
}

TEST(Improvement, IdenticalListsGiveHalf) {
  Stream s(2);
  std::vector<bool> v{true, false, true, true, false, true, false, false};
  const auto e = probability_of_improvement(v, v, StatsConfig{}, s);
  EXPECT_DOUBLE_EQ(e.estimate, 0.5);
  EXPECT_LE(e.ci_low, 0.5);
  EXPECT_GE(e.ci_high, 0.5);
  EXPECT_FALSE(bootstrap_killed(e));
}

TEST(Improvement, IntervalContainsEstimateAndIsSeeded) {
  Stream pick(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<bool> o(5 + pick.uniform_index(40)), m(5 + pick.uniform_index(40));
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = pick.uniform01() < 0.7;
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = pick.uniform01() < 0.4;
    StatsConfig cfg;
    cfg.bootstrap_samples = 300;
    Stream a(trial), b(trial);
    const auto x = probability_of_improvement(o, m, cfg, a);
    const auto y = probability_of_improvement(o, m, cfg, b);
    EXPECT_LE(x.ci_low, x.estimate);
    EXPECT_LE(x.estimate, x.ci_high);
    EXPECT_GE(x.ci_low, 0.0);
    EXPECT_LE(x.ci_high, 1.0);
    EXPECT_EQ(x.ci_low, y.ci_low);
    EXPECT_EQ(x.ci_high, y.ci_high);
  }
}

TEST(Improvement, EstimateIsTheRateDifference) {
  Stream s(4);
  std::vector<bool> o{true, true, true, false};   // 0.75
  std::vector<bool> m{true, false, false, false};  // 0.25
  const auto e = probability_of_improvement(o, m, StatsConfig{}, s);
  EXPECT_DOUBLE_EQ(e.estimate, 0.75);
}

TEST(Improvement, RejectsEmpty) {
  Stream s(0);
  EXPECT_THROW(probability_of_improvement({}, {true}, StatsConfig{}, s), ValidationError);
}

TEST(StatsConfig, Validation) {
  StatsConfig cfg;
  EXPECT_NO_THROW(validate(cfg));
  cfg.alpha = 1.0;
  EXPECT_THROW(validate(cfg), ValidationError);
  cfg = StatsConfig{};
  cfg.bootstrap_samples = 0;
  EXPECT_THROW(validate(cfg), ValidationError);
  cfg = StatsConfig{};
  cfg.trivial_threshold = 0.0;
  EXPECT_THROW(validate(cfg), ValidationError);
}

TEST(StatsJson, RoundTrip) {
  StatsConfig cfg;
  cfg.alpha = 0.01;
  cfg.bootstrap_samples = 77;
  EXPECT_EQ(nlohmann::json(cfg).get<StatsConfig>(), cfg);

  const KillRecord r = record(3, 1, 2);
  EXPECT_EQ(nlohmann::json(r).get<KillRecord>(), r);

  nlohmann::json bad = cfg;
  bad["beta"] = 1;
  EXPECT_THROW(bad.get<StatsConfig>(), ValidationError);
}
