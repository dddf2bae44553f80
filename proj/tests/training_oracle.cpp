// Full-budget training checks on CartPole with the default DQN settings.
#include <gtest/gtest.h>

#include "rlmut/agents.hpp"
#include "rlmut/testgen.hpp"

using namespace rlmut;

namespace {

double success_rate(const TrainedAgent& agent, const std::vector<EnvConfig>& configs) {
  int wins = 0;
  for (const auto& o : evaluate(agent, EnvKind::CartPole, configs)) wins += o.success;
  return static_cast<double>(wins) / static_cast<double>(configs.size());
}

}  // namespace

TEST(TrainingOracle, DefaultDqnSolvesAndShortBudgetDoesWorse) {
  const auto configs = random_generator(EnvKind::CartPole, 50, 2024);
  const Hyperparameters hp = Hyperparameters::defaults(Algorithm::DQN);
  Hyperparameters cut = hp;
  cut.total_steps = hp.total_steps / 10;

  int lower = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const double full = success_rate(train(EnvKind::CartPole, hp, seed).agent, configs);
    const double short_budget = success_rate(train(EnvKind::CartPole, cut, seed).agent, configs);
    std::printf("seed %llu: default %.2f, 10%% budget %.2f\n",
                static_cast<unsigned long long>(seed), full, short_budget);
    EXPECT_GE(full, 0.9) << "seed " << seed;
    lower += short_budget < full;
  }
  EXPECT_GE(lower, 4);
}
