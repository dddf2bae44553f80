#include "rlmut/testgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rlmut/error.hpp"
#include "rlmut/rng.hpp"

namespace rlmut {

namespace {

enum StreamKey : std::uint64_t {
  kRandomStream = 11,
  kStrongStream = 13,
  kPredictorInit = 17,
  kPredictorShuffle = 19,
};

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

nn::Matrix scaled_inputs(std::span<const EnvConfig> configs, const std::vector<double>& lower,
                         const std::vector<double>& upper) {
  const std::size_t width = lower.size();
  nn::Matrix x(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(configs.size()));
  for (std::size_t c = 0; c < configs.size(); ++c) {
    if (configs[c].values.size() != width)
      throw ValidationError("failure predictor: config width " +
                            std::to_string(configs[c].values.size()) + ", expected " +
                            std::to_string(width));
    for (std::size_t d = 0; d < width; ++d) {
      const double span = upper[d] - lower[d];
      x(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(c)) =
          span > 0.0 ? (configs[c].values[d] - lower[d]) / span : 0.0;
    }
  }
  return x;
}

}  // namespace

std::string_view to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::Random:
      return "random";
    case GeneratorKind::Weak:
      return "weak";
    case GeneratorKind::Strong:
      return "strong";
  }
  return "?";
}

GeneratorKind generator_kind_from_string(std::string_view name) {
  if (name == "random") return GeneratorKind::Random;
  if (name == "weak") return GeneratorKind::Weak;
  if (name == "strong") return GeneratorKind::Strong;
  throw ValidationError("unknown generator '" + std::string(name) + "'");
}

GeneratorSpec GeneratorSpec::random(int count, std::uint64_t seed) {
  GeneratorSpec s;
  s.kind = GeneratorKind::Random;
  s.count = count;
  s.seed = seed;
  return s;
}

GeneratorSpec GeneratorSpec::weak(int pool, int select, std::uint64_t seed) {
  GeneratorSpec s;
  s.kind = GeneratorKind::Weak;
  s.pool = pool;
  s.select = select;
  s.seed = seed;
  return s;
}

GeneratorSpec GeneratorSpec::strong(int count, int candidates, std::uint64_t seed) {
  GeneratorSpec s;
  s.kind = GeneratorKind::Strong;
  s.count = count;
  s.candidates = candidates;
  s.seed = seed;
  return s;
}

int GeneratorSpec::suite_size() const { return kind == GeneratorKind::Weak ? select : count; }

void validate(const GeneratorSpec& spec) {
  const std::string where = "generator " + std::string(to_string(spec.kind));
  switch (spec.kind) {
    case GeneratorKind::Random:
      if (spec.count < 1) throw ValidationError(where + ": count must be at least 1");
      break;
    case GeneratorKind::Weak:
      if (spec.pool < 1) throw ValidationError(where + ": pool must be at least 1");
      if (spec.select < 1) throw ValidationError(where + ": select must be at least 1");
      if (spec.select > spec.pool) throw ValidationError(where + ": select exceeds pool");
      break;
    case GeneratorKind::Strong:
      if (spec.count < 1) throw ValidationError(where + ": count must be at least 1");
      if (spec.candidates < 1)
        throw ValidationError(where + ": candidates must be at least 1");
      break;
  }
}

void to_json(nlohmann::json& j, const GeneratorSpec& spec) {
  j = nlohmann::json{{"kind", to_string(spec.kind)}, {"seed", spec.seed}};
  switch (spec.kind) {
    case GeneratorKind::Random:
      j["count"] = spec.count;
      break;
    case GeneratorKind::Weak:
      j["pool"] = spec.pool;
      j["select"] = spec.select;
      break;
    case GeneratorKind::Strong:
      j["count"] = spec.count;
      j["candidates"] = spec.candidates;
      break;
  }
}

void from_json(const nlohmann::json& j, GeneratorSpec& spec) {
  spec = GeneratorSpec{};
  spec.kind = generator_kind_from_string(j.at("kind").get<std::string>());
  spec.seed = j.value("seed", std::uint64_t{0});
  spec.count = j.value("count", spec.count);
  spec.pool = j.value("pool", spec.pool);
  spec.select = j.value("select", spec.select);
  spec.candidates = j.value("candidates", spec.candidates);
  validate(spec);
}

std::vector<EnvConfig> random_generator(EnvKind kind, int count, std::uint64_t seed) {
  if (count < 1) throw ValidationError("random generator: count must be at least 1");
  Stream stream(hash_words({seed, kRandomStream}));
  std::vector<EnvConfig> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out.push_back(sample_config(kind, stream));
  return out;
}

std::vector<std::size_t> rank_by_score(std::span<const double> scores, std::size_t select) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(std::min(select, order.size()));
  return order;
}

std::vector<double> weak_scores(EnvKind kind, std::span<const EnvConfig> pool,
                                std::span<const TrainedAgent> originals) {
  if (originals.empty()) throw ValidationError("weak generator: no original agents");
  std::vector<double> scores(pool.size(), 0.0);
  for (const TrainedAgent& agent : originals) {
    const auto outcomes = evaluate(agent, kind, pool);
    for (std::size_t c = 0; c < pool.size(); ++c) scores[c] += outcomes[c].min_qoc;
  }
  for (double& s : scores) s /= static_cast<double>(originals.size());
  return scores;
}

std::vector<EnvConfig> weak_generator(const GeneratorSpec& spec, EnvKind kind,
                                      std::span<const TrainedAgent> originals) {
  if (spec.kind != GeneratorKind::Weak) throw ValidationError("weak generator: wrong spec kind");
  validate(spec);
  const auto pool = random_generator(kind, spec.pool, spec.seed);
  const auto scores = weak_scores(kind, pool, originals);
  std::vector<EnvConfig> out;
  for (std::size_t idx : rank_by_score(scores, static_cast<std::size_t>(spec.select)))
    out.push_back(pool[idx]);
  return out;
}

double FailurePredictor::failure_probability(std::span<const double> config) const {
  EnvConfig c{std::vector<double>(config.begin(), config.end())};
  return failure_probabilities(std::span(&c, 1)).front();
}

std::vector<double> FailurePredictor::failure_probabilities(
    std::span<const EnvConfig> configs) const {
  if (degenerate) {
    for (const EnvConfig& c : configs) {
      if (c.values.size() != lower.size())
        throw ValidationError("failure predictor: config width mismatch");
    }
    return std::vector<double>(configs.size(), constant_probability);
  }
  const nn::Matrix logits = network.forward_batch(scaled_inputs(configs, lower, upper));
  std::vector<double> p(configs.size());
  for (std::size_t c = 0; c < configs.size(); ++c)
    p[c] = sigmoid(logits(0, static_cast<Eigen::Index>(c)));
  return p;
}

void to_json(nlohmann::json& j, const FailurePredictor& p) {
  j = nlohmann::json{{"lower", p.lower},
                     {"upper", p.upper},
                     {"training_size", p.training_size},
                     {"training_accuracy", p.training_accuracy},
                     {"epochs", p.epochs},
                     {"final_loss", p.final_loss},
                     {"degenerate", p.degenerate},
                     {"constant_probability", p.constant_probability}};
  if (!p.degenerate) j["network"] = p.network;
}

void from_json(const nlohmann::json& j, FailurePredictor& p) {
  p.lower = j.at("lower").get<std::vector<double>>();
  p.upper = j.at("upper").get<std::vector<double>>();
  p.training_size = j.at("training_size").get<std::size_t>();
  p.training_accuracy = j.at("training_accuracy").get<double>();
  p.epochs = j.at("epochs").get<int>();
  p.final_loss = j.at("final_loss").get<double>();
  p.degenerate = j.at("degenerate").get<bool>();
  p.constant_probability = j.at("constant_probability").get<double>();
  if (!p.degenerate) p.network = j.at("network").get<nn::Network>();
}

FailurePredictor train_failure_predictor(
    std::span<const std::pair<EnvConfig, EpisodeOutcome>> replay, std::uint64_t seed,
    const PredictorConfig& cfg) {
  if (replay.empty()) throw ValidationError("failure predictor: empty replay");
  const std::size_t width = replay.front().first.values.size();
  if (width == 0) throw ValidationError("failure predictor: empty configs");

  FailurePredictor p;
  p.training_size = replay.size();
  p.lower.assign(width, 0.0);
  p.upper.assign(width, 0.0);
  std::vector<EnvConfig> configs;
  std::vector<double> labels;
  configs.reserve(replay.size());
  labels.reserve(replay.size());
  for (const auto& [config, outcome] : replay) {
    if (config.values.size() != width)
      throw ValidationError("failure predictor: configs of different widths");
    configs.push_back(config);
    labels.push_back(outcome.success ? 0.0 : 1.0);
  }
  for (std::size_t d = 0; d < width; ++d) {
    p.lower[d] = p.upper[d] = configs.front().values[d];
    for (const EnvConfig& c : configs) {
      p.lower[d] = std::min(p.lower[d], c.values[d]);
      p.upper[d] = std::max(p.upper[d], c.values[d]);
    }
  }

  const auto failures = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1.0));
  if (failures == 0 || failures == labels.size()) {
    p.degenerate = true;
    p.constant_probability = failures == 0 ? 0.0 : 1.0;
    p.training_accuracy = 1.0;
    return p;
  }

  const double n = static_cast<double>(labels.size());
  const double w_fail = n / (2.0 * static_cast<double>(failures));
  const double w_succ = n / (2.0 * static_cast<double>(labels.size() - failures));
  std::vector<double> weights(labels.size());
  for (std::size_t k = 0; k < labels.size(); ++k) weights[k] = labels[k] > 0.5 ? w_fail : w_succ;

  std::vector<int> sizes{static_cast<int>(width)};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(1);
  p.network = nn::Network::init(sizes, hash_words({seed, kPredictorInit}));

  nn::OptimizerConfig opt_cfg;
  opt_cfg.kind = nn::OptimizerKind::Adam;
  opt_cfg.learning_rate = cfg.learning_rate;
  nn::Optimizer optimizer(opt_cfg, p.network);

  const nn::Matrix inputs = scaled_inputs(configs, p.lower, p.upper);
  const nn::LogisticLoss full_loss{labels, weights};
  Stream shuffle(hash_words({seed, kPredictorShuffle}));
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch = static_cast<std::size_t>(std::max(1, cfg.batch_size));

  double loss = nn::evaluate_loss(full_loss, p.network.forward_batch(inputs), nullptr);
  int epoch = 0;
  while (epoch < cfg.max_epochs && loss >= cfg.stop_loss) {
    for (std::size_t k = order.size(); k > 1; --k)
      std::swap(order[k - 1], order[shuffle.uniform_index(k)]);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      nn::Matrix xb(inputs.rows(), static_cast<Eigen::Index>(end - start));
      nn::LogisticLoss lb;
      for (std::size_t k = start; k < end; ++k) {
        xb.col(static_cast<Eigen::Index>(k - start)) = inputs.col(static_cast<Eigen::Index>(order[k]));
        lb.labels.push_back(labels[order[k]]);
        lb.weights.push_back(weights[order[k]]);
      }
      nn::backprop_step(p.network, optimizer, xb, lb);
    }
    ++epoch;
    loss = nn::evaluate_loss(full_loss, p.network.forward_batch(inputs), nullptr);
  }
  p.epochs = epoch;
  p.final_loss = loss;

  const nn::Matrix logits = p.network.forward_batch(inputs);
  std::size_t correct = 0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const bool predicted_failure = logits(0, static_cast<Eigen::Index>(k)) >= 0.0;
    if (predicted_failure == (labels[k] > 0.5)) ++correct;
  }
  p.training_accuracy = static_cast<double>(correct) / n;
  return p;
}

std::vector<EnvConfig> strong_candidates(const GeneratorSpec& spec, EnvKind kind, int batch) {
  Stream stream(hash_words({spec.seed, kStrongStream, static_cast<std::uint64_t>(batch)}));
  std::vector<EnvConfig> out;
  out.reserve(static_cast<std::size_t>(spec.candidates));
  for (int k = 0; k < spec.candidates; ++k) out.push_back(sample_config(kind, stream));
  return out;
}

std::vector<EnvConfig> strong_generator(const GeneratorSpec& spec, EnvKind kind,
                                        const ConfigScorer& score) {
  if (spec.kind != GeneratorKind::Strong)
    throw ValidationError("strong generator: wrong spec kind");
  validate(spec);
  std::vector<EnvConfig> out;
  out.reserve(static_cast<std::size_t>(spec.count));
  for (int b = 0; b < spec.count; ++b) {
    auto candidates = strong_candidates(spec, kind, b);
    const auto scores = score(candidates);
    if (scores.size() != candidates.size())
      throw ContractError("strong generator: scorer returned the wrong number of scores");
    std::size_t best = 0;
    for (std::size_t k = 1; k < scores.size(); ++k)
      if (scores[k] > scores[best]) best = k;
    out.push_back(std::move(candidates[best]));
  }
  return out;
}

std::vector<EnvConfig> strong_generator(const GeneratorSpec& spec, EnvKind kind,
                                        const FailurePredictor& predictor) {
  if (predictor.lower.size() != config_width(kind))
    throw ValidationError("strong generator: predictor input width does not match the env");
  return strong_generator(spec, kind, [&](std::span<const EnvConfig> configs) {
    return predictor.failure_probabilities(configs);
  });
}

void to_json(nlohmann::json& j, const Suite& s) {
  j = nlohmann::json{{"generator", s.generator}, {"configs", s.configs}};
}

void from_json(const nlohmann::json& j, Suite& s) {
  s.generator = j.at("generator").get<GeneratorSpec>();
  s.configs = j.at("configs").get<std::vector<EnvConfig>>();
}

}  // namespace rlmut
