// Acceptance gate: one PASS/FAIL line per criterion, tolerances fixed below.
//
//   rlmut_acceptance [work-dir]
//
// The desk-scale run keeps its artifacts in <work-dir>/desk and resumes from
// them; its wall time is accumulated in <work-dir>/desk/timing.json.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "rlmut/pipeline.hpp"

using namespace rlmut;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kFisherTolerance = 1e-9;
constexpr double kFisherSeconds = 10.0;
constexpr int kFisherMaxRow = 12;
constexpr double kSensitivityTolerance = 0.005;
constexpr int kScoreMatrices = 1000;
constexpr double kScoreTolerance = 1e-12;
constexpr int kGradientNetworks = 20;
constexpr double kGradientTolerance = 1e-4;
constexpr double kDeskSeconds = 2.0 * 3600.0;

int failures = 0;

void line(const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s  %-30s %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

void guarded(const std::string& name, const std::function<void()>& check) {
  try {
    check();
  } catch (const std::exception& e) {
    line(name, false, std::string("threw: ") + e.what());
  }
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

void fisher_equivalence() {
  const auto start = Clock::now();
  double worst = 0.0;
  long tables = 0;
  for (int r1 = 0; r1 <= kFisherMaxRow; ++r1)
    for (int r2 = 0; r2 <= kFisherMaxRow; ++r2) {
      if (r1 + r2 == 0) continue;
      for (int a = 0; a <= r1; ++a)
        for (int c = 0; c <= r2; ++c) {
          const double got = fisher_exact(a, r1 - a, c, r2 - c);
          worst = std::max(worst, std::abs(got - oracle::fisher(a, r1 - a, c, r2 - c)));
          ++tables;
        }
    }
  const double secs = seconds_since(start);
  line("fisher oracle equivalence", worst < kFisherTolerance && secs < kFisherSeconds,
       std::to_string(tables) + " tables, max |error| " + fmt("%.2e", worst) + ", " +
           fmt("%.2f", secs) + " s");
}

void sensitivity_rows() {
  struct Row {
    double weak, strong, printed;
  };
  const Row rows[] = {{0.50, 0.75, 0.33}, {0.40, 0.44, 0.09}, {0.90, 0.80, 0.00}};
  bool ok = true;
  std::string detail;
  for (const Row& r : rows) {
    const double s = sensitivity(r.weak, r.strong);
    ok = ok && std::abs(s - r.printed) <= kSensitivityTolerance;
    detail += "(" + fmt("%.2f", r.weak) + "," + fmt("%.2f", r.strong) + ")->" + fmt("%.4f", s) +
              " ";
  }
  line("sensitivity formula", ok, detail + "tol " + fmt("%.3f", kSensitivityTolerance));
}

void mutation_score_property() {
  std::mt19937_64 gen(20240611);
  std::uniform_int_distribution<int> ops(1, 8), cfgs(1, 6), kind(0, 3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  bool in_range = true;
  for (int m = 0; m < kScoreMatrices; ++m) {
    std::vector<std::vector<double>> rates(static_cast<std::size_t>(ops(gen)));
    for (auto& op : rates) {
      op.resize(static_cast<std::size_t>(cfgs(gen)));
      // mix of exact kill fractions and arbitrary rates
      for (double& r : op) {
        const int k = kind(gen);
        r = k == 0 ? 0.0 : k == 1 ? 1.0 : k == 2 ? std::floor(unit(gen) * 11) / 10 : unit(gen);
      }
    }
    const double ms = mutation_score(rates);
    worst = std::max(worst, std::abs(ms - oracle::mutation_score(rates)));
    in_range = in_range && ms >= 0.0 && ms <= 1.0;
  }
  line("mutation score two-level mean", worst <= kScoreTolerance && in_range,
       std::to_string(kScoreMatrices) + " matrices, max |error| " + fmt("%.2e", worst) +
           (in_range ? ", all in [0,1]" : ", OUT OF RANGE"));
}

void gradient_check() {
  std::mt19937_64 gen(77);
  std::uniform_int_distribution<int> width(1, 8), depth(1, 3), batch(1, 6), loss_kind(0, 2);
  std::uniform_real_distribution<double> x(-2.0, 2.0);
  double worst = 0.0;
  for (int k = 0; k < kGradientNetworks; ++k) {
    const int kind = loss_kind(gen);
    const int in = width(gen);
    std::vector<int> sizes{in};
    for (int d = depth(gen); d > 0; --d) sizes.push_back(width(gen));
    const int actions = 2 + k % 3;
    sizes.push_back(kind == 0 ? actions : kind == 1 ? actions + 1 : 1);
    nn::Network net = nn::Network::init(sizes, 1000 + static_cast<std::uint64_t>(k));
    // Random parameters, biases included: zero biases can sit on a ReLU kink.
    std::vector<double> theta = net.parameters();
    std::normal_distribution<double> jitter(0.0, 0.5);
    for (double& t : theta) t += jitter(gen);
    net.set_parameters(theta);
    const int b = batch(gen);
    nn::Matrix inputs(in, b);
    for (int c = 0; c < b; ++c)
      for (int r = 0; r < in; ++r) inputs(r, c) = x(gen);
    nn::Loss loss;
    std::vector<int> picks;
    std::vector<double> u, v, w;
    for (int c = 0; c < b; ++c) {
      picks.push_back(static_cast<int>(gen() % static_cast<unsigned>(actions)));
      u.push_back(x(gen));
      v.push_back(x(gen));
      w.push_back(0.5 + std::abs(x(gen)));
    }
    if (kind == 0) {
      loss = nn::SelectedMseLoss{picks, u};
    } else if (kind == 1) {
      loss = nn::ActorCriticLoss{picks, u, v, 0.5, 0.05};
    } else {
      std::vector<double> labels;
      for (double t : u) labels.push_back(t > 0 ? 1.0 : 0.0);
      loss = nn::LogisticLoss{labels, w};
    }
    worst = std::max(worst, oracle::gradient_check(net, inputs, loss));
  }
  line("gradient check", worst < kGradientTolerance,
       std::to_string(kGradientNetworks) + " networks, max relative error " + fmt("%.2e", worst));
}

void bootstrap_coherence() {
  StatsConfig cfg;
  int cases = 0, agree = 0;
  for (int l = 5; l <= 50; ++l) {
    auto check = [&](std::int64_t so, std::int64_t sm) {
      const ContingencyTable t{so, l - so, sm, l - sm};
      std::vector<bool> o(static_cast<std::size_t>(l)), m(static_cast<std::size_t>(l));
      for (int i = 0; i < l; ++i) {
        o[static_cast<std::size_t>(i)] = i < so;
        m[static_cast<std::size_t>(i)] = i < sm;
      }
      Stream s(hash_words({static_cast<std::uint64_t>(l), static_cast<std::uint64_t>(so),
                           static_cast<std::uint64_t>(sm)}));
      const bool fisher_killed = killed_pair(t, cfg) == PairVerdict::Killed;
      const bool boot_killed = bootstrap_killed(probability_of_improvement(o, m, cfg, s));
      ++cases;
      agree += fisher_killed == boot_killed;
    };
    check(l, 0);  // original always succeeds, mutant never
    check(0, l);  // the reverse
    for (int s = 0; s <= l; ++s) check(s, s);  // identical rows
  }
  line("bootstrap/fisher coherence", agree == cases,
       std::to_string(agree) + "/" + std::to_string(cases) + " extreme tables agree, L=5..50");
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RLMUT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void determinism(const fs::path& work) {
  const fs::path config = fs::path(RLMUT_SOURCE_DIR) / "configs" / "dqn_smoke.json";
  struct Run {
    const char* dir;
    int workers;
  };
  const Run runs[] = {{"det_a", 1}, {"det_b", 1}, {"det_c", 8}};
  std::vector<std::string> reports;
  for (const Run& r : runs) {
    const fs::path dir = work / r.dir;
    fs::remove_all(dir);
    const int code = run_cli("run-all --config " + config.string() + " --artifacts " +
                             dir.string() + " --workers " + std::to_string(r.workers));
    if (code != 0) {
      line("determinism", false, std::string("run-all exited ") + std::to_string(code));
      return;
    }
    reports.push_back(read_file(dir / "report.json"));
  }
  const bool repeat = reports[0] == reports[1];
  const bool workers_same = reports[0] == reports[2];
  line("determinism", repeat && workers_same,
       std::string("repeat run ") + (repeat ? "identical" : "DIFFERS") + ", workers 1 vs 8 " +
           (workers_same ? "identical" : "DIFFERS") + " (" + std::to_string(reports[0].size()) +
           " bytes)");
}

void identity_mutation() {
  Hyperparameters hp = Hyperparameters::defaults(Algorithm::DQN);
  hp.total_steps = 5000;
  hp.learning_starts = 500;
  hp.target_update_interval = 250;
  const StatsConfig stats;
  const int n = 5;
  int runs = 0, equivalent = 0;
  for (std::uint64_t root : {1ULL, 2ULL}) {
    std::vector<std::vector<EpisodeOutcome>> orig(n), mut(n);
    for (int i = 0; i < n; ++i) {
      const std::uint64_t seed = derive_seed(root, SeedPhase::Train, std::nullopt, 0, i);
      const TrainResult o = train(EnvKind::CartPole, hp, seed);
      // the no-op mutant: same hyperparameters, same seed
      const TrainResult m = train(EnvKind::CartPole, hp, seed);
      std::vector<EnvConfig> trs = o.log.trs();
      Stream pick(derive_seed(root, SeedPhase::Replay, std::nullopt, 0, i));
      std::vector<EnvConfig> sample;
      for (int k = 0; k < 100; ++k) sample.push_back(trs[pick.uniform_index(trs.size())]);
      orig[static_cast<std::size_t>(i)] = evaluate(o.agent, EnvKind::CartPole, sample);
      mut[static_cast<std::size_t>(i)] = evaluate(m.agent, EnvKind::CartPole, sample);
    }
    const ReplayAnalysis a = analyze_replay(orig, mut, stats);
    const ConfigVerdict v{MutantSpec{OperatorId::SDF, 0, hp.gamma}, a.killable, a.trivial};
    const Selection s = select_representative(hp.gamma, std::span(&v, 1));
    ++runs;
    equivalent += !a.killable && s.status == SelectionStatus::LikelyEquivalent;
  }
  line("identity mutation", equivalent == runs,
       std::to_string(equivalent) + "/" + std::to_string(runs) +
           " no-op mutations likely-equivalent (n=5, 100 replay configs)");
}

double stored_seconds(const fs::path& f) {
  if (!fs::exists(f)) return 0.0;
  return nlohmann::json::parse(read_file(f)).at("seconds").get<double>();
}

std::optional<MutationReport> desk_run(const fs::path& work) {
  PipelineConfig cfg = load_config(fs::path(RLMUT_SOURCE_DIR) / "configs" / "desk.json");
  cfg.artifacts = (work / "desk").string();
  cfg.workers = workers();
  const fs::path timing = work / "desk" / "timing.json";
  const auto start = Clock::now();
  MutationReport rep = Pipeline(cfg, [](const std::string& s) {
                         std::fprintf(stderr, "%s\n", s.c_str());
                       }).run_all();
  const double total = stored_seconds(timing) + seconds_since(start);
  write_file_atomic(timing, nlohmann::json{{"seconds", total}}.dump() + "\n");

  const OperatorReport* nei = nullptr;
  for (const OperatorReport& op : rep.operators)
    if (op.op == OperatorId::NEI) nei = &op;
  int nei_ok = 0;
  if (nei)
    for (const ConfigReport& c : nei->configs) nei_ok += c.killable && !c.trivial;

  std::string sensitive;
  for (const OperatorReport& op : rep.operators) {
    if (!op.representative || !op.sensitivity) continue;
    if (op.scores.at("strong") >= op.scores.at("weak") && *op.sensitivity > 0.0)
      sensitive += std::string(sensitive.empty() ? "" : ",") + std::string(to_string(op.op));
  }
  const bool scored = !rep.empty_scope;
  const double ms_w = scored ? rep.mutation_score.at("weak") : 0.0;
  const double ms_s = scored ? rep.mutation_score.at("strong") : 0.0;
  const bool pass = total < kDeskSeconds && nei_ok >= 1 && scored && ms_s >= ms_w &&
                    !sensitive.empty();
  line("desk-scale end-to-end", pass,
       fmt("%.0f", total) + " s; NEI killable non-trivial " + std::to_string(nei_ok) +
           "; MS weak " + fmt("%.3f", ms_w) + " strong " + fmt("%.3f", ms_s) +
           "; sensitivity>0 for {" + sensitive + "}");
  return rep;
}

void pairing(const MutationReport& rep) {
  std::size_t pairs = 0, shared = 0, literal = 0;
  for (const OperatorReport& op : rep.operators)
    for (const ConfigReport& c : op.configs)
      for (const PairingCheck& p : c.pairing) {
        ++pairs;
        shared += p.shared_prefix;
        literal += p.mutant_is_prefix;
      }
  line("pairing contract", pairs > 0 && literal == pairs,
       std::to_string(literal) + "/" + std::to_string(pairs) +
           " mutant TRS are prefixes of the original's; " + std::to_string(shared) + "/" +
           std::to_string(pairs) + " share a common prefix with it");
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_work");
  fs::create_directories(work);

  guarded("fisher oracle equivalence", fisher_equivalence);
  guarded("sensitivity formula", sensitivity_rows);
  guarded("mutation score two-level mean", mutation_score_property);
  guarded("gradient check", gradient_check);
  guarded("bootstrap/fisher coherence", bootstrap_coherence);
  guarded("identity mutation", identity_mutation);
  guarded("determinism", [&] { determinism(work); });
  std::optional<MutationReport> desk;
  guarded("desk-scale end-to-end", [&] { desk = desk_run(work); });
  if (desk) {
    guarded("pairing contract", [&] { pairing(*desk); });
  } else {
    line("pairing contract", false, "no desk-scale report");
  }
  std::printf("%s: %d failing\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
