// rlmut: command-line front end over the mutation-analysis pipeline.
//
//   rlmut run-all --config c.json [--seed N] [--workers N] [--artifacts DIR]
//   rlmut report --config c.json --format csv
//
// Exit codes: 0 success, 1 invalid input or usage, 2 execution failure.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rlmut/error.hpp"
#include "rlmut/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitFailed = 2;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> artifacts;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "pipeline config (JSON)")->required();
  cmd->add_option("--seed", o.seed, "override the root seed");
  cmd->add_option("--workers", o.workers, "override the worker count")
      ->check(CLI::Range(1, 1024));
  cmd->add_option("--artifacts", o.artifacts, "override the artifact directory");
}

rlmut::PipelineConfig resolve(const Overrides& o) {
  rlmut::PipelineConfig cfg = rlmut::load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  if (o.artifacts) cfg.artifacts = *o.artifacts;
  rlmut::validate(cfg);
  return cfg;
}

void progress(const std::string& line) { std::cerr << line << '\n'; }

void write_plots(const rlmut::MutationReport& report, const std::filesystem::path& root) {
  const auto files = rlmut::emit_plots(report, root / "plots");
  if (files.empty()) {
    std::cerr << "warning: report has an empty scope; no plots written\n";
    return;
  }
  for (const auto& f : files) std::cerr << "wrote " << f.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mutation testing for reinforcement-learning agents"};
  app.require_subcommand(1);

  Overrides train_o, mutate_o, replay_o, score_o, report_o, all_o;
  std::string validate_path;
  std::string format = "json";

  auto* train = app.add_subcommand("train", "train the original agents");
  add_common(train, train_o);
  auto* mutate = app.add_subcommand("mutate", "sample mutant configurations and train mutants");
  add_common(mutate, mutate_o);
  auto* replay = app.add_subcommand("replay", "killability and triviality on training configs");
  add_common(replay, replay_o);
  auto* score = app.add_subcommand("score", "build test suites and compute mutation scores");
  add_common(score, score_o);
  auto* report = app.add_subcommand("report", "re-emit the report and its plots");
  add_common(report, report_o);
  report->add_option("--format", format, "report format")
      ->check(CLI::IsMember({"json", "csv"}));
  auto* run_all = app.add_subcommand("run-all", "run every phase in order");
  add_common(run_all, all_o);
  auto* validate = app.add_subcommand("validate-config", "check a config file without running");
  validate->add_option("--config", validate_path, "pipeline config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitInvalid;
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    if (validate->parsed()) {
      const auto cfg = rlmut::load_config(validate_path);
      std::cerr << validate_path << ": ok (" << rlmut::to_string(cfg.env) << ", "
                << rlmut::to_string(cfg.algorithm) << ", n=" << cfg.n << ", "
                << cfg.operators.size() << " operators)\n";
      return kExitOk;
    }
    if (train->parsed()) {
      rlmut::Pipeline(resolve(train_o), progress).train_originals();
    } else if (mutate->parsed()) {
      rlmut::Pipeline(resolve(mutate_o), progress).train_mutants();
    } else if (replay->parsed()) {
      rlmut::Pipeline(resolve(replay_o), progress).replay();
    } else if (score->parsed()) {
      rlmut::Pipeline(resolve(score_o), progress).score();
    } else if (report->parsed()) {
      const auto cfg = resolve(report_o);
      const std::filesystem::path root(cfg.artifacts);
      const auto rep = rlmut::load_report(root / "report.json");
      if (format == "csv") {
        rlmut::write_file_atomic(root / "report.csv", rlmut::report_csv(rep));
        rlmut::write_file_atomic(root / "kills.csv", rlmut::kills_csv(rep));
        std::cerr << "wrote " << (root / "report.csv").string() << '\n';
      } else {
        rlmut::write_file_atomic(root / "report.json", rlmut::report_to_json(rep).dump(2) + "\n");
        std::cerr << "wrote " << (root / "report.json").string() << '\n';
      }
      write_plots(rep, root);
    } else if (run_all->parsed()) {
      rlmut::Pipeline pipeline(resolve(all_o), progress);
      const auto rep = pipeline.run_all();
      write_plots(rep, pipeline.root());
    }
  } catch (const rlmut::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailed;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cerr << "done in " << secs << " s\n";
  return kExitOk;
}
