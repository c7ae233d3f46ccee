#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "sentinel/pipeline/analyzer.hpp"
#include "sentinel/pipeline/commands.hpp"
#include "sentinel/pipeline/config.hpp"
#include "sentinel/pipeline/monitor.hpp"

using namespace sentinel;
using namespace sentinel::pipeline;

int main(int argc, char** argv) {
  CLI::App app{"Adversarial contract detection at deployment time"};
  app.require_subcommand(1);

  std::string config_path, snapshot, mode, model;
  std::optional<std::uint64_t> seed, from_block;
  bool no_verified = false;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--snapshot", snapshot, "request/response snapshot (JSONL)");
  app.add_option("--mode", mode, "live | record | replay-strict");
  app.add_option("--model", model, "model bundle directory");
  app.add_option("--seed", seed, "random seed");
  app.add_flag("--no-verified-feature", no_verified, "drop the verified column (ablation)");
  app.add_option("--from-block", from_block, "first block to scan");
  app.add_option("--set", sets, "extra configuration as key=value");

  auto* analyze = app.add_subcommand("analyze", "analyze one contract (address or bytecode file)");
  std::string target;
  AnalyzeOutput analyze_out;
  analyze->add_option("target", target, "0x address or bytecode file")->required();
  analyze->add_option("--report", analyze_out.report_path, "write the JSON report here");
  analyze->add_flag("--json", analyze_out.json, "print the JSON report instead of the summary");

  auto* monitor = app.add_subcommand("monitor", "scan blocks and raise alerts");

  auto* dataset = app.add_subcommand("dataset-build", "collect labeled feature records");
  std::string dataset_out;
  dataset->add_option("--output,-o", dataset_out, "dataset file")->required();

  auto* train = app.add_subcommand("train", "train a model bundle");
  std::string train_data, train_out;
  train->add_option("--dataset", train_data, "dataset file")->required()->check(CLI::ExistingFile);
  train->add_option("--output,-o", train_out, "bundle directory")->required();

  auto* eval = app.add_subcommand("eval", "evaluate a bundle on the chronological test split");
  std::string eval_data;
  std::size_t cv_splits = 0;
  bool importance = false;
  eval->add_option("--dataset", eval_data, "dataset file")->required()->check(CLI::ExistingFile);
  eval->add_option("--cv", cv_splits, "expanding-window cross-validation with this many splits");
  eval->add_flag("--importance", importance, "permutation feature importance");

  auto* synth = app.add_subcommand("synthesize", "write a synthetic labeled dataset");
  std::size_t contracts = 2000;
  double adv_fraction = 0.1;
  std::string synth_out;
  synth->add_option("--contracts", contracts, "row count");
  synth->add_option("--adversarial-fraction", adv_fraction, "share of adversarial rows");
  synth->add_option("--output,-o", synth_out, "dataset file")->required();

  auto* show = app.add_subcommand("config", "print the effective configuration");

  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
      overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    if (!snapshot.empty()) overrides.emplace_back("snapshot", snapshot);
    if (!mode.empty()) overrides.emplace_back("mode", mode);
    if (!model.empty()) overrides.emplace_back("model", model);
    if (seed) overrides.emplace_back("seed", std::to_string(*seed));
    if (no_verified) overrides.emplace_back("no_verified_feature", "true");
    if (from_block) overrides.emplace_back("from_block", std::to_string(*from_block));
    const auto config = resolve_config(sentinel_environment(), config_path, overrides);

    if (*show) {
      std::cout << config.describe();
      return 0;
    }
    if (*analyze) {
      Analyzer analyzer(config);
      return cmd_analyze(analyzer, target, analyze_out, std::cout);
    }
    if (*monitor) {
      Analyzer analyzer(config);
      const auto s = run_monitor(analyzer, std::cout, std::cerr);
      std::cerr << "events " << s.events << ", alerts " << s.alerts << ", failed " << s.failed << ", gaps " << s.gaps
                << (s.snapshot_exhausted ? ", snapshot exhausted" : "") << "\n";
      return s.producer_error ? kExitError : 0;
    }
    if (*dataset) {
      Analyzer analyzer(config);
      cmd_dataset_build(analyzer, dataset_out, std::cout);
      return 0;
    }
    if (*train) {
      cmd_train(config, train_data, train_out, std::cout);
      return 0;
    }
    if (*eval) {
      const auto m = cv_splits ? EvalMode::CrossValidation : importance ? EvalMode::Importance : EvalMode::Table;
      if (m != EvalMode::CrossValidation && config.model.empty()) throw ConfigError("eval needs --model");
      cmd_eval(config, eval_data, config.model, m, cv_splits, std::cout);
      return 0;
    }
    if (*synth) {
      cmd_synthesize(config, contracts, adv_fraction, synth_out, std::cout);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return 0;
}
