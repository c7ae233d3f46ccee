#include "pipeline_fixtures.hpp"

#include <set>
#include <unistd.h>

#include "sentinel/common/text.hpp"
#include "sentinel/pipeline/analyzer.hpp"
#include "sentinel/pipeline/commands.hpp"

namespace sentinel::testing {

TempDir::TempDir(const std::string& name) {
  path = std::filesystem::temp_directory_path() / ("sentinel_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(path);
  std::filesystem::create_directories(path);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path, ec);
}

ml::TransformerConfig small_transformer() {
  ml::TransformerConfig t;
  t.d_model = 16;
  t.heads = 2;
  t.layers = 2;
  t.d_ff = 32;
  t.max_length = 128;
  t.epochs = 8;
  t.learning_rate = 3e-3;
  return t;
}

ml::EnsembleConfig small_ensemble_config(std::uint64_t seed) {
  ml::EnsembleConfig c;
  c.seed = seed;
  c.transformer = small_transformer();
  c.candidates.rf.trees = 30;
  c.candidates.gbt.rounds = 60;
  return c;
}

pipeline::PipelineConfig scenario_config(const TempDir& dir, chain::Mode mode, const std::string& snapshot) {
  pipeline::PipelineConfig c;
  c.mode = mode;
  c.snapshot = snapshot;
  c.label_db = dir.file("labels.csv");
  write_file(c.label_db, scenario_labels());
  c.workers = 1;
  c.initial_backoff_ms = 0;
  c.alerts = dir.file("alerts.jsonl");
  return c;
}

std::vector<features::FeatureRecord> scenario_records(std::uint64_t seed, std::size_t blocks) {
  auto fake = std::make_shared<FakeChain>();
  const auto sc = populate_scenario(*fake, seed, blocks);
  fake->set_head(sc.last_block);
  TempDir dir("records" + std::to_string(seed));
  auto cfg = scenario_config(dir, chain::Mode::Live);
  cfg.from_block = sc.first_block;
  cfg.to_block = sc.last_block;
  pipeline::Analyzer analyzer(cfg, fake, nullptr);
  const std::set<Address> adversarial(sc.adversarial.begin(), sc.adversarial.end());
  std::vector<features::FeatureRecord> out;
  for (const auto& ev : pipeline::collect_events(analyzer)) {
    auto r = analyzer.analyze_event(ev);
    if (!r.ok) throw std::runtime_error("scenario analysis failed for " + r.record.contract_id);
    r.record.label = adversarial.contains(ev.contract_address) ? 1 : 0;
    out.push_back(r.record);
  }
  return out;
}

std::shared_ptr<const ml::Ensemble> toy_model() {
  static const auto model =
      std::make_shared<const ml::Ensemble>(ml::train_ensemble(scenario_records(11, 80), small_ensemble_config(5)));
  return model;
}

}  // namespace sentinel::testing
