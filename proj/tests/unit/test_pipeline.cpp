#include <doctest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "contract_builder.hpp"
#include "fake_chain.hpp"
#include "pipeline_fixtures.hpp"
#include "sentinel/common/text.hpp"
#include "sentinel/pipeline/analyzer.hpp"
#include "sentinel/pipeline/commands.hpp"
#include "sentinel/pipeline/config.hpp"
#include "sentinel/pipeline/dataset.hpp"
#include "sentinel/pipeline/monitor.hpp"
#include "sentinel/pipeline/synthetic.hpp"

using namespace sentinel;
using namespace sentinel::pipeline;
using sentinel::testing::FakeChain;
using sentinel::testing::FixtureKind;
using sentinel::testing::TempDir;

namespace {

struct MonitorChain {
  std::shared_ptr<FakeChain> chain = std::make_shared<FakeChain>();
  std::vector<Address> adversarial, benign;
  std::uint64_t first = 100, last = 103;

  MonitorChain() {
    Rng rng(3);
    std::uint16_t actor = 1;
    testing::add_common_signatures(*chain);
    for (std::uint64_t n = first; n <= last; ++n) chain->add_block(n, 1700000000 + static_cast<std::int64_t>(n) * 12);
    benign.push_back(testing::deploy_fixture(*chain, 100, FixtureKind::Benign, rng, actor));
    adversarial.push_back(testing::deploy_fixture(*chain, 101, FixtureKind::Adversarial, rng, actor));
    benign.push_back(testing::deploy_fixture(*chain, 101, FixtureKind::Benign, rng, actor));
    Transaction plain;
    plain.from = testing::fixed_address(0x11);
    plain.to = testing::fixed_address(0x12);
    chain->add_transaction(102, plain, 21000);
    benign.push_back(testing::deploy_fixture(*chain, 103, FixtureKind::Benign, rng, actor));
    chain->set_head(last);
  }
};

PipelineConfig monitor_config(const TempDir& dir, chain::Mode mode, const std::string& alerts, std::size_t workers) {
  auto c = testing::scenario_config(dir, mode, dir.file("snapshot.jsonl"));
  c.from_block = 100;
  c.alerts = dir.file(alerts);
  c.workers = workers;
  return c;
}

}  // namespace

TEST_CASE("config precedence: environment, then file, then overrides") {
  TempDir dir("config");
  write_file(dir.file("c.conf"), "# comment\nseed = 7\nworkers = 3\ntransformer_d_model = 32\n");
  const std::map<std::string, std::string> env = {{"SENTINEL_SEED", "5"}, {"SENTINEL_MIN_UNIQUE_CALLERS", "4"}};
  const auto c = resolve_config(env, dir.file("c.conf"), {{"workers", "2"}});
  CHECK(c.seed == 7);
  CHECK(c.min_unique_callers == 4);
  CHECK(c.workers == 2);
  CHECK(c.transformer.d_model == 32);
  CHECK(c.caller_window_days == 90);

  PipelineConfig d;
  CHECK_THROWS_AS(d.set("no_such_key", "1"), ConfigError);
  CHECK_THROWS_AS(d.set("workers", "-1"), ConfigError);
  CHECK_THROWS_WITH_AS(d.apply_text("seed = 1\nbogus\n", "f.conf"), doctest::Contains("f.conf:2"), ConfigError);
  d.set("mode", "replay-strict");
  CHECK(d.mode == chain::Mode::Replay);

  // describe() is itself valid config text
  PipelineConfig e;
  e.apply_text(c.describe());
  CHECK(e.describe() == c.describe());
}

TEST_CASE("replay configuration without a snapshot path is rejected") {
  TempDir dir("noreplay");
  auto c = testing::scenario_config(dir, chain::Mode::Replay);
  CHECK_THROWS_AS(Analyzer(c, nullptr, nullptr), ConfigError);
}

TEST_CASE("dataset file round trip") {
  auto records = generate_synthetic({.contracts = 40, .seed = 9});
  records[3].label.reset();
  const auto text = write_dataset(records);
  const auto back = read_dataset(text);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(back[i].contract_id == records[i].contract_id);
    CHECK(back[i].deployment == records[i].deployment);
    CHECK(back[i].implementation == records[i].implementation);
    CHECK(back[i].pscft == records[i].pscft);
    CHECK(back[i].label == records[i].label);
    CHECK(back[i].deploy_timestamp == records[i].deploy_timestamp);
  }
  CHECK(write_dataset(back) == text);
  auto bad = text;
  bad.replace(bad.find("\"version\":1"), 11, "\"version\":2");
  CHECK_THROWS(read_dataset(bad));
}

TEST_CASE("synthetic generator matches the target class statistics") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = synthetic_stats(generate_synthetic({.contracts = 2000, .seed = seed}));
    CAPTURE(seed);
    CHECK(s.adv_anonymous > 0.70);
    CHECK(s.adv_verified < 0.02);
    CHECK(s.benign_verified > 0.85);
    CHECK(s.benign_safe > 0.75);
    CHECK(s.adv_flashloan > 0.60);
    CHECK(s.benign_flashloan < 0.01);
  }
}

TEST_CASE("analyze: exit codes follow the verdict") {
  TempDir dir("analyze");
  MonitorChain mc;
  auto cfg = testing::scenario_config(dir, chain::Mode::Live);
  Analyzer analyzer(cfg, mc.chain, testing::toy_model());

  for (const auto& a : mc.benign) {
    const auto r = analyzer.analyze_address(a);
    CAPTURE(a.hex());
    REQUIRE(r.ok);
    REQUIRE(r.prediction);
    CHECK(r.prediction->p_pred < 0.5);
    CHECK(r.exit_code() == kExitBenign);
    CHECK(r.fund.category != fundsource::FundSourceCategory::Anonymous);
  }
  const auto adv = analyzer.analyze_address(mc.adversarial[0]);
  REQUIRE(adv.ok);
  CHECK(adv.prediction->p_pred >= 0.5);
  CHECK(adv.exit_code() == kExitAdversarial);
  CHECK(adv.fund.category == fundsource::FundSourceCategory::Anonymous);
  CHECK(adv.record.implementation.flashloan_callback_count == 1);

  std::ostringstream out;
  CHECK(cmd_analyze(analyzer, mc.adversarial[0].hex(), {dir.file("r.json"), false}, out) == kExitAdversarial);
  CHECK(out.str().find("ADVERSARIAL") != std::string::npos);
  const auto j = Json::parse(read_file(dir.file("r.json")));
  CHECK(j.at("report_version") == kReportVersion);
  CHECK(j.at("prediction").at("label") == 1);

  // unknown contract, empty and missing files
  CHECK(analyzer.analyze_address(testing::fixed_address(0x99)).exit_code() == kExitError);
  write_file(dir.file("empty.bin"), "");
  std::ostringstream o2;
  CHECK(cmd_analyze(analyzer, dir.file("empty.bin"), {}, o2) == kExitError);
  CHECK(cmd_analyze(analyzer, dir.file("missing.bin"), {}, o2) == kExitError);
}

TEST_CASE("analyze: timings cover the whole analysis") {
  TempDir dir("timings");
  MonitorChain mc;
  Analyzer analyzer(testing::scenario_config(dir, chain::Mode::Live), mc.chain, testing::toy_model());
  std::vector<AnalysisReport> reports;
  for (const auto& a : mc.benign) reports.push_back(analyzer.analyze_address(a));
  write_file(dir.file("mid.hex"), to_hex(testing::mid_size_runtime(10000, 4)));
  const auto code = read_bytecode_file(dir.file("mid.hex"));
  CHECK(code.size() >= 9000);
  reports.push_back(analyzer.analyze_bytecode(code, "mid"));
  for (const auto& r : reports) {
    REQUIRE(r.ok);
    const auto& t = r.timings;
    CHECK(t.external_fetch_s >= 0);
    CHECK(t.lift_and_pscft_s >= 0);
    CHECK(t.inference_s >= 0);
    const double sum = t.external_fetch_s + t.lift_and_pscft_s + t.inference_s;
    CHECK(sum <= t.total_s + 1e-9);
    CHECK(sum >= 0.95 * t.total_s - 2e-4);
    CHECK(r.to_json().at("timings").size() == 4);
  }
}

TEST_CASE("analyze without a model has no prediction and exits 0") {
  TempDir dir("nomodel");
  MonitorChain mc;
  Analyzer analyzer(testing::scenario_config(dir, chain::Mode::Live), mc.chain, nullptr);
  const auto r = analyzer.analyze_address(mc.adversarial[0]);
  CHECK(r.ok);
  CHECK_FALSE(r.prediction);
  CHECK(r.to_json().at("prediction").is_null());
  CHECK(r.exit_code() == kExitBenign);
}

TEST_CASE("recorded analysis replays identically without network access") {
  TempDir dir("replay");
  MonitorChain mc;
  const auto snap = dir.file("snap.jsonl");
  Json recorded;
  {
    Analyzer rec(testing::scenario_config(dir, chain::Mode::Record, snap), mc.chain, testing::toy_model());
    recorded = rec.analyze_address(mc.adversarial[0]).to_json(false);
  }
  const auto upstream_calls = mc.chain->calls();
  Analyzer rep(testing::scenario_config(dir, chain::Mode::Replay, snap), nullptr, testing::toy_model());
  CHECK(rep.analyze_address(mc.adversarial[0]).to_json(false) == recorded);
  CHECK(mc.chain->calls() == upstream_calls);
  const auto miss = rep.analyze_address(mc.benign[0]);
  CHECK(miss.exit_code() == kExitError);
  CHECK(mc.chain->calls() == upstream_calls);
}

TEST_CASE("monitor: one alert for one adversarial deployment, identical on replay") {
  TempDir dir("monitor");
  MonitorChain mc;
  std::ostringstream out, err;
  Analyzer rec(monitor_config(dir, chain::Mode::Record, "a0.jsonl", 2), mc.chain, testing::toy_model());
  const auto s0 = run_monitor(rec, out, err);
  CHECK(s0.events == 4);
  CHECK(s0.alerts == 1);
  CHECK(s0.failed == 0);
  CHECK(out.str().find("ALERT block 101 tx 0") != std::string::npos);

  std::vector<std::string> logs;
  for (std::size_t workers : {1, 3, 3}) {
    const std::string name = "a" + std::to_string(logs.size() + 1) + ".jsonl";
    auto cfg = monitor_config(dir, chain::Mode::Replay, name, workers);
    cfg.reports = dir.file("reports" + std::to_string(logs.size()) + ".jsonl");
    Analyzer rep(cfg, nullptr, testing::toy_model());
    std::ostringstream o, e;
    const auto s = run_monitor(rep, o, e);
    CHECK(s.events == 4);
    CHECK(s.alerts == 1);
    logs.push_back(read_file(cfg.alerts));
    CHECK(split(trim(read_file(cfg.reports)), '\n').size() == 4);
  }
  CHECK(logs[0] == read_file(dir.file("a0.jsonl")));
  CHECK(logs[1] == logs[0]);
  CHECK(logs[2] == logs[0]);
  const auto alert = Json::parse(trim(logs[0]));
  CHECK(alert.at("alert_version") == kAlertVersion);
  CHECK(alert.at("contract_id") == mc.adversarial[0].hex());
  CHECK_FALSE(alert.contains("timings"));
}

TEST_CASE("monitor: empty snapshot ends cleanly") {
  TempDir dir("empty");
  auto cfg = monitor_config(dir, chain::Mode::Replay, "alerts.jsonl", 2);
  cfg.from_block.reset();
  Analyzer a(cfg, nullptr, testing::toy_model());
  std::ostringstream out, err;
  const auto s = run_monitor(a, out, err);
  CHECK(s.events == 0);
  CHECK(s.snapshot_exhausted);
  CHECK_FALSE(s.producer_error);
  CHECK(read_file(cfg.alerts).empty());
}

TEST_CASE("monitor: an unavailable block becomes a gap and the stream continues") {
  TempDir dir("gap");
  MonitorChain mc;
  mc.chain->fail_block(101, 100);
  auto cfg = monitor_config(dir, chain::Mode::Live, "alerts.jsonl", 2);
  cfg.snapshot.clear();
  cfg.max_retries = 2;
  Analyzer a(cfg, mc.chain, testing::toy_model());
  std::ostringstream out, err;
  const auto s = run_monitor(a, out, err);
  CHECK(s.gaps == 1);
  CHECK(s.events == 2);
  CHECK(s.alerts == 0);
  CHECK(err.str().find("gap: block 101") != std::string::npos);
}

TEST_CASE("monitor requires a model") {
  TempDir dir("nomodel_mon");
  MonitorChain mc;
  Analyzer a(testing::scenario_config(dir, chain::Mode::Live), mc.chain, nullptr);
  std::ostringstream out, err;
  CHECK_THROWS_AS(run_monitor(a, out, err), ConfigError);
}

namespace {

struct DatasetChain {
  std::shared_ptr<FakeChain> chain = std::make_shared<FakeChain>();
  std::vector<Address> contracts;  // 6 benign-looking deployments, index 3 is a token
  std::int64_t t0 = 1700000000;

  DatasetChain() {
    Rng rng(8);
    std::uint16_t actor = 1;
    testing::add_common_signatures(*chain);
    for (std::uint64_t n = 10; n <= 12; ++n) chain->add_block(n, t0 + static_cast<std::int64_t>(n - 10) * 12);
    for (int i = 0; i < 6; ++i)
      contracts.push_back(testing::deploy_fixture(*chain, 10 + i / 2, i == 3 ? FixtureKind::Token : FixtureKind::Benign,
                                                  rng, actor));
    chain->set_head(12);
  }

  // contracts 0, 2, 3, 5 reach 10 callers inside 90 days; 1 has 9; 4 has
  // 12 but only 8 inside the window
  std::string history() const {
    std::ostringstream os;
    auto callers = [&](std::size_t c, int count, std::int64_t offset) {
      for (int k = 0; k < count; ++k) {
        Address caller = testing::fixed_address(static_cast<std::uint8_t>(0x80 + k));
        os << contracts[c].hex() << " " << caller.hex() << " " << t0 + offset + k << "\n";
      }
    };
    for (std::size_t c : {0u, 2u, 3u, 5u}) callers(c, 10, 3600);
    callers(1, 9, 3600);
    callers(4, 8, 3600);
    for (int k = 0; k < 4; ++k)
      os << contracts[4].hex() << " " << testing::fixed_address(static_cast<std::uint8_t>(0xc0 + k)).hex() << " "
         << t0 + 91LL * 24 * 3600 << "\n";
    return os.str();
  }
};

}  // namespace

TEST_CASE("dataset-build: caller threshold and token exclusion") {
  TempDir dir("dsbuild");
  DatasetChain dc;
  auto cfg = testing::scenario_config(dir, chain::Mode::Live);
  cfg.from_block = 10;
  write_file(dir.file("callers.txt"), dc.history());
  cfg.caller_history = dir.file("callers.txt");
  Analyzer a(cfg, dc.chain, nullptr);
  std::ostringstream out;
  const auto b = cmd_dataset_build(a, dir.file("ds.jsonl"), out);
  CHECK(b.events == 6);
  CHECK(b.below_threshold == 2);
  CHECK(b.standard == 1);
  REQUIRE(b.records.size() == 3);
  std::set<std::string> ids;
  for (const auto& r : b.records) {
    ids.insert(r.contract_id);
    CHECK(r.label == 0);
  }
  CHECK(ids == std::set<std::string>{dc.contracts[0].hex(), dc.contracts[2].hex(), dc.contracts[5].hex()});

  const auto back = load_dataset(dir.file("ds.jsonl"));
  REQUIRE(back.size() == b.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(record_to_json(back[i]) == record_to_json(b.records[i]));
    CHECK(back[i].deploy_timestamp >= dc.t0);
  }
}

TEST_CASE("dataset-build: adversarial label join and unknown labels") {
  TempDir dir("dslabels");
  DatasetChain dc;
  auto cfg = testing::scenario_config(dir, chain::Mode::Live);
  cfg.from_block = 10;
  write_file(dir.file("callers.txt"), dc.history());
  cfg.caller_history = dir.file("callers.txt");
  // contract 1 is below the caller threshold, but labeled rows are kept
  write_file(dir.file("adv.txt"), "# incident list\n" + dc.contracts[1].hex() + "\n");
  cfg.adversarial_labels = dir.file("adv.txt");
  {
    Analyzer a(cfg, dc.chain, nullptr);
    std::ostringstream out;
    const auto b = cmd_dataset_build(a, dir.file("ds.jsonl"), out);
    REQUIRE(b.records.size() == 4);
    CHECK(b.adversarial == 1);
    for (const auto& r : b.records) CHECK(r.label == (r.contract_id == dc.contracts[1].hex() ? 1 : 0));
  }
  write_file(dir.file("adv.txt"), dc.contracts[1].hex() + "\n" + testing::fixed_address(0x42).hex() + "\n");
  Analyzer a(cfg, dc.chain, nullptr);
  std::ostringstream out;
  CHECK_THROWS_AS(cmd_dataset_build(a, dir.file("ds2.jsonl"), out), DataIntegrityError);
  write_file(dir.file("adv.txt"), "not-an-address\n");
  CHECK_THROWS_AS(cmd_dataset_build(a, dir.file("ds2.jsonl"), out), DataIntegrityError);
}

TEST_CASE("train and eval through the commands") {
  TempDir dir("train");
  save_dataset(dir.file("d.jsonl"), generate_synthetic({.contracts = 300, .adversarial_fraction = 0.2, .seed = 4}));
  PipelineConfig cfg;
  cfg.seed = 3;
  cfg.transformer = testing::small_transformer();
  cfg.transformer.epochs = 3;
  std::ostringstream out;
  const auto first = cmd_train(cfg, dir.file("d.jsonl"), dir.file("b1"), out);
  const auto second = cmd_train(cfg, dir.file("d.jsonl"), dir.file("b2"), out);
  CHECK(first.bundle_hash == second.bundle_hash);
  cfg.seed = 4;
  const auto other = cmd_train(cfg, dir.file("d.jsonl"), dir.file("b3"), out);
  CHECK(other.bundle_hash != first.bundle_hash);

  std::ostringstream table;
  cmd_eval(cfg, dir.file("d.jsonl"), dir.file("b1"), EvalMode::Table, 0, table);
  std::size_t rows = 0;
  for (auto line : split(table.str(), '\n'))
    if (line.find(" f1 ") != std::string_view::npos) ++rows;
  CHECK(rows == 9);

  std::ostringstream imp;
  cmd_eval(cfg, dir.file("d.jsonl"), dir.file("b1"), EvalMode::Importance, 0, imp);
  CHECK(imp.str().find("token_call_ratio") != std::string::npos);

  // the bundle loads through the configuration path as well
  MonitorChain mc;
  auto acfg = testing::scenario_config(dir, chain::Mode::Live);
  acfg.model = dir.file("b1");
  Analyzer a(acfg, mc.chain);
  REQUIRE(a.model());
  CHECK(a.analyze_address(mc.benign[0]).prediction.has_value());
}

TEST_CASE("no-verified-feature drops the verified column") {
  PipelineConfig c;
  CHECK(ensemble_config(c).encoding.include_verified);
  c.no_verified_feature = true;
  const auto e = ensemble_config(c);
  CHECK_FALSE(e.encoding.include_verified);
  CHECK(features::encoded_dimension(e.encoding) + 1 == features::encoded_dimension({}));
}
