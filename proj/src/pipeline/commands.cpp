#include "sentinel/pipeline/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>

#include "sentinel/common/text.hpp"
#include "sentinel/ml/selection.hpp"
#include "sentinel/ml/splits.hpp"
#include "sentinel/pipeline/dataset.hpp"
#include "sentinel/pipeline/synthetic.hpp"
#include "sentinel/pscft/pscft.hpp"

namespace sentinel::pipeline {

using features::FeatureRecord;

ml::EnsembleConfig ensemble_config(const PipelineConfig& c) {
  ml::EnsembleConfig e;
  e.seed = c.seed;
  e.encoding.include_verified = !c.no_verified_feature;
  e.transformer = c.transformer;
  return e;
}

namespace {

bool looks_like_address(std::string_view s) {
  if (s.size() != 42 || !(starts_with(s, "0x") || starts_with(s, "0X"))) return false;
  return std::all_of(s.begin() + 2, s.end(), is_hex_digit);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<ml::TimeKey> time_keys(const std::vector<FeatureRecord>& rs) {
  std::vector<ml::TimeKey> keys;
  for (const auto& r : rs) keys.push_back({r.deploy_timestamp, r.contract_id});
  return keys;
}

std::vector<int> labels_of(const std::vector<FeatureRecord>& rs) {
  std::vector<int> y;
  for (const auto& r : rs) {
    if (!r.label) throw std::invalid_argument("record " + r.contract_id + " has no label");
    y.push_back(*r.label);
  }
  return y;
}

std::vector<FeatureRecord> pick(const std::vector<FeatureRecord>& rs, const std::vector<std::size_t>& idx) {
  std::vector<FeatureRecord> out;
  for (auto i : idx) out.push_back(rs[i]);
  return out;
}

}  // namespace

AnalysisReport analyze_target(Analyzer& analyzer, const std::string& target) {
  if (looks_like_address(target)) return analyzer.analyze_address(Address::from_hex(target));
  Bytes code;
  try {
    code = read_bytecode_file(target);
  } catch (const std::exception& e) {
    AnalysisReport r;
    r.record.contract_id = target;
    r.diagnostics.push_back(std::string("cannot read bytecode: ") + e.what());
    return r;
  }
  return analyzer.analyze_bytecode(code, target);
}

int cmd_analyze(Analyzer& analyzer, const std::string& target, const AnalyzeOutput& output, std::ostream& out) {
  const auto report = analyze_target(analyzer, target);
  const auto j = report.to_json();
  if (!output.report_path.empty()) write_file(output.report_path, j.dump(2) + "\n");
  if (output.json) out << j.dump(2) << "\n";
  else out << report.summary();
  return report.exit_code();
}

std::set<Address> parse_address_list(std::string_view text) {
  std::set<Address> out;
  std::size_t n = 0;
  for (auto raw : split(text, '\n')) {
    ++n;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!looks_like_address(line))
      throw DataIntegrityError("address list line " + std::to_string(n) + ": not an address: '" + std::string(line) + "'");
    out.insert(Address::from_hex(line));
  }
  return out;
}

std::vector<chain::DeploymentEvent> collect_events(Analyzer& analyzer, std::vector<std::string>* gaps) {
  const auto& cfg = analyzer.config();
  std::vector<chain::DeploymentEvent> events;
  try {
    chain::MonitorOptions opt;
    opt.from_block = cfg.from_block.value_or(0);
    opt.to_block = cfg.to_block;
    opt.max_retries = cfg.max_retries;
    opt.initial_backoff = std::chrono::milliseconds(cfg.initial_backoff_ms);
    chain::BlockMonitor monitor(analyzer.client(), opt);
    monitor.run([&](const chain::MonitorItem& item) {
      if (item.event) events.push_back(*item.event);
      else if (item.error && gaps) gaps->push_back(*item.error);
      return true;
    });
  } catch (const chain::ReplayMiss&) {
    if (gaps) gaps->push_back("snapshot exhausted after " + std::to_string(events.size()) + " events");
  }
  return events;
}

DatasetBuild build_dataset(Analyzer& analyzer, const std::vector<chain::DeploymentEvent>& events,
                           chain::CallerHistoryProvider& history, const std::set<Address>& adversarial) {
  DatasetBuild b;
  b.events = events.size();
  std::set<Address> seen;
  for (const auto& ev : events) seen.insert(ev.contract_address);
  std::vector<std::string> unknown;
  for (const auto& a : adversarial)
    if (!seen.contains(a)) unknown.push_back(a.hex());
  if (!unknown.empty()) {
    std::string msg = "adversarial label file names contracts that are not among the deployment events:";
    for (const auto& u : unknown) msg += " " + u;
    throw DataIntegrityError(msg);
  }

  std::map<Address, AnalysisReport> analyzed;
  auto analyze = [&](const chain::DeploymentEvent& ev) -> const AnalysisReport& {
    auto it = analyzed.find(ev.contract_address);
    if (it == analyzed.end()) it = analyzed.emplace(ev.contract_address, analyzer.analyze_event(ev)).first;
    return it->second;
  };

  std::vector<chain::DeploymentEvent> others;
  for (const auto& ev : events)
    if (!adversarial.contains(ev.contract_address)) others.push_back(ev);
  const auto& cfg = analyzer.config();
  chain::BenignCandidateOptions opt;
  opt.min_unique_callers = cfg.min_unique_callers;
  opt.window_seconds = cfg.caller_window_days * 24 * 3600;
  std::size_t standard = 0;
  const auto benign_list = chain::build_benign_candidates(
      others, history,
      [&](const chain::DeploymentEvent& ev) {
        const auto& r = analyze(ev);
        const bool s = r.ok && r.standard_kind != pscft::standard_kind_name(pscft::StandardKind::Other);
        standard += s;
        return s;
      },
      opt);
  const std::set<Address> benign(benign_list.begin(), benign_list.end());
  b.standard = standard;
  b.below_threshold = others.size() - benign.size() - standard;

  for (const auto& ev : events) {
    const bool adv = adversarial.contains(ev.contract_address);
    if (!adv && !benign.contains(ev.contract_address)) continue;
    const auto& r = analyze(ev);
    if (!r.ok) {
      ++b.failed;
      std::string note = "skipped " + ev.contract_address.hex();
      for (const auto& d : r.diagnostics) note += "; " + d;
      b.notes.push_back(note);
      continue;
    }
    FeatureRecord rec = r.record;
    rec.label = adv ? 1 : 0;
    b.adversarial += adv;
    b.records.push_back(std::move(rec));
  }
  return b;
}

DatasetBuild cmd_dataset_build(Analyzer& analyzer, const std::string& output, std::ostream& out) {
  const auto& cfg = analyzer.config();
  std::vector<std::string> gaps;
  const auto events = collect_events(analyzer, &gaps);
  auto history = cfg.caller_history.empty() ? chain::FixtureCallerHistory{}
                                            : chain::FixtureCallerHistory::load(cfg.caller_history);
  const auto adversarial =
      cfg.adversarial_labels.empty() ? std::set<Address>{} : parse_address_list(read_file(cfg.adversarial_labels));
  auto b = build_dataset(analyzer, events, history, adversarial);
  if (cfg.caller_history.empty()) b.notes.push_back("no caller history configured; no benign rows can qualify");
  for (const auto& g : gaps) b.notes.push_back("gap: " + g);
  save_dataset(output, b.records);
  out << "events " << b.events << ", records " << b.records.size() << " (adversarial " << b.adversarial
      << "), below caller threshold " << b.below_threshold << ", token/proxy " << b.standard << ", failed "
      << b.failed << "\n";
  for (const auto& n : b.notes) out << "note: " << n << "\n";
  out << "wrote " << output << "\n";
  return b;
}

TrainOutcome cmd_train(const PipelineConfig& config, const std::string& dataset, const std::string& bundle_dir,
                       std::ostream& out) {
  const auto records = load_dataset(dataset);
  TrainOutcome o;
  const auto e = ml::train_ensemble(records, ensemble_config(config), &o.report);
  ml::save_bundle(e, bundle_dir);
  o.bundle_hash = ml::bundle_hash(bundle_dir);
  const auto& s = o.report.sizes;
  out << "rows: base_train " << s.base_train << " (+" << s.synthetic << " synthetic), meta_train " << s.meta_train
      << ", test " << s.test << "\n";
  out << "transformer: " << o.report.transformer_log.epochs_run << " epochs, best " << o.report.transformer_log.best_epoch
      << "\n";
  out << "selected candidate " << ml::kind_name(ml::kCandidateKinds[e.selected_candidate]) << ", meta "
      << ml::kind_name(ml::kMetaKinds[e.selected_meta]) << "\n";
  for (const auto& n : o.report.notes) out << "note: " << n << "\n";
  out << "bundle " << bundle_dir << " hash " << o.bundle_hash.hex() << "\n";
  return o;
}

void cmd_eval(const PipelineConfig& config, const std::string& dataset, const std::string& bundle_dir, EvalMode mode,
              std::size_t cv_splits, std::ostream& out) {
  const auto records = load_dataset(dataset);
  if (mode == EvalMode::CrossValidation) {
    const auto keys = time_keys(records);
    const auto y = labels_of(records);
    const auto plan = ml::expanding_window_cv(keys, y, cv_splits);
    for (const auto& d : plan.diagnostics) out << "note: " << d << "\n";
    auto cfg = ensemble_config(config);
    cfg.train_fraction = 1.0;
    std::vector<double> f1s;
    for (const auto& fold : plan.folds) {
      const auto test = pick(records, fold.test);
      std::string name = "fold " + std::to_string(fold.index);
      try {
        const auto e = ml::train_ensemble(pick(records, fold.train), cfg);
        std::vector<double> p;
        for (const auto& r : test) p.push_back(e.predict(r).p_pred);
        const auto ty = labels_of(test);
        const auto rep = ml::evaluate(p, ty);
        f1s.push_back(rep.f1);
        out << ml::format_report_row(name, rep) << "\n";
      } catch (const std::invalid_argument& ex) {
        out << name << " skipped: " << ex.what() << "\n";
      }
    }
    const double mean = f1s.empty() ? 0.0 : std::accumulate(f1s.begin(), f1s.end(), 0.0) / static_cast<double>(f1s.size());
    out << "folds " << f1s.size() << ", mean f1 " << fmt("%.4f", mean) << "\n";
    return;
  }

  const auto e = ml::load_bundle(bundle_dir);
  const auto test = ml::test_slice(records);
  if (mode == EvalMode::Table) {
    out << "test rows " << test.size() << "\n";
    for (const auto& row : ml::evaluate_ensemble(e, test)) out << ml::format_report_row(row.name, row.report) << "\n";
    out << "selected: candidate " << ml::kind_name(ml::kCandidateKinds[e.selected_candidate]) << ", meta "
        << ml::kind_name(ml::kMetaKinds[e.selected_meta]) << "\n";
    return;
  }

  const auto y = labels_of(test);
  const auto names = features::feature_names(e.encoding);
  ml::Matrix X(static_cast<Eigen::Index>(test.size()), static_cast<Eigen::Index>(names.size()));
  ml::Vector pt(static_cast<Eigen::Index>(test.size()));
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto v = e.encode(test[i]);
    for (std::size_t k = 0; k < v.size(); ++k) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v[k];
    pt[static_cast<Eigen::Index>(i)] = e.transformer_proba(test[i]);
  }
  auto predict = [&](const ml::Matrix& M) {
    const ml::Vector pc = e.candidate().predict_proba(M);
    ml::Vector p(M.rows());
    for (Eigen::Index i = 0; i < M.rows(); ++i) p[i] = e.meta_proba(e.selected_meta, pc[i], pt[i]);
    return p;
  };
  const auto imp = ml::permutation_importance(predict, X, y, ml::ImportanceMetric::F1, 10, config.seed);
  const auto cand = ml::permutation_importance([&](const ml::Matrix& M) { return e.candidate().predict_proba(M); }, X,
                                               y, ml::ImportanceMetric::F1, 10, config.seed);
  std::vector<std::size_t> order(imp.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::pair(imp[a], cand[a]) > std::pair(imp[b], cand[b]); });
  out << "permutation importance, mean F1 drop over 10 shuffles of " << test.size() << " test rows\n";
  out << "feature                     ensemble  candidate(" << ml::kind_name(ml::kCandidateKinds[e.selected_candidate])
      << ")\n";
  for (auto k : order) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-26s %+9.4f %+10.4f", names[k].c_str(), imp[k], cand[k]);
    out << buf << "\n";
  }
}

void cmd_synthesize(const PipelineConfig& config, std::size_t contracts, double adversarial_fraction,
                    const std::string& output, std::ostream& out) {
  SyntheticOptions o;
  o.contracts = contracts;
  o.adversarial_fraction = adversarial_fraction;
  o.seed = config.seed;
  const auto records = generate_synthetic(o);
  save_dataset(output, records);
  const auto s = synthetic_stats(records);
  out << "wrote " << records.size() << " records (" << s.adversarial << " adversarial) to " << output << "\n";
  out << "adversarial: anonymous " << fmt("%.3f", s.adv_anonymous) << ", verified " << fmt("%.3f", s.adv_verified)
      << ", flashloan " << fmt("%.3f", s.adv_flashloan) << "\n";
  out << "benign: verified " << fmt("%.3f", s.benign_verified) << ", safe " << fmt("%.3f", s.benign_safe)
      << ", flashloan " << fmt("%.4f", s.benign_flashloan) << "\n";
}

}  // namespace sentinel::pipeline
