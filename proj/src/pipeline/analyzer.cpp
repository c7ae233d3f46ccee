#include "sentinel/pipeline/analyzer.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

#include "sentinel/common/text.hpp"
#include "sentinel/evm/lift.hpp"
#include "sentinel/pipeline/dataset.hpp"
#include "sentinel/pscft/pscft.hpp"

namespace sentinel::pipeline {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::shared_ptr<chain::SnapshotStore> open_store(const PipelineConfig& c) {
  if (c.snapshot.empty()) {
    if (c.mode != chain::Mode::Live) throw ConfigError("mode " + std::string(chain::mode_name(c.mode)) + " needs a snapshot path");
    return nullptr;
  }
  return std::make_shared<chain::SnapshotStore>(c.snapshot);
}

std::shared_ptr<chain::Transport> make_transport(const PipelineConfig& c, std::shared_ptr<chain::SnapshotStore> store,
                                                 std::shared_ptr<chain::Transport> upstream) {
  if (c.mode == chain::Mode::Replay) return std::make_shared<chain::SnapshotTransport>(c.mode, store, nullptr);
  if (!upstream) upstream = std::make_shared<chain::HttpTransport>(c.endpoints);
  if (c.mode == chain::Mode::Live && !store) return upstream;
  // live with a snapshot path still answers from upstream only
  return std::make_shared<chain::SnapshotTransport>(c.mode, store, upstream);
}

std::shared_ptr<const ml::Ensemble> load_model(const PipelineConfig& c) {
  if (c.model.empty()) return nullptr;
  return std::make_shared<const ml::Ensemble>(ml::load_bundle(c.model));
}

Json prediction_json(const std::optional<ml::Prediction>& p) {
  if (!p) return nullptr;
  return {{"label", p->label}, {"p_pred", p->p_pred}, {"p_candidate", p->p_candidate},
          {"p_transformer", p->p_transformer}};
}

Json fund_json(const fundsource::TraceResult& t) {
  return {{"category", std::string(fundsource::category_name(t.category))},
          {"source", t.source ? Json(t.source->hex()) : Json(nullptr)},
          {"label", t.label ? Json(*t.label) : Json(nullptr)},
          {"hops", t.hops},
          {"stop", std::string(fundsource::trace_stop_name(t.stop))}};
}

template <typename T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

int AnalysisReport::exit_code() const {
  if (!ok) return kExitError;
  return adversarial() ? kExitAdversarial : kExitBenign;
}

Json AnalysisReport::to_json(bool with_timings) const {
  const Json rec = record_to_json(record);
  Json j;
  j["report_version"] = kReportVersion;
  j["status"] = ok ? "ok" : "error";
  j["contract_id"] = record.contract_id;
  j["block"] = opt(block);
  j["tx_index"] = opt(tx_index);
  j["tx_hash"] = opt(tx_hash);
  j["deployer"] = opt(deployer);
  j["deploy_timestamp"] = record.deploy_timestamp;
  j["deployment"] = rec.at("deployment");
  j["implementation"] = rec.at("implementation");
  j["fund_source"] = fund_json(fund);
  j["verified_name"] = opt(verified_name);
  j["standard_kind"] = standard_kind;
  j["pscft"] = {{"token_count", pscft_token_count}, {"function_count", pscft_function_count}};
  j["prediction"] = prediction_json(prediction);
  if (with_timings)
    j["timings"] = {{"external_fetch_s", timings.external_fetch_s},
                    {"lift_and_pscft_s", timings.lift_and_pscft_s},
                    {"inference_s", timings.inference_s},
                    {"total_s", timings.total_s}};
  j["diagnostics"] = diagnostics;
  j["exit_code"] = exit_code();
  return j;
}

Json AnalysisReport::alert_json() const {
  Json j;
  j["alert_version"] = kAlertVersion;
  j["block"] = opt(block);
  j["tx_index"] = opt(tx_index);
  j["contract_id"] = record.contract_id;
  j["tx_hash"] = opt(tx_hash);
  j["deployer"] = opt(deployer);
  j["deploy_timestamp"] = record.deploy_timestamp;
  j["fund_source"] = std::string(fundsource::category_name(fund.category));
  j["verified"] = record.deployment.verified;
  j["prediction"] = prediction_json(prediction);
  j["flashloan_callback_count"] = record.implementation.flashloan_callback_count;
  j["token_call_count"] = record.implementation.token_call_count;
  return j;
}

std::string AnalysisReport::summary() const {
  std::ostringstream os;
  os << "contract " << record.contract_id;
  if (block) os << " (block " << *block << ", tx " << tx_index.value_or(0) << ")";
  os << "\n";
  if (!ok) {
    os << "  analysis failed\n";
  } else {
    const auto& m = record.implementation;
    os << "  fund source " << fundsource::category_name(fund.category) << ", verified "
       << (record.deployment.verified ? "yes" : "no") << ", standard " << standard_kind << "\n";
    os << "  functions " << m.func_count << " (public " << m.public_func_count << "), flashloan callbacks "
       << m.flashloan_callback_count << ", token calls " << m.token_call_count << "\n";
    os << "  pscft " << pscft_function_count << " functions, " << pscft_token_count << " tokens\n";
    if (prediction) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%s (p_pred %.4f)", prediction->label ? "ADVERSARIAL" : "benign", prediction->p_pred);
      os << "  verdict " << buf << "\n";
    } else {
      os << "  verdict none (no model)\n";
    }
  }
  char t[160];
  std::snprintf(t, sizeof t, "  timings fetch %.3fs, lift+pscft %.3fs, inference %.4fs, total %.3fs\n",
                timings.external_fetch_s, timings.lift_and_pscft_s, timings.inference_s, timings.total_s);
  os << t;
  for (const auto& d : diagnostics) os << "  note: " << d << "\n";
  return os.str();
}

Analyzer::Analyzer(const PipelineConfig& config, std::shared_ptr<chain::Transport> upstream)
    : Analyzer(config, std::move(upstream), load_model(config)) {}

Analyzer::Analyzer(const PipelineConfig& config, std::shared_ptr<chain::Transport> upstream,
                   std::shared_ptr<const ml::Ensemble> model)
    : config_(config),
      store_(open_store(config)),
      transport_(make_transport(config, store_, std::move(upstream))),
      client_(*transport_),
      labels_(config.label_db.empty() ? fundsource::AddressLabelDB{} : fundsource::AddressLabelDB::load(config.label_db)),
      resolver_(config.signature_db.empty() ? pscft::LocalSignatureDB{}
                                            : pscft::LocalSignatureDB::load(config.signature_db),
                config.remote_signatures ? transport_.get() : nullptr),
      funding_(*transport_),
      tracer_(funding_, labels_, config.fund_trace_depth),
      feature_config_(features::FeatureConfig::from_lists(
          config.flashloan_list.empty() ? features::default_flashloan_signatures() : read_file(config.flashloan_list),
          config.token_list.empty() ? features::default_token_signatures() : read_file(config.token_list))),
      model_(std::move(model)) {}

std::optional<std::string> Analyzer::verified_name(const Address& a) {
  {
    std::lock_guard lock(names_mutex_);
    if (auto it = names_.find(a); it != names_.end()) return it->second;
  }
  const auto status = chain::get_verification_status(*transport_, a);
  std::lock_guard lock(names_mutex_);
  return names_.emplace(a, status.contract_name).first->second;
}

void Analyzer::lift_stage(const Bytes& runtime, std::optional<Address> address, AnalysisReport& r) {
  const auto ir = evm::lift(runtime, address);
  for (const auto& d : ir.diagnostics) r.diagnostics.push_back("lift: " + d);
  pscft::DbLabelProvider labels(labels_, [this](const Address& a) { return verified_name(a); });
  auto doc = pscft::build_pscft(ir, &resolver_, &labels);
  r.record.implementation = features::extract_implementation_features(ir, feature_config_);
  r.standard_kind = std::string(pscft::standard_kind_name(pscft::detect_standard_contract(ir)));
  r.pscft_token_count = doc.tokens.size();
  r.pscft_function_count = pscft::read_pscft(doc.text).functions.size();
  r.record.pscft = std::move(doc.text);
}

void Analyzer::inference_stage(AnalysisReport& r) {
  if (!model_) return;
  if (model_->encoding.include_verified == config_.no_verified_feature)
    r.diagnostics.push_back(std::string("model bundle was trained ") +
                            (model_->encoding.include_verified ? "with" : "without") +
                            " the verified feature; using the bundle's encoding");
  r.prediction = model_->predict(r.record);
}

AnalysisReport Analyzer::analyze_event(const chain::DeploymentEvent& ev) {
  const auto t0 = Clock::now();
  AnalysisReport r;
  r.record.contract_id = ev.contract_address.hex();
  r.record.deploy_timestamp = ev.block_timestamp;
  r.block = ev.block_number;
  r.tx_index = ev.tx_index;
  r.tx_hash = ev.tx_hash.hex();
  r.deployer = ev.creator.hex();
  try {
    Bytes runtime = client_.get_code(ev.contract_address);
    if (runtime.empty()) {
      auto split = evm::extract_runtime_code(ev.creation_input);
      r.diagnostics.push_back("no code at the contract address; using the runtime image from the creation input");
      if (!split.split) r.diagnostics.push_back(split.diagnostic);
      runtime = std::move(split.runtime);
    }
    const auto status = chain::get_verification_status(*transport_, ev.contract_address);
    if (status.diagnostic) r.diagnostics.push_back(*status.diagnostic);
    r.verified_name = status.contract_name;
    r.fund = tracer_.trace(ev.creator);
    for (const auto& d : r.fund.diagnostics) r.diagnostics.push_back(d);
    r.record.deployment =
        features::extract_deployment_features(ev.transaction, ev.receipt, status.verified, r.fund.category);
    r.timings.external_fetch_s = seconds_since(t0);

    if (runtime.empty()) throw std::runtime_error("contract has no runtime bytecode");
    const auto t1 = Clock::now();
    lift_stage(runtime, ev.contract_address, r);
    r.timings.lift_and_pscft_s = seconds_since(t1);

    const auto t2 = Clock::now();
    inference_stage(r);
    r.timings.inference_s = seconds_since(t2);
    r.ok = true;
  } catch (const chain::ReplayMiss& e) {
    r.diagnostics.push_back(std::string("snapshot miss: ") + e.what());
  } catch (const std::exception& e) {
    r.diagnostics.push_back(std::string("analysis error: ") + e.what());
  }
  r.timings.total_s = seconds_since(t0);
  return r;
}

AnalysisReport Analyzer::analyze_address(const Address& contract) {
  const auto t0 = Clock::now();
  auto fail = [&](std::string why) {
    AnalysisReport r;
    r.record.contract_id = contract.hex();
    r.diagnostics.push_back(std::move(why));
    r.timings.external_fetch_s = r.timings.total_s = seconds_since(t0);
    return r;
  };
  std::optional<chain::DeploymentEvent> ev;
  try {
    const auto tx = chain::find_creation_tx(*transport_, contract);
    if (!tx) return fail("explorer does not know the creation transaction of " + contract.hex());
    ev = chain::load_deployment(client_, *tx);
    if (!ev) return fail("creation transaction " + tx->hex() + " not found");
  } catch (const std::exception& e) {
    return fail(std::string("analysis error: ") + e.what());
  }
  const double lookup = seconds_since(t0);
  auto r = analyze_event(*ev);
  r.timings.external_fetch_s += lookup;
  r.timings.total_s += lookup;
  return r;
}

AnalysisReport Analyzer::analyze_bytecode(const Bytes& code, const std::string& contract_id) {
  const auto t0 = Clock::now();
  AnalysisReport r;
  r.record.contract_id = contract_id;
  r.diagnostics.push_back("no deployment transaction; deployment features left at their defaults");
  try {
    if (code.empty()) throw std::runtime_error("empty bytecode");
    const auto t1 = Clock::now();
    auto split = evm::extract_runtime_code(code);
    if (split.split) r.diagnostics.push_back("input is creation code; analyzing the runtime image it returns");
    if (split.runtime.empty()) throw std::runtime_error("empty runtime image");
    lift_stage(split.runtime, std::nullopt, r);
    r.timings.lift_and_pscft_s = seconds_since(t1);
    const auto t2 = Clock::now();
    inference_stage(r);
    r.timings.inference_s = seconds_since(t2);
    r.ok = true;
  } catch (const std::exception& e) {
    r.diagnostics.push_back(std::string("analysis error: ") + e.what());
  }
  r.timings.total_s = seconds_since(t0);
  return r;
}

Bytes read_bytecode_file(const std::string& path) {
  const std::string raw = read_file(path);
  const auto text = trim(raw);
  std::string_view digits = text;
  if (starts_with(digits, "0x") || starts_with(digits, "0X")) digits.remove_prefix(2);
  const bool hex = !digits.empty() && std::all_of(digits.begin(), digits.end(), is_hex_digit);
  if (hex) return from_hex(digits);
  if (text.empty()) return {};
  return Bytes(raw.begin(), raw.end());
}

}  // namespace sentinel::pipeline
