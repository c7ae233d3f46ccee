#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sentinel/chain/client.hpp"
#include "sentinel/features/features.hpp"
#include "sentinel/fundsource/trace.hpp"
#include "sentinel/ml/ensemble.hpp"
#include "sentinel/pipeline/config.hpp"

namespace sentinel::pipeline {

using Json = nlohmann::json;

inline constexpr int kReportVersion = 1;
inline constexpr int kAlertVersion = 1;

enum ExitCode : int { kExitBenign = 0, kExitError = 2, kExitAdversarial = 10 };

struct StageTimings {
  double external_fetch_s = 0;
  double lift_and_pscft_s = 0;
  double inference_s = 0;
  double total_s = 0;
};

struct AnalysisReport {
  bool ok = false;
  features::FeatureRecord record;  ///< contract_id, features, PSCFT text, deploy timestamp
  std::optional<std::uint64_t> block;
  std::optional<std::uint64_t> tx_index;
  std::optional<std::string> tx_hash;
  std::optional<std::string> deployer;
  fundsource::TraceResult fund;
  std::optional<std::string> verified_name;
  std::string standard_kind = "other";
  std::size_t pscft_token_count = 0;
  std::size_t pscft_function_count = 0;
  std::optional<ml::Prediction> prediction;
  StageTimings timings;
  std::vector<std::string> diagnostics;

  int exit_code() const;
  bool adversarial() const { return ok && prediction && prediction->label == 1; }
  Json to_json(bool with_timings = true) const;
  /// Alert record: the report without timings or PSCFT text.
  Json alert_json() const;
  std::string summary() const;
};

/// Everything an analysis needs, built from the configuration: snapshot
/// transport, chain client, label and signature databases, fund tracer,
/// feature lists and the optional model bundle. Safe to share between
/// worker threads.
class Analyzer {
 public:
  /// `upstream` replaces the HTTP transport in live and record modes.
  explicit Analyzer(const PipelineConfig& config, std::shared_ptr<chain::Transport> upstream = nullptr);
  Analyzer(const PipelineConfig& config, std::shared_ptr<chain::Transport> upstream,
           std::shared_ptr<const ml::Ensemble> model);

  AnalysisReport analyze_event(const chain::DeploymentEvent& event);
  /// Looks up the creation transaction through the explorer.
  AnalysisReport analyze_address(const Address& contract);
  /// Hex text or raw bytes; creation code is reduced to its runtime part.
  /// Deployment features are left at their defaults.
  AnalysisReport analyze_bytecode(const Bytes& code, const std::string& contract_id);

  chain::ChainClient& client() { return client_; }
  chain::Transport& transport() { return *transport_; }
  const PipelineConfig& config() const { return config_; }
  const ml::Ensemble* model() const { return model_.get(); }
  const features::FeatureConfig& feature_config() const { return feature_config_; }
  std::vector<std::string> resolver_diagnostics() const { return resolver_.diagnostics(); }

 private:
  void lift_stage(const Bytes& runtime, std::optional<Address> address, AnalysisReport& r);
  void inference_stage(AnalysisReport& r);
  std::optional<std::string> verified_name(const Address& a);

  PipelineConfig config_;
  std::shared_ptr<chain::SnapshotStore> store_;
  std::shared_ptr<chain::Transport> transport_;
  chain::ChainClient client_;
  fundsource::AddressLabelDB labels_;
  chain::SelectorResolver resolver_;
  chain::AssetTransferFunding funding_;
  fundsource::CachedFundTracer tracer_;
  features::FeatureConfig feature_config_;
  std::shared_ptr<const ml::Ensemble> model_;
  std::mutex names_mutex_;
  std::map<Address, std::optional<std::string>> names_;
};

/// Hex text (optional 0x, surrounding whitespace) or raw bytes.
Bytes read_bytecode_file(const std::string& path);

}  // namespace sentinel::pipeline
