#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sentinel/common/chain_types.hpp"
#include "sentinel/evm/contract_ir.hpp"
#include "sentinel/features/config.hpp"
#include "sentinel/fundsource/labels.hpp"

namespace sentinel::features {

using fundsource::FundSourceCategory;

struct DeploymentFeatures {
  std::uint64_t nonce = 0;
  FundSourceCategory fund_source = FundSourceCategory::Unknown;
  bool value_flag = false;
  std::uint64_t input_data_length = 0;
  std::uint64_t gas_used = 0;
  bool verified = false;

  bool operator==(const DeploymentFeatures&) const = default;
};

struct ImplementationFeatures {
  std::uint32_t func_count = 0;         ///< all functions, fallback included
  std::uint32_t public_func_count = 0;  ///< selector-dispatched functions
  std::uint32_t flashloan_callback_count = 0;
  double flashloan_callback_ratio = 0.0;  ///< of public functions
  std::uint32_t token_call_count = 0;
  double token_call_ratio = 0.0;  ///< of external calls
  std::uint32_t max_token_call_count = 0;
  double avg_token_call_count = 0.0;
  std::uint32_t delegate_call_count = 0;
  std::uint32_t selfdestruct_count = 0;

  bool operator==(const ImplementationFeatures&) const = default;
};

struct FeatureRecord {
  std::string contract_id;
  DeploymentFeatures deployment;
  ImplementationFeatures implementation;
  std::string pscft;
  std::optional<int> label;  ///< 0 benign, 1 adversarial
  std::int64_t deploy_timestamp = 0;
};

/// Counts over the lifted IR. Token calls reachable from a public function
/// include those in private functions it reaches through private calls.
ImplementationFeatures extract_implementation_features(const evm::ContractIR& ir, const FeatureConfig& config);

class NotADeployment : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws NotADeployment when the transaction has a recipient.
DeploymentFeatures extract_deployment_features(const Transaction& tx, const Receipt& receipt, bool verified,
                                               FundSourceCategory fund);

struct RescueWindow {
  double seconds = 0.0;
  bool missed = false;  ///< negative window
};

/// t_first - t_deploy - t_pred. Throws std::invalid_argument when
/// t_first < t_deploy or t_pred < 0.
RescueWindow compute_rescue_window(std::int64_t t_first, std::int64_t t_deploy, double t_pred);

}  // namespace sentinel::features
