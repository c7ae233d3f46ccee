#include "sentinel/features/features.hpp"

#include <deque>
#include <map>
#include <set>

#include "sentinel/evm/opcodes.hpp"

namespace sentinel::features {

namespace {

bool is_external(const evm::Statement& s) {
  return !s.callee && s.op <= 0xff && evm::is_external_call(static_cast<std::uint8_t>(s.op));
}

bool is_token_call(const evm::Statement& s, const FeatureConfig& config) {
  return is_external(s) && s.selector && config.token_functions.contains(*s.selector);
}

/// Token call statements reachable from `root`'s entry, following private
/// calls into callee functions. Statements are identified by (block, index).
std::size_t reachable_token_calls(const evm::ContractIR& ir, const evm::FunctionIR& root, const FeatureConfig& config) {
  std::map<evm::BlockId, const evm::FunctionIR*> by_entry;
  for (const auto& f : ir.functions) by_entry[f.entry] = &f;

  std::set<std::pair<evm::BlockId, std::size_t>> counted;
  std::set<evm::BlockId> visited_blocks;
  std::set<evm::BlockId> visited_functions{root.entry};
  std::deque<std::pair<const evm::FunctionIR*, evm::BlockId>> queue{{&root, root.entry}};
  while (!queue.empty()) {
    auto [fn, id] = queue.front();
    queue.pop_front();
    if (!visited_blocks.insert(id).second) continue;
    auto it = fn->blocks.find(id);
    if (it == fn->blocks.end()) continue;
    const auto& block = it->second;
    for (std::size_t i = 0; i < block.statements.size(); ++i) {
      const auto& s = block.statements[i];
      if (is_token_call(s, config)) counted.emplace(id, i);
      if (s.callee) {
        auto callee = by_entry.find(*s.callee);
        if (callee != by_entry.end() && visited_functions.insert(*s.callee).second)
          queue.emplace_back(callee->second, *s.callee);
      }
    }
    for (auto succ : block.successors) queue.emplace_back(fn, succ);
  }
  return counted.size();
}

}  // namespace

ImplementationFeatures extract_implementation_features(const evm::ContractIR& ir, const FeatureConfig& config) {
  ImplementationFeatures out;
  out.func_count = static_cast<std::uint32_t>(ir.functions.size());
  std::uint32_t external_calls = 0;
  for (const auto& f : ir.functions) {
    if (f.visibility == evm::Visibility::Public) {
      ++out.public_func_count;
      if (f.selector && config.flashloan_callbacks.contains(*f.selector)) ++out.flashloan_callback_count;
    }
    for (const auto& [id, b] : f.blocks)
      for (const auto& s : b.statements) {
        if (is_external(s)) ++external_calls;
        if (is_token_call(s, config)) ++out.token_call_count;
      }
  }
  if (out.public_func_count > 0)
    out.flashloan_callback_ratio = static_cast<double>(out.flashloan_callback_count) / out.public_func_count;
  if (external_calls > 0) out.token_call_ratio = static_cast<double>(out.token_call_count) / external_calls;

  std::size_t total = 0;
  for (const auto& f : ir.functions) {
    if (f.visibility != evm::Visibility::Public) continue;
    const auto n = reachable_token_calls(ir, f, config);
    total += n;
    out.max_token_call_count = std::max(out.max_token_call_count, static_cast<std::uint32_t>(n));
  }
  if (out.public_func_count > 0) out.avg_token_call_count = static_cast<double>(total) / out.public_func_count;

  out.delegate_call_count = evm::count_opcode(ir, evm::op::DELEGATECALL);
  out.selfdestruct_count = evm::count_opcode(ir, evm::op::SELFDESTRUCT);
  return out;
}

DeploymentFeatures extract_deployment_features(const Transaction& tx, const Receipt& receipt, bool verified,
                                               FundSourceCategory fund) {
  if (tx.to) throw NotADeployment("transaction " + tx.hash.hex() + " has a recipient; not a contract creation");
  DeploymentFeatures d;
  d.nonce = tx.nonce;
  d.fund_source = fund;
  d.value_flag = !tx.value.is_zero();
  d.input_data_length = tx.input.size();
  d.gas_used = receipt.gas_used;
  d.verified = verified;
  return d;
}

RescueWindow compute_rescue_window(std::int64_t t_first, std::int64_t t_deploy, double t_pred) {
  if (t_first < t_deploy) throw std::invalid_argument("first attack transaction precedes deployment");
  if (t_pred < 0) throw std::invalid_argument("negative prediction time");
  RescueWindow w;
  w.seconds = static_cast<double>(t_first - t_deploy) - t_pred;
  w.missed = w.seconds < 0;
  return w;
}

}  // namespace sentinel::features
