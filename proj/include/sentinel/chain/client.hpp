#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "sentinel/chain/transport.hpp"
#include "sentinel/common/chain_types.hpp"
#include "sentinel/fundsource/trace.hpp"
#include "sentinel/pscft/semantics.hpp"

namespace sentinel::chain {

/// JSON-RPC error object returned by the node.
class RpcError : public TransportError {
 public:
  using TransportError::TransportError;
};

struct Block {
  std::uint64_t number = 0;
  std::int64_t timestamp = 0;
  std::vector<Transaction> transactions;
};

Transaction parse_transaction(const Json& j);
Receipt parse_receipt(const Json& j);
Block parse_block(const Json& j);

/// Standard Ethereum JSON-RPC reads. Methods return nullopt when the node
/// answers `null`.
class ChainClient {
 public:
  explicit ChainClient(Transport& transport) : transport_(transport) {}

  Json rpc(const std::string& method, Json params);

  std::uint64_t block_number();
  std::optional<Block> get_block(std::uint64_t number);
  std::optional<Transaction> get_transaction(const Hash32& hash);
  std::optional<Receipt> get_receipt(const Hash32& hash);
  Bytes get_code(const Address& address, const std::string& block_tag = "latest");
  std::uint64_t get_transaction_count(const Address& address, const std::string& block_tag = "latest");

  Transport& transport() { return transport_; }

 private:
  Transport& transport_;
};

struct VerificationStatus {
  bool verified = false;
  std::optional<std::string> contract_name;
  std::int64_t queried_at = 0;
  std::optional<std::string> diagnostic;
};

/// Etherscan-style `module=contract&action=getsourcecode`. Failures map to
/// unverified with a diagnostic, except replay misses, which propagate.
VerificationStatus get_verification_status(Transport& explorer, const Address& address);

/// Local database first, then one query to the "signatures" service per
/// selector. Results (including misses) are memoized; a remote answer is
/// kept only if it hashes to the selector.
class SelectorResolver : public pscft::SignatureResolver {
 public:
  SelectorResolver(pscft::LocalSignatureDB local, Transport* remote)
      : local_(std::move(local)), remote_(remote) {}

  std::optional<std::string> resolve(const Selector& selector) override;
  std::size_t remote_queries() const;
  std::vector<std::string> diagnostics() const;

 private:
  pscft::LocalSignatureDB local_;
  Transport* remote_;
  mutable std::mutex mutex_;
  std::unordered_map<Selector, std::optional<std::string>> memo_;
  std::size_t remote_queries_ = 0;
  std::vector<std::string> diagnostics_;
};

/// Earliest value-bearing incoming transfer via `alchemy_getAssetTransfers`
/// (external and internal categories, ascending, one result).
class AssetTransferFunding : public fundsource::FundingGraphProvider {
 public:
  explicit AssetTransferFunding(Transport& transport) : transport_(transport) {}
  std::optional<Address> earliest_incoming_funder(const Address& address) override;

 private:
  Transport& transport_;
};

struct DeploymentEvent {
  Address contract_address;
  Address creator;
  Hash32 tx_hash;
  std::uint64_t block_number = 0;
  std::uint64_t tx_index = 0;
  std::int64_t block_timestamp = 0;
  Bytes creation_input;
  Uint256 value;
  std::uint64_t gas_used = 0;
  std::uint64_t nonce = 0;
  Transaction transaction;
  Receipt receipt;
};

DeploymentEvent make_deployment_event(const Transaction& tx, const Receipt& receipt, std::int64_t block_timestamp);

/// Creation transaction of a contract via the explorer's
/// `module=contract&action=getcontractcreation`; nullopt when unknown.
std::optional<Hash32> find_creation_tx(Transport& explorer, const Address& contract);

/// Transaction, receipt and block timestamp of a creation transaction;
/// nullopt when the node does not know it or it has a recipient.
std::optional<DeploymentEvent> load_deployment(ChainClient& client, const Hash32& tx_hash);

struct MonitorItem {
  std::uint64_t block_number = 0;
  std::optional<DeploymentEvent> event;
  std::optional<std::string> error;  ///< block that could not be fetched
};

struct MonitorOptions {
  std::uint64_t from_block = 0;
  std::optional<std::uint64_t> to_block;  ///< default: the head seen at start
  bool follow = false;                    ///< keep polling for new heads
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{200};
  std::chrono::milliseconds max_backoff{2000};
  std::chrono::milliseconds poll_interval{4000};
  std::function<void(std::chrono::milliseconds)> sleep;  ///< default: this_thread::sleep_for
};

/// Single ordered producer of deployment events: every top-level
/// transaction without a recipient, in (block, tx index) order. Blocks that
/// stay unavailable after the retries become error items.
class BlockMonitor {
 public:
  BlockMonitor(ChainClient& client, MonitorOptions options);
  /// Calls `sink` for each item until the range is exhausted or `sink`
  /// returns false. Returns the number of items delivered.
  std::size_t run(const std::function<bool(const MonitorItem&)>& sink);

 private:
  std::optional<Block> fetch_with_retry(std::uint64_t number, std::string& error);
  template <typename F>
  auto with_retry(F&& f, std::string& error) -> std::optional<decltype(f())>;

  ChainClient& client_;
  MonitorOptions options_;
};

/// Caller history of deployed contracts: lines `<contract> <caller> <unix ts>`.
class CallerHistoryProvider {
 public:
  virtual ~CallerHistoryProvider() = default;
  virtual std::vector<std::pair<Address, std::int64_t>> callers(const Address& contract) = 0;
};

class FixtureCallerHistory : public CallerHistoryProvider {
 public:
  static FixtureCallerHistory parse(std::string_view text);
  static FixtureCallerHistory load(const std::string& path);
  void add(const Address& contract, const Address& caller, std::int64_t ts);
  std::vector<std::pair<Address, std::int64_t>> callers(const Address& contract) override;

 private:
  std::map<Address, std::vector<std::pair<Address, std::int64_t>>> calls_;
};

struct BenignCandidateOptions {
  std::size_t min_unique_callers = 10;
  std::int64_t window_seconds = 90LL * 24 * 3600;
};

/// Keeps contracts with at least `min_unique_callers` distinct callers
/// within the window after deployment; `is_standard` returns true for
/// token and proxy contracts, which are excluded.
std::vector<Address> build_benign_candidates(const std::vector<DeploymentEvent>& events,
                                             CallerHistoryProvider& history,
                                             const std::function<bool(const DeploymentEvent&)>& is_standard,
                                             const BenignCandidateOptions& options = {});

}  // namespace sentinel::chain
