#include "sentinel/chain/client.hpp"

#include <algorithm>
#include <set>
#include <thread>

#include "sentinel/common/keccak.hpp"
#include "sentinel/common/text.hpp"

namespace sentinel::chain {

namespace {

std::string str(const Json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_string()) throw TransportError(std::string("field '") + key + "' is not a string");
  return v.get<std::string>();
}

std::uint64_t qty(const Json& j, const char* key) { return parse_quantity(str(j, key)); }

std::optional<Address> opt_address(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  const auto s = j.at(key).get<std::string>();
  if (s.empty() || s == "0x") return std::nullopt;
  return Address::from_hex(s);
}

}  // namespace

Transaction parse_transaction(const Json& j) {
  Transaction t;
  t.hash = Hash32::from_hex(str(j, "hash"));
  t.from = Address::from_hex(str(j, "from"));
  t.to = opt_address(j, "to");
  t.nonce = qty(j, "nonce");
  t.value = Uint256::from_quantity(str(j, "value"));
  t.input = from_hex(str(j, "input"));
  if (j.contains("blockNumber") && !j.at("blockNumber").is_null()) t.block_number = qty(j, "blockNumber");
  if (j.contains("transactionIndex") && !j.at("transactionIndex").is_null())
    t.transaction_index = qty(j, "transactionIndex");
  return t;
}

Receipt parse_receipt(const Json& j) {
  Receipt r;
  r.transaction_hash = Hash32::from_hex(str(j, "transactionHash"));
  r.gas_used = qty(j, "gasUsed");
  r.contract_address = opt_address(j, "contractAddress");
  if (j.contains("status") && j.at("status").is_string()) r.success = qty(j, "status") == 1;
  return r;
}

Block parse_block(const Json& j) {
  Block b;
  b.number = qty(j, "number");
  b.timestamp = static_cast<std::int64_t>(qty(j, "timestamp"));
  for (const auto& tx : j.at("transactions")) {
    if (!tx.is_object()) throw TransportError("block transactions must be full objects");
    b.transactions.push_back(parse_transaction(tx));
  }
  return b;
}

Json ChainClient::rpc(const std::string& method, Json params) {
  const auto response = transport_.call("rpc", Json{{"method", method}, {"params", std::move(params)}});
  if (response.body.contains("error") && !response.body.at("error").is_null())
    throw RpcError(method + ": " + response.body.at("error").dump());
  if (!response.body.contains("result")) throw TransportError(method + ": response has no result");
  return response.body.at("result");
}

std::uint64_t ChainClient::block_number() { return parse_quantity(rpc("eth_blockNumber", Json::array()).get<std::string>()); }

std::optional<Block> ChainClient::get_block(std::uint64_t number) {
  const auto r = rpc("eth_getBlockByNumber", Json::array({format_quantity(number), true}));
  if (r.is_null()) return std::nullopt;
  return parse_block(r);
}

std::optional<Transaction> ChainClient::get_transaction(const Hash32& hash) {
  const auto r = rpc("eth_getTransactionByHash", Json::array({hash.hex()}));
  if (r.is_null()) return std::nullopt;
  return parse_transaction(r);
}

std::optional<Receipt> ChainClient::get_receipt(const Hash32& hash) {
  const auto r = rpc("eth_getTransactionReceipt", Json::array({hash.hex()}));
  if (r.is_null()) return std::nullopt;
  return parse_receipt(r);
}

Bytes ChainClient::get_code(const Address& address, const std::string& block_tag) {
  return from_hex(rpc("eth_getCode", Json::array({address.hex(), block_tag})).get<std::string>());
}

std::uint64_t ChainClient::get_transaction_count(const Address& address, const std::string& block_tag) {
  return parse_quantity(rpc("eth_getTransactionCount", Json::array({address.hex(), block_tag})).get<std::string>());
}

VerificationStatus get_verification_status(Transport& explorer, const Address& address) {
  VerificationStatus s;
  const Json request = {{"module", "contract"}, {"action", "getsourcecode"}, {"address", address.hex()}};
  try {
    const auto response = explorer.call("explorer", request);
    s.queried_at = response.timestamp;
    const auto& body = response.body;
    if (!body.contains("result") || !body.at("result").is_array() || body.at("result").empty()) {
      s.diagnostic = "explorer returned no result for " + address.hex();
      return s;
    }
    const auto& entry = body.at("result").at(0);
    const auto source = entry.value("SourceCode", std::string());
    s.verified = !source.empty();
    const auto name = entry.value("ContractName", std::string());
    if (s.verified && !name.empty()) s.contract_name = name;
  } catch (const ReplayMiss&) {
    throw;
  } catch (const std::exception& e) {
    s.verified = false;
    s.diagnostic = std::string("verification lookup failed, treated as unverified: ") + e.what();
  }
  return s;
}

std::optional<std::string> SelectorResolver::resolve(const Selector& selector) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = memo_.find(selector); it != memo_.end()) return it->second;
  }
  std::optional<std::string> found = local_.resolve(selector);
  if (!found && remote_) {
    std::string diagnostic;
    try {
      {
        std::lock_guard lock(mutex_);
        ++remote_queries_;
      }
      const auto response = remote_->call("signatures", Json{{"hex_signature", selector.hex()}});
      const auto& results = response.body.contains("results") ? response.body.at("results") : Json::array();
      // Oldest matching submission wins.
      std::optional<std::int64_t> best_id;
      for (const auto& r : results) {
        const auto text = r.value("text_signature", std::string());
        if (text.empty() || selector_of(text) != selector) continue;
        const auto id = r.value("id", std::int64_t{0});
        if (!best_id || id < *best_id) {
          best_id = id;
          found = text;
        }
      }
    } catch (const ReplayMiss&) {
      throw;
    } catch (const std::exception& e) {
      diagnostic = "signature lookup for " + selector.hex() + " failed: " + e.what();
    }
    if (!diagnostic.empty()) {
      std::lock_guard lock(mutex_);
      diagnostics_.push_back(diagnostic);
      return std::nullopt;  // not memoized so a later query can retry
    }
  }
  std::lock_guard lock(mutex_);
  memo_[selector] = found;
  return found;
}

std::size_t SelectorResolver::remote_queries() const {
  std::lock_guard lock(mutex_);
  return remote_queries_;
}

std::vector<std::string> SelectorResolver::diagnostics() const {
  std::lock_guard lock(mutex_);
  return diagnostics_;
}

std::optional<Address> AssetTransferFunding::earliest_incoming_funder(const Address& address) {
  const Json params = Json::array({Json{{"fromBlock", "0x0"},
                                        {"toAddress", address.hex()},
                                        {"category", Json::array({"external", "internal"})},
                                        {"order", "asc"},
                                        {"maxCount", "0x1"},
                                        {"excludeZeroValue", true}}});
  try {
    const auto response = transport_.call("rpc", Json{{"method", "alchemy_getAssetTransfers"}, {"params", params}});
    if (response.body.contains("error") && !response.body.at("error").is_null())
      throw fundsource::ProviderError(response.body.at("error").dump());
    const auto& transfers = response.body.at("result").at("transfers");
    if (transfers.empty()) return std::nullopt;
    return Address::from_hex(transfers.at(0).at("from").get<std::string>());
  } catch (const ReplayMiss&) {
    throw;
  } catch (const fundsource::ProviderError&) {
    throw;
  } catch (const std::exception& e) {
    throw fundsource::ProviderError(e.what());
  }
}

BlockMonitor::BlockMonitor(ChainClient& client, MonitorOptions options) : client_(client), options_(std::move(options)) {
  if (!options_.sleep) options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

template <typename F>
auto BlockMonitor::with_retry(F&& f, std::string& error) -> std::optional<decltype(f())> {
  auto delay = options_.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    try {
      auto v = f();
      if (v) return v;
      error = "not available";
    } catch (const ReplayMiss&) {
      throw;
    } catch (const TransportError& e) {
      error = e.what();
    }
    if (attempt >= options_.max_retries) return std::nullopt;
    options_.sleep(delay);
    delay = std::min(delay * 2, options_.max_backoff);
  }
}

DeploymentEvent make_deployment_event(const Transaction& tx, const Receipt& receipt, std::int64_t block_timestamp) {
  DeploymentEvent ev;
  ev.creator = tx.from;
  ev.contract_address = receipt.contract_address.value_or(create_address(tx.from, tx.nonce));
  ev.tx_hash = tx.hash;
  ev.block_number = tx.block_number;
  ev.tx_index = tx.transaction_index;
  ev.block_timestamp = block_timestamp;
  ev.creation_input = tx.input;
  ev.value = tx.value;
  ev.gas_used = receipt.gas_used;
  ev.nonce = tx.nonce;
  ev.transaction = tx;
  ev.receipt = receipt;
  return ev;
}

std::optional<Hash32> find_creation_tx(Transport& explorer, const Address& contract) {
  const Json request = {{"module", "contract"}, {"action", "getcontractcreation"}, {"contractaddresses", contract.hex()}};
  const auto response = explorer.call("explorer", request);
  const auto& body = response.body;
  if (!body.contains("result") || !body.at("result").is_array() || body.at("result").empty()) return std::nullopt;
  const auto& entry = body.at("result").at(0);
  if (!entry.contains("txHash") || !entry.at("txHash").is_string()) return std::nullopt;
  return Hash32::from_hex(entry.at("txHash").get<std::string>());
}

std::optional<DeploymentEvent> load_deployment(ChainClient& client, const Hash32& tx_hash) {
  const auto tx = client.get_transaction(tx_hash);
  if (!tx || tx->to) return std::nullopt;
  const auto receipt = client.get_receipt(tx_hash);
  if (!receipt) return std::nullopt;
  const auto block = client.get_block(tx->block_number);
  if (!block) return std::nullopt;
  return make_deployment_event(*tx, *receipt, block->timestamp);
}

std::size_t BlockMonitor::run(const std::function<bool(const MonitorItem&)>& sink) {
  std::size_t delivered = 0;
  std::uint64_t next = options_.from_block;
  std::uint64_t last = options_.to_block ? *options_.to_block : client_.block_number();
  while (true) {
    for (; next <= last; ++next) {
      std::string error;
      const auto block = with_retry([&] { return client_.get_block(next); }, error);
      if (!block || !*block) {
        ++delivered;
        if (!sink({next, std::nullopt, "block " + std::to_string(next) + ": " + error})) return delivered;
        continue;
      }
      for (const auto& tx : (*block)->transactions) {
        if (tx.to) continue;
        MonitorItem item;
        item.block_number = next;
        const auto receipt = with_retry([&] { return client_.get_receipt(tx.hash); }, error);
        if (!receipt || !*receipt) {
          item.error = "receipt " + tx.hash.hex() + ": " + error;
        } else {
          item.event = make_deployment_event(tx, **receipt, (*block)->timestamp);
          item.event->block_number = next;
        }
        ++delivered;
        if (!sink(item)) return delivered;
      }
    }
    if (!options_.follow || (options_.to_block && next > *options_.to_block)) return delivered;
    options_.sleep(options_.poll_interval);
    last = client_.block_number();
  }
}

FixtureCallerHistory FixtureCallerHistory::parse(std::string_view text) {
  FixtureCallerHistory h;
  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string_view> f;
    for (auto t : split(line, ' '))
      if (!t.empty()) f.push_back(t);
    if (f.size() != 3)
      throw std::invalid_argument("caller history line " + std::to_string(line_no) + ": expected <contract> <caller> <ts>");
    h.add(Address::from_hex(f[0]), Address::from_hex(f[1]), std::stoll(std::string(f[2])));
  }
  return h;
}

FixtureCallerHistory FixtureCallerHistory::load(const std::string& path) { return parse(read_file(path)); }

void FixtureCallerHistory::add(const Address& contract, const Address& caller, std::int64_t ts) {
  calls_[contract].emplace_back(caller, ts);
}

std::vector<std::pair<Address, std::int64_t>> FixtureCallerHistory::callers(const Address& contract) {
  auto it = calls_.find(contract);
  if (it == calls_.end()) return {};
  return it->second;
}

std::vector<Address> build_benign_candidates(const std::vector<DeploymentEvent>& events,
                                             CallerHistoryProvider& history,
                                             const std::function<bool(const DeploymentEvent&)>& is_standard,
                                             const BenignCandidateOptions& options) {
  std::vector<Address> out;
  for (const auto& ev : events) {
    std::set<Address> unique;
    for (const auto& [caller, ts] : history.callers(ev.contract_address))
      if (ts >= ev.block_timestamp && ts <= ev.block_timestamp + options.window_seconds) unique.insert(caller);
    if (unique.size() < options.min_unique_callers) continue;
    if (is_standard && is_standard(ev)) continue;
    out.push_back(ev.contract_address);
  }
  return out;
}

}  // namespace sentinel::chain
