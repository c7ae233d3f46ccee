#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sentinel/fundsource/labels.hpp"

namespace sentinel::fundsource {

class ProviderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Answers the sender of the first value-bearing incoming transfer of an
/// address, ordered by (block number, transaction index). Implementations
/// throw ProviderError when the backing source fails.
class FundingGraphProvider {
 public:
  virtual ~FundingGraphProvider() = default;
  virtual std::optional<Address> earliest_incoming_funder(const Address& address) = 0;
};

struct Transfer {
  Address from;
  Address to;
  std::uint64_t block = 0;
  std::uint64_t index = 0;
  Uint256 value;
};

/// In-memory transfer graph. Text form, one transfer per line:
///   <funder hex> -> <fundee hex> block=<n> index=<n> value=<wei>
/// `value` accepts decimal or 0x-quantities.
class FixtureFundingGraph : public FundingGraphProvider {
 public:
  static FixtureFundingGraph parse(std::string_view text);
  static FixtureFundingGraph load(const std::string& path);

  void add(const Transfer& t);
  std::optional<Address> earliest_incoming_funder(const Address& address) override;
  std::size_t queries() const { return queries_; }

 private:
  std::map<Address, std::vector<Transfer>> incoming_;
  std::size_t queries_ = 0;
};

enum class TraceStop { Label, Depth, Cycle, NoFunder, ProviderFailure };

std::string_view trace_stop_name(TraceStop s);

struct TraceResult {
  FundSourceCategory category = FundSourceCategory::Unknown;
  std::optional<Address> source;     ///< labeled funder, when found
  std::optional<std::string> label;  ///< its label text
  std::size_t hops = 0;              ///< provider calls made
  TraceStop stop = TraceStop::NoFunder;
  std::vector<std::string> diagnostics;
};

inline constexpr std::size_t kDefaultMaxDepth = 10;

/// Follows earliest funders from `deployer`, at most `max_depth` hops. The
/// first funder with a label of a known category decides the result;
/// labels whose category is Unknown are passed through. Cycles, missing
/// funders, the depth limit and provider failures yield Unknown.
TraceResult trace_fund_source(const Address& deployer, FundingGraphProvider& provider, const AddressLabelDB& labels,
                              std::size_t max_depth = kDefaultMaxDepth);

/// Thread-safe memo of trace results keyed by deployer.
class CachedFundTracer {
 public:
  CachedFundTracer(FundingGraphProvider& provider, const AddressLabelDB& labels,
                   std::size_t max_depth = kDefaultMaxDepth)
      : provider_(provider), labels_(labels), max_depth_(max_depth) {}

  TraceResult trace(const Address& deployer);

 private:
  FundingGraphProvider& provider_;
  const AddressLabelDB& labels_;
  std::size_t max_depth_;
  std::mutex mutex_;
  std::map<Address, TraceResult> cache_;
};

}  // namespace sentinel::fundsource
