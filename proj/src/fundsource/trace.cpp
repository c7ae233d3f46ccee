#include "sentinel/fundsource/trace.hpp"

#include <set>

#include "sentinel/common/text.hpp"

namespace sentinel::fundsource {

namespace {

Uint256 parse_value(std::string_view v) {
  if (starts_with(v, "0x") || starts_with(v, "0X")) return Uint256::from_quantity(v);
  // Decimal: multiply-accumulate into 256 bits.
  Uint256 out;
  for (char c : v) {
    if (c < '0' || c > '9') throw std::invalid_argument("bad value '" + std::string(v) + "'");
    unsigned carry = static_cast<unsigned>(c - '0');
    for (std::size_t i = out.be.bytes.size(); i-- > 0;) {
      const unsigned x = out.be.bytes[i] * 10u + carry;
      out.be.bytes[i] = static_cast<std::uint8_t>(x & 0xff);
      carry = x >> 8;
    }
    if (carry != 0) throw std::invalid_argument("value exceeds 256 bits");
  }
  return out;
}

}  // namespace

std::string_view trace_stop_name(TraceStop s) {
  switch (s) {
    case TraceStop::Label: return "label";
    case TraceStop::Depth: return "depth";
    case TraceStop::Cycle: return "cycle";
    case TraceStop::NoFunder: return "no-funder";
    case TraceStop::ProviderFailure: return "provider-failure";
  }
  return "unknown";
}

FixtureFundingGraph FixtureFundingGraph::parse(std::string_view text) {
  FixtureFundingGraph g;
  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto where = "funding graph line " + std::to_string(line_no) + ": ";
    std::vector<std::string_view> toks;
    for (auto t : split(line, ' '))
      if (!trim(t).empty()) toks.push_back(trim(t));
    if (toks.size() < 3 || toks[1] != "->") throw std::invalid_argument(where + "expected '<from> -> <to> ...'");
    Transfer t;
    t.from = Address::from_hex(toks[0]);
    t.to = Address::from_hex(toks[2]);
    bool has_block = false, has_index = false, has_value = false;
    for (std::size_t i = 3; i < toks.size(); ++i) {
      const auto eq = toks[i].find('=');
      if (eq == std::string_view::npos) throw std::invalid_argument(where + "expected key=value");
      const auto key = toks[i].substr(0, eq);
      const auto value = toks[i].substr(eq + 1);
      if (key == "block") {
        t.block = std::stoull(std::string(value));
        has_block = true;
      } else if (key == "index") {
        t.index = std::stoull(std::string(value));
        has_index = true;
      } else if (key == "value") {
        t.value = parse_value(value);
        has_value = true;
      } else {
        throw std::invalid_argument(where + "unknown key '" + std::string(key) + "'");
      }
    }
    if (!has_block || !has_index || !has_value) throw std::invalid_argument(where + "block=, index= and value= are required");
    g.add(t);
  }
  return g;
}

FixtureFundingGraph FixtureFundingGraph::load(const std::string& path) { return parse(read_file(path)); }

void FixtureFundingGraph::add(const Transfer& t) { incoming_[t.to].push_back(t); }

std::optional<Address> FixtureFundingGraph::earliest_incoming_funder(const Address& address) {
  ++queries_;
  auto it = incoming_.find(address);
  if (it == incoming_.end()) return std::nullopt;
  const Transfer* best = nullptr;
  for (const auto& t : it->second) {
    if (t.value.is_zero()) continue;
    if (!best || std::pair(t.block, t.index) < std::pair(best->block, best->index)) best = &t;
  }
  if (!best) return std::nullopt;
  return best->from;
}

TraceResult trace_fund_source(const Address& deployer, FundingGraphProvider& provider, const AddressLabelDB& labels,
                              std::size_t max_depth) {
  TraceResult r;
  std::set<Address> visited{deployer};
  Address current = deployer;
  while (true) {
    if (r.hops == max_depth) {
      r.stop = TraceStop::Depth;
      return r;
    }
    std::optional<Address> funder;
    try {
      ++r.hops;
      funder = provider.earliest_incoming_funder(current);
    } catch (const std::exception& e) {
      r.stop = TraceStop::ProviderFailure;
      r.diagnostics.push_back("funding provider failed for " + current.hex() + ": " + e.what());
      return r;
    }
    if (!funder) {
      r.stop = TraceStop::NoFunder;
      return r;
    }
    if (auto hit = labels.lookup(*funder); hit && hit->category != FundSourceCategory::Unknown) {
      r.category = hit->category;
      r.source = *funder;
      r.label = hit->label;
      r.stop = TraceStop::Label;
      return r;
    }
    if (!visited.insert(*funder).second) {
      r.stop = TraceStop::Cycle;
      return r;
    }
    current = *funder;
  }
}

TraceResult CachedFundTracer::trace(const Address& deployer) {
  // Held across the trace: providers are not required to be reentrant.
  std::lock_guard lock(mutex_);
  if (auto it = cache_.find(deployer); it != cache_.end()) return it->second;
  return cache_.emplace(deployer, trace_fund_source(deployer, provider_, labels_, max_depth_)).first->second;
}

}  // namespace sentinel::fundsource
