#include "sentinel/pipeline/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sentinel/common/keccak.hpp"
#include "sentinel/common/rng.hpp"

namespace sentinel::pipeline {

using features::FeatureRecord;
using fundsource::FundSourceCategory;

namespace {

struct Call {
  std::string text;
  bool token = false;
};

struct Function {
  std::string name;
  bool callback = false;
  std::vector<Call> calls;
};

const std::vector<std::string> kCallbacks = {"uniswapV2Call",  "pancakeCall",           "onFlashLoan",
                                             "executeOperation", "receiveFlashLoan",     "uniswapV3FlashCallback",
                                             "DVMFlashLoanCall", "DPPFlashLoanCall",     "callFunction"};
const std::vector<std::string> kAttackNames = {"attack", "exploit", "start", "execute", "go", "run", "pwn", "trigger"};
const std::vector<std::string> kBenignNames = {
    "deposit",  "withdraw",   "stake",    "unstake",   "claim",     "setOwner",   "transferOwnership", "pause",
    "unpause",  "harvest",    "getReward", "setFee",   "owner",     "initialize", "updateConfig",     "setRouter",
    "addPool",  "removePool", "emergencyWithdraw", "setRewardRate", "notifyRewardAmount", "recoverERC20", "setPaused",
    "lock",     "unlock",     "vote",     "propose",   "queue",     "cancel",     "register",         "renounceOwnership"};
const std::vector<std::string> kAdvTargets = {"UniswapV2Pair", "PancakePair", "WETH", "USDT", "USDC",
                                              "BalancerVault", "AaveLendingPool", "UnknownTarget"};
const std::vector<std::string> kBenignTargets = {"WETH", "USDC", "ChainlinkOracle", "UnknownTarget", "Registry",
                                                 "UniswapV2Router"};
const std::vector<std::string> kTokenFuncs = {"transfer", "transferFrom", "approve", "balanceOf", "swap",
                                              "getReserves", "sync", "skim"};
const std::vector<std::string> kOtherFuncs = {"latestAnswer", "lookup", "call", "staticcall", "getPrice", "UnknownFunc"};

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[rng.index(v.size())];
}

std::size_t range(Rng& rng, std::size_t lo, std::size_t hi) { return lo + rng.index(hi - lo + 1); }

FundSourceCategory draw_fund(Rng& rng, bool adversarial) {
  const double u = rng.uniform();
  if (adversarial) {
    if (u < 0.86) return FundSourceCategory::Anonymous;
    if (u < 0.92) return FundSourceCategory::Safe;
    if (u < 0.95) return FundSourceCategory::Bridge;
    return FundSourceCategory::Unknown;
  }
  if (u < 0.8) return FundSourceCategory::Safe;
  if (u < 0.9) return FundSourceCategory::Anonymous;
  if (u < 0.95) return FundSourceCategory::Bridge;
  return FundSourceCategory::Unknown;
}

std::string unknown_selector_name(Rng& rng) {
  static const char* hex = "0123456789abcdef";
  std::string s = "UnknownFunc_";
  for (int i = 0; i < 8; ++i) s += hex[rng.index(16)];
  return s;
}

Call token_call(Rng& rng, const std::vector<std::string>& targets) {
  return {pick(rng, targets) + "." + pick(rng, kTokenFuncs) + "(...args)", true};
}

Call other_call(Rng& rng, const std::vector<std::string>& targets) {
  return {pick(rng, targets) + "." + pick(rng, kOtherFuncs) + "(...args)", false};
}

std::string render(const std::vector<Function>& publics, std::size_t privates, std::size_t private_calls,
                   Rng& rng, const std::vector<std::string>& targets) {
  std::ostringstream os;
  auto emit = [&](std::size_t fi, const std::string& name, const std::vector<Call>& calls) {
    os << "function " << name << "\n";
    std::size_t b = 0;
    for (std::size_t i = 0; i < calls.size(); i += 3, ++b) {
      os << "BB_" << fi << "_" << b << ": ";
      for (std::size_t k = i; k < std::min(calls.size(), i + 3); ++k) os << (k > i ? "; " : "") << calls[k].text;
      os << "\n";
    }
    for (std::size_t k = 0; k + 1 < b; ++k) os << "BB_" << fi << "_" << k << " -> BB_" << fi << "_" << k + 1 << "\n";
  };
  std::size_t fi = 0;
  for (const auto& f : publics) emit(fi++, f.name, f.calls);
  emit(fi++, "fallback", {});
  for (std::size_t p = 0; p < privates; ++p) {
    std::vector<Call> calls;
    if (p < private_calls) calls.push_back(other_call(rng, targets));
    emit(fi++, "InternalFunction_" + std::to_string(p), calls);
  }
  return os.str();
}

FeatureRecord make_record(Rng& rng, bool adv, std::size_t index, std::uint64_t seed, std::int64_t ts) {
  FeatureRecord r;
  const auto h = keccak256("synthetic:" + std::to_string(seed) + ":" + std::to_string(index));
  r.contract_id = Address::from_span(std::span<const std::uint8_t>(h.bytes).subspan(12)).hex();
  r.label = adv ? 1 : 0;
  r.deploy_timestamp = ts;

  auto& d = r.deployment;
  d.fund_source = draw_fund(rng, adv);
  d.verified = adv ? rng.bernoulli(0.004) : rng.bernoulli(0.9);
  d.value_flag = adv ? rng.bernoulli(0.05) : rng.bernoulli(0.12);
  const double nonce = adv ? std::exp(rng.normal(0.5, 0.9)) - 1.0 : std::exp(rng.normal(4.0, 1.4));
  d.nonce = static_cast<std::uint64_t>(std::max(0.0, std::floor(nonce)));
  const double len = adv ? std::exp(rng.normal(std::log(9000.0), 0.55)) : std::exp(rng.normal(std::log(26000.0), 0.5));
  d.input_data_length = static_cast<std::uint64_t>(std::clamp(len, 200.0, 49152.0));
  d.gas_used = static_cast<std::uint64_t>(53000.0 + 200.0 * static_cast<double>(d.input_data_length) *
                                                        rng.uniform(0.85, 1.15));

  // routers look like attackers on token traffic, stealth attackers skip the callback pattern
  const bool router = !adv && rng.bernoulli(0.06);
  const bool stealth = adv && rng.bernoulli(0.08);
  if (stealth) d.fund_source = FundSourceCategory::Safe;
  const auto& targets = adv ? kAdvTargets : kBenignTargets;
  std::vector<Function> publics;
  std::size_t n_public = adv ? (rng.bernoulli(0.8) && !stealth ? range(rng, 2, 10) : range(rng, 11, 18))
                             : router ? range(rng, 4, 12)
                                      : (rng.bernoulli(0.78) ? range(rng, 20, 60) : range(rng, 6, 19));
  std::size_t callbacks = 0;
  if (adv ? !stealth && rng.bernoulli(0.75) : rng.bernoulli(0.004)) callbacks = adv ? range(rng, 1, 3) : 1;
  callbacks = std::min(callbacks, n_public);
  std::vector<std::string> cb = kCallbacks;
  rng.shuffle(cb);
  for (std::size_t i = 0; i < callbacks; ++i) publics.push_back({cb[i], true, {}});
  std::vector<std::string> names = adv ? kAttackNames : kBenignNames;
  rng.shuffle(names);
  std::size_t used = 0;
  while (publics.size() < n_public) {
    if (used < names.size() && rng.bernoulli(0.7)) publics.push_back({names[used++], false, {}});
    else publics.push_back({unknown_selector_name(rng), false, {}});
  }

  std::size_t tokens = 0;
  if (adv) tokens = rng.bernoulli(0.97) ? (rng.bernoulli(0.72) && !stealth ? range(rng, 10, 40) : range(rng, 2, 9)) : 0;
  else if (router) tokens = range(rng, 8, 30);
  else tokens = rng.bernoulli(0.1) ? range(rng, 1, 6) : 0;
  for (std::size_t t = 0; t < tokens; ++t) {
    // adversarial token traffic concentrates in callbacks and the entry
    std::size_t f = adv && callbacks > 0 && rng.bernoulli(0.6) ? rng.index(callbacks) : rng.index(publics.size());
    publics[f].calls.push_back(token_call(rng, targets));
  }
  const std::size_t others = adv ? range(rng, 0, 4) : range(rng, 2, 14);
  for (std::size_t t = 0; t < others; ++t) publics[rng.index(publics.size())].calls.push_back(other_call(rng, targets));
  auto& impl = r.implementation;
  impl.delegate_call_count = adv ? (rng.bernoulli(0.03) ? 1 : 0) : (rng.bernoulli(0.15) ? range(rng, 1, 2) : 0);
  impl.selfdestruct_count = adv ? (rng.bernoulli(0.3) ? 1 : 0) : (rng.bernoulli(0.02) ? 1 : 0);
  for (std::uint32_t i = 0; i < impl.delegate_call_count; ++i)
    publics[rng.index(publics.size())].calls.push_back({"UnknownTarget.delegatecall(...args)", false});
  for (std::uint32_t i = 0; i < impl.selfdestruct_count; ++i)
    publics[rng.index(publics.size())].calls.push_back({"SELFDESTRUCT(...args)", false});
  std::sort(publics.begin(), publics.end(), [](const Function& a, const Function& b) { return a.name < b.name; });

  const std::size_t privates = adv ? range(rng, 0, 4) : range(rng, 4, 30);
  const std::size_t private_calls = std::min(privates, adv ? range(rng, 0, 1) : range(rng, 0, 4));

  impl.public_func_count = static_cast<std::uint32_t>(publics.size());
  impl.func_count = static_cast<std::uint32_t>(publics.size() + 1 + privates);
  impl.flashloan_callback_count = static_cast<std::uint32_t>(callbacks);
  impl.flashloan_callback_ratio = static_cast<double>(callbacks) / static_cast<double>(publics.size());
  std::size_t external = private_calls, token_total = 0, max_tok = 0;
  for (const auto& f : publics) {
    std::size_t ft = 0;
    for (const auto& c : f.calls) {
      if (c.text.rfind("SELFDESTRUCT", 0) == 0) continue;
      ++external;
      ft += c.token ? 1 : 0;
    }
    token_total += ft;
    max_tok = std::max(max_tok, ft);
  }
  impl.token_call_count = static_cast<std::uint32_t>(token_total);
  impl.token_call_ratio = external ? static_cast<double>(token_total) / static_cast<double>(external) : 0.0;
  impl.max_token_call_count = static_cast<std::uint32_t>(max_tok);
  impl.avg_token_call_count = static_cast<double>(token_total) / static_cast<double>(publics.size());
  r.pscft = render(publics, privates, private_calls, rng, targets);
  return r;
}

}  // namespace

std::vector<FeatureRecord> generate_synthetic(const SyntheticOptions& options) {
  Rng rng(options.seed);
  std::vector<FeatureRecord> out;
  out.reserve(options.contracts);
  std::int64_t ts = options.start_timestamp;
  for (std::size_t i = 0; i < options.contracts; ++i) {
    ts += 12 + static_cast<std::int64_t>(rng.index(1200));
    const bool adv = rng.bernoulli(options.adversarial_fraction);
    out.push_back(make_record(rng, adv, i, options.seed, ts));
  }
  return out;
}

SyntheticStats synthetic_stats(const std::vector<FeatureRecord>& records) {
  SyntheticStats s;
  for (const auto& r : records) {
    const bool adv = r.label && *r.label == 1;
    const auto& d = r.deployment;
    const bool flash = r.implementation.flashloan_callback_count > 0;
    if (adv) {
      ++s.adversarial;
      s.adv_anonymous += d.fund_source == FundSourceCategory::Anonymous;
      s.adv_verified += d.verified;
      s.adv_flashloan += flash;
    } else {
      ++s.benign;
      s.benign_verified += d.verified;
      s.benign_safe += d.fund_source == FundSourceCategory::Safe;
      s.benign_flashloan += flash;
    }
  }
  auto norm = [](double& v, std::size_t n) { v = n ? v / static_cast<double>(n) : 0.0; };
  norm(s.adv_anonymous, s.adversarial);
  norm(s.adv_verified, s.adversarial);
  norm(s.adv_flashloan, s.adversarial);
  norm(s.benign_verified, s.benign);
  norm(s.benign_safe, s.benign);
  norm(s.benign_flashloan, s.benign);
  return s;
}

}  // namespace sentinel::pipeline
