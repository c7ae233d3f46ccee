// One PASS/FAIL line per acceptance criterion. Exit status is non-zero when
// any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "contract_builder.hpp"
#include "fake_chain.hpp"
#include "feature_fixtures.hpp"
#include "gradcheck.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "pipeline_fixtures.hpp"
#include "sentinel/common/keccak.hpp"
#include "sentinel/common/text.hpp"
#include "sentinel/evm/cfg.hpp"
#include "sentinel/evm/disassembler.hpp"
#include "sentinel/evm/lift.hpp"
#include "sentinel/features/features.hpp"
#include "sentinel/fundsource/trace.hpp"
#include "sentinel/ml/adasyn.hpp"
#include "sentinel/ml/ensemble.hpp"
#include "sentinel/ml/metrics.hpp"
#include "sentinel/ml/models.hpp"
#include "sentinel/ml/splits.hpp"
#include "sentinel/ml/transformer.hpp"
#include "sentinel/pipeline/analyzer.hpp"
#include "sentinel/pipeline/commands.hpp"
#include "sentinel/pipeline/dataset.hpp"
#include "sentinel/pipeline/monitor.hpp"
#include "sentinel/pipeline/synthetic.hpp"
#include "sentinel/pscft/call_flow.hpp"
#include "sentinel/pscft/pscft.hpp"
#include "sentinel/pscft/semantics.hpp"

using namespace sentinel;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
  void expect(bool cond, const std::string& why) {
    if (!cond) fail(why);
  }
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// ---- 1. lifter round trip and partition ----

Outcome lifter_round_trip() {
  Outcome o;
  Rng rng(2024);
  const auto t0 = Clock::now();
  for (int i = 0; i < 1000 && o.ok; ++i) {
    const auto code = evm::assemble_text(testing::random_program_asm(rng, 20 + rng.index(180)));
    const auto ins = evm::disassemble(code);
    if (evm::assemble(ins) != code) {
      o.fail("round trip differs on program " + std::to_string(i));
      break;
    }
    const auto blocks = evm::identify_basic_blocks(ins);
    std::size_t at = 0;
    std::uint32_t offset = 0;
    for (const auto& b : blocks) {
      o.expect(!b.statements.empty() && b.id == offset, "blocks are not contiguous in program " + std::to_string(i));
      for (const auto& s : b.statements) o.expect(at < ins.size() && s.offset == ins[at++].offset, "partition mismatch");
      offset = b.end_offset();
    }
    o.expect(at == ins.size() && offset == code.size(), "partition does not cover program " + std::to_string(i));
    try {
      evm::resolve_jumps(blocks).check_symmetry();
      evm::check_ir_invariants(evm::lift(code));
    } catch (const std::exception& e) {
      o.fail(std::string("invariant: ") + e.what());
    }
  }
  const double s = seconds_since(t0);
  o.expect(s < 10.0, "runtime " + fmt("%.2f s", s));
  if (o.ok) o.detail = "1000 programs, " + fmt("%.2f s", s);
  return o;
}

// ---- 2. pruning oracle ----

Outcome prune_oracle() {
  Outcome o;
  Rng rng(77);
  const auto t0 = Clock::now();
  std::size_t removed = 0;
  for (int i = 0; i < 500 && o.ok; ++i) {
    auto f = testing::random_call_function(rng, 30);
    o.expect(f.blocks.size() <= 30, "graph larger than 30 blocks");
    const auto before = testing::call_reachability(f);
    const auto n = f.blocks.size();
    pscft::prune_cfg(f);
    removed += n - f.blocks.size();
    o.expect(testing::call_reachability(f) == before, "reachability changed on graph " + std::to_string(i));
    for (const auto& [id, b] : f.blocks)
      if (id != f.entry && b.statements.empty()) o.fail("empty block survived on graph " + std::to_string(i));
  }
  const double s = seconds_since(t0);
  o.expect(s < 30.0, "runtime " + fmt("%.2f s", s));
  if (o.ok) o.detail = "500 graphs, " + std::to_string(removed) + " blocks pruned, " + fmt("%.2f s", s);
  return o;
}

// ---- 3. PSCFT determinism ----

Outcome pscft_determinism() {
  Outcome o;
  pscft::LocalSignatureDB sigs;
  for (const char* s : {"transfer(address,uint256)", "transferFrom(address,address,uint256)", "approve(address,uint256)",
                        "balanceOf(address)", "flash(address,uint256,uint256,bytes)",
                        "uniswapV2Call(address,uint256,uint256,bytes)", "attack()", "a()", "b()", "c()"})
    sigs.add(s);
  fundsource::AddressLabelDB db;
  const auto pool = testing::fixed_address(0x42);
  db.add(pool, {"UniswapV3", fundsource::FundSourceCategory::Unknown});
  pscft::DbLabelProvider labels(db);

  std::vector<std::pair<std::string, Bytes>> fixtures;
  for (auto& fx : testing::feature_fixtures()) fixtures.emplace_back(fx.name, fx.runtime);
  fixtures.emplace_back("mid-size", testing::mid_size_runtime(10000, 4));

  using testing::CallKind;
  testing::ContractSpec flash;
  flash.publics.push_back(
      {selector_of("attack()"),
       {testing::CallSpec{CallKind::Call, pool, Selector::from_hex("0x490e6cbc"), 0, true}}, 3, false});
  fixtures.emplace_back("flash", testing::build_runtime(flash));

  for (const auto& [name, code] : fixtures) {
    std::string first;
    for (int run = 0; run < 10; ++run) {
      const auto text = pscft::build_pscft(evm::lift(code), &sigs, &labels).text;
      if (run == 0) first = text;
      else if (text != first) o.fail("fixture " + name + " differs on run " + std::to_string(run));
    }
  }
  const std::string expected =
      "function attack\n"
      "BB_0_0: UniswapV3.flash(...args)\n"
      "function fallback\n";
  o.expect(pscft::build_pscft(evm::lift(fixtures.back().second), &sigs, &labels).text == expected,
           "flash rendering differs");
  if (o.ok) o.detail = std::to_string(fixtures.size()) + " fixtures x 10 runs";
  return o;
}

// ---- 4. feature fixtures ----

Outcome feature_extraction() {
  Outcome o;
  const auto config = features::FeatureConfig::defaults();
  std::size_t hidden = 0;
  const auto fixtures = testing::feature_fixtures();
  for (const auto& fx : fixtures) {
    const auto got = features::extract_implementation_features(evm::lift(fx.runtime), config);
    const auto& e = fx.expected;
    const bool same = got.func_count == e.func_count && got.public_func_count == e.public_func_count &&
                      got.flashloan_callback_count == e.flashloan_callback_count &&
                      got.flashloan_callback_ratio == e.flashloan_callback_ratio &&
                      got.token_call_count == e.token_call_count && got.token_call_ratio == e.token_call_ratio &&
                      got.max_token_call_count == e.max_token_call_count &&
                      got.avg_token_call_count == e.avg_token_call_count &&
                      got.delegate_call_count == e.delegate_call_count && got.selfdestruct_count == e.selfdestruct_count;
    o.expect(same, "fixture " + fx.name + " differs from the hand count");
    // raw byte scan would over-count when opcode bytes sit inside PUSH data
    const auto raw_delegate = std::count(fx.runtime.begin(), fx.runtime.end(), std::uint8_t{0xf4});
    const auto raw_selfdestruct = std::count(fx.runtime.begin(), fx.runtime.end(), std::uint8_t{0xff});
    if ((fx.name == "delegate-2" && raw_delegate > e.delegate_call_count) ||
        (fx.name == "selfdestruct-1" && raw_selfdestruct > e.selfdestruct_count))
      ++hidden;
  }
  o.expect(fixtures.size() == 10, "expected 10 fixtures");
  o.expect(hidden == 2, "hidden-opcode fixtures carry no hidden bytes");
  if (o.ok) o.detail = "10 fixtures exact, " + std::to_string(hidden) + " with hidden opcode bytes";
  return o;
}

// ---- 5. fund tracing against a first-hop oracle ----

Address node(unsigned n) {
  Address a;
  a.bytes[0] = 0xfd;
  a.bytes[18] = static_cast<std::uint8_t>(n >> 8);
  a.bytes[19] = static_cast<std::uint8_t>(n);
  return a;
}

struct OracleTrace {
  fundsource::FundSourceCategory category = fundsource::FundSourceCategory::Unknown;
  fundsource::TraceStop stop = fundsource::TraceStop::NoFunder;
  std::size_t hops = 0;
};

// Breadth-first walk over the first-hop graph (the earliest value-bearing
// incoming edge of each node, found by a linear scan of the transfers).
OracleTrace first_hop_oracle(const std::vector<fundsource::Transfer>& transfers,
                             const std::map<Address, fundsource::FundSourceCategory>& labels, const Address& start,
                             std::size_t max_depth) {
  auto first_hop = [&](const Address& a) -> std::optional<Address> {
    const fundsource::Transfer* best = nullptr;
    for (const auto& t : transfers)
      if (t.to == a && !t.value.is_zero() &&
          (!best || std::tie(t.block, t.index) < std::tie(best->block, best->index)))
        best = &t;
    if (!best) return std::nullopt;
    return best->from;
  };
  OracleTrace r;
  std::map<Address, std::size_t> dist{{start, 0}};
  std::vector<Address> frontier{start};
  for (std::size_t depth = 1; !frontier.empty(); ++depth) {
    if (depth > max_depth) {
      r.stop = fundsource::TraceStop::Depth;
      r.hops = max_depth;
      return r;
    }
    std::vector<Address> next;
    for (const auto& a : frontier) {
      const auto f = first_hop(a);
      r.hops = depth;
      if (!f) {
        r.stop = fundsource::TraceStop::NoFunder;
        return r;
      }
      if (auto it = labels.find(*f); it != labels.end() && it->second != fundsource::FundSourceCategory::Unknown) {
        r.category = it->second;
        r.stop = fundsource::TraceStop::Label;
        return r;
      }
      if (dist.contains(*f)) {
        r.stop = fundsource::TraceStop::Cycle;
        return r;
      }
      dist[*f] = depth;
      next.push_back(*f);
    }
    frontier = std::move(next);
  }
  return r;
}

Outcome fund_tracing() {
  Outcome o;
  Rng rng(5150);
  std::map<fundsource::TraceStop, std::size_t> stops;
  const fundsource::FundSourceCategory cats[] = {
      fundsource::FundSourceCategory::Anonymous, fundsource::FundSourceCategory::Safe,
      fundsource::FundSourceCategory::Bridge, fundsource::FundSourceCategory::Unknown};
  for (int g = 0; g < 50; ++g) {
    const unsigned nodes = 8 + static_cast<unsigned>(rng.index(30));
    std::vector<fundsource::Transfer> transfers;
    const int shape = g % 3;
    if (shape == 1) {  // long unlabeled chain for the depth limit
      for (unsigned i = 1; i < nodes; ++i) transfers.push_back({node(i + 1), node(i), 1000 - i, 0, Uint256::from_u64(1)});
    } else if (shape == 2) {  // ring back to the deployer
      const unsigned len = 2 + static_cast<unsigned>(rng.index(6));
      for (unsigned i = 1; i <= len; ++i)
        transfers.push_back({node(i % len + 1), node(i), 500 - i, 0, Uint256::from_u64(1 + rng.index(5))});
    }
    const std::size_t extra = shape == 0 ? nodes * 3 : nodes / 2;
    for (std::size_t k = 0; k < extra; ++k) {
      const unsigned from = 1 + static_cast<unsigned>(rng.index(nodes));
      const unsigned to = 1 + static_cast<unsigned>(rng.index(nodes));
      if (from == to) continue;
      // later than the structural edges so they do not reorder the first hops
      const std::uint64_t block = shape == 0 ? rng.index(50) : 2000 + rng.index(50);
      transfers.push_back({node(from), node(to), block, rng.index(4), Uint256::from_u64(rng.index(3))});
    }
    std::map<Address, fundsource::FundSourceCategory> label_map;
    fundsource::AddressLabelDB db;
    const double density = shape == 0 ? 0.2 : 0.0;
    for (unsigned n = 2; n <= nodes; ++n)
      if (rng.uniform() < density) {
        const auto c = cats[rng.index(4)];
        label_map[node(n)] = c;
        db.add(node(n), {"n" + std::to_string(n), c});
      }
    fundsource::FixtureFundingGraph graph;
    for (const auto& t : transfers) graph.add(t);
    const std::size_t max_depth = shape == 1 ? 5 + rng.index(6) : 1 + rng.index(12);

    const auto want = first_hop_oracle(transfers, label_map, node(1), max_depth);
    const auto got = fundsource::trace_fund_source(node(1), graph, db, max_depth);
    ++stops[got.stop];
    o.expect(got.category == want.category && got.stop == want.stop && got.hops == want.hops,
             "graph " + std::to_string(g) + ": got " + std::string(fundsource::trace_stop_name(got.stop)) + "/" +
                 std::to_string(got.hops) + ", oracle " + std::string(fundsource::trace_stop_name(want.stop)) + "/" +
                 std::to_string(want.hops));
    o.expect(got.hops <= max_depth, "more provider calls than max_depth");
  }
  o.expect(stops[fundsource::TraceStop::Depth] > 0, "no graph reached the depth limit");
  o.expect(stops[fundsource::TraceStop::Cycle] > 0, "no graph hit a cycle");
  o.expect(stops[fundsource::TraceStop::Label] > 0, "no graph hit a label");
  if (o.ok)
    o.detail = "50 graphs: label " + std::to_string(stops[fundsource::TraceStop::Label]) + ", depth " +
               std::to_string(stops[fundsource::TraceStop::Depth]) + ", cycle " +
               std::to_string(stops[fundsource::TraceStop::Cycle]) + ", no funder " +
               std::to_string(stops[fundsource::TraceStop::NoFunder]);
  return o;
}

// ---- 6. ADASYN ----

// k nearest neighbours of row i by squared distance, ties by index
std::vector<std::size_t> knn(const ml::Matrix& X, std::size_t i, const std::vector<std::size_t>& pool, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> d;
  for (auto j : pool)
    if (j != i) d.emplace_back((X.row(static_cast<Eigen::Index>(j)) - X.row(static_cast<Eigen::Index>(i))).squaredNorm(), j);
  std::sort(d.begin(), d.end());
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < k && n < d.size(); ++n) out.push_back(d[n].second);
  return out;
}

Outcome adasyn_checks() {
  Outcome o;
  {
    ml::Matrix X(12, 1);
    std::vector<int> y;
    for (int i = 0; i < 9; ++i) {
      X(i, 0) = 0.1 * i;
      y.push_back(0);
    }
    X(9, 0) = 0.95;
    X(10, 0) = 1.0;
    X(11, 0) = 1.1;
    y.insert(y.end(), {0, 1, 1});
    const std::size_t k = 1;
    // reference formula
    std::vector<std::size_t> all(12), minority;
    for (std::size_t i = 0; i < 12; ++i) {
      all[i] = i;
      if (y[i]) minority.push_back(i);
    }
    const double G = (12.0 - 2.0 * minority.size()) * 1.0;
    std::vector<double> r;
    for (auto i : minority) {
      double maj = 0;
      for (auto j : knn(X, i, all, k)) maj += y[j] == 0;
      r.push_back(maj / k);
    }
    double sum = 0;
    for (double v : r) sum += v;
    std::vector<std::size_t> g;
    for (double v : r) g.push_back(static_cast<std::size_t>(std::lround(v / sum * G)));

    const auto res = ml::adasyn(X, y, 1.0, k, 7);
    o.expect(res.G == G, "G differs");
    o.expect(res.g == g, "g_i differ from the reference formula");
    o.expect(static_cast<std::size_t>(res.X.rows()) == 12 + g[0] + g[1], "synthetic count differs");
  }
  Rng rng(31);
  std::size_t synthetics = 0;
  for (int trial = 0; synthetics < 10000 && o.ok; ++trial) {
    const Eigen::Index n = 60 + static_cast<Eigen::Index>(rng.index(80));
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(5));
    ml::Matrix X(n, d);
    std::vector<int> y(static_cast<std::size_t>(n));
    std::vector<std::size_t> minority;
    for (Eigen::Index i = 0; i < n; ++i) {
      y[static_cast<std::size_t>(i)] = i < 6 || rng.uniform() < 0.12;
      for (Eigen::Index c = 0; c < d; ++c) X(i, c) = rng.normal(y[static_cast<std::size_t>(i)] ? 1.0 : 0.0, 1.0);
      if (y[static_cast<std::size_t>(i)]) minority.push_back(static_cast<std::size_t>(i));
    }
    const std::size_t k = 1 + rng.index(std::min<std::size_t>(5, minority.size() - 1));
    const auto res = ml::adasyn(X, y, 0.5 + 0.5 * rng.uniform(), k, static_cast<std::uint64_t>(trial));
    o.expect(res.origins.size() == static_cast<std::size_t>(res.X.rows() - n), "origin count differs");
    for (std::size_t s = 0; s < res.origins.size(); ++s) {
      const auto& org = res.origins[s];
      const auto row = res.X.row(n + static_cast<Eigen::Index>(s));
      o.expect(y[org.base] == 1 && y[org.neighbor] == 1, "origin is not a minority row");
      const auto nb = knn(X, org.base, minority, k);
      o.expect(std::find(nb.begin(), nb.end(), org.neighbor) != nb.end(), "neighbour outside the k nearest");
      o.expect(org.lambda >= 0 && org.lambda <= 1, "lambda outside [0, 1]");
      const auto a = X.row(static_cast<Eigen::Index>(org.base));
      const auto b = X.row(static_cast<Eigen::Index>(org.neighbor));
      const auto expect = a + org.lambda * (b - a);
      o.expect((row - expect).norm() <= 1e-9 * (1 + a.norm() + b.norm()), "synthetic off its segment");
      o.expect(res.y[static_cast<std::size_t>(n) + s] == 1, "synthetic not labeled minority");
      ++synthetics;
    }
  }
  if (o.ok) o.detail = "g_i exact, " + std::to_string(synthetics) + " synthetics on segments";
  return o;
}

// ---- 7. gradient checks ----

Outcome gradient_checks() {
  Outcome o;
  const auto t0 = Clock::now();
  ml::TransformerConfig c;
  c.vocab_size = 12;
  c.d_model = 8;
  c.heads = 2;
  c.layers = 2;
  c.d_ff = 16;
  c.max_length = 16;
  c.dropout = 0.0;
  c.seed = 3;
  ml::TransformerModel m(c);
  double worst_t = 0;
  for (const auto& ids : {std::vector<ml::TokenId>{2, 5, 7, 3, 9, 11, 4, 4, 6}, std::vector<ml::TokenId>{1, 8, 10}}) {
    for (int label : {0, 1}) {
      std::vector<double> g;
      m.example_loss(ids, label, 1.3, &g, nullptr);
      auto f = [&](const std::vector<double>& th) {
        ml::TransformerModel copy = m;
        copy.parameters() = th;
        return copy.example_loss(ids, label, 1.3, nullptr, nullptr);
      };
      const auto chk = testing::central_difference_check(f, m.parameters(), g, 1e-4, 1e-7);
      o.expect(chk.checked == m.parameter_count(), "not every transformer parameter checked");
      worst_t = std::max(worst_t, chk.max_rel_error);
    }
  }
  o.expect(worst_t < 1e-4, "transformer rel err " + fmt("%.3g", worst_t));

  Rng rng(8);
  ml::Matrix X(60, 4);
  std::vector<int> y(60);
  for (Eigen::Index i = 0; i < 60; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) X(i, j) = rng.normal(0, 1);
    y[static_cast<std::size_t>(i)] = X(i, 0) - 0.5 * X(i, 2) + rng.normal(0, 0.5) > 0;
  }
  double worst_lr = 0;
  for (int t = 0; t < 5; ++t) {
    ml::Vector theta(5);
    for (Eigen::Index j = 0; j < 5; ++j) theta(j) = rng.normal(0, 1);
    ml::Vector grad;
    ml::LogisticRegression::loss(X, y, theta, 0.01, &grad);
    std::vector<double> th(theta.data(), theta.data() + 5), g(grad.data(), grad.data() + 5);
    auto f = [&](const std::vector<double>& v) {
      return ml::LogisticRegression::loss(X, y, Eigen::Map<const ml::Vector>(v.data(), 5), 0.01, nullptr);
    };
    worst_lr = std::max(worst_lr, testing::central_difference_check(f, th, g, 1e-5, 1e-7).max_rel_error);
  }
  o.expect(worst_lr < 1e-6, "LR rel err " + fmt("%.3g", worst_lr));
  const double s = seconds_since(t0);
  o.expect(s < 60.0, "runtime " + fmt("%.2f s", s));
  if (o.ok)
    o.detail = "transformer " + fmt("%.2g", worst_t) + ", LR " + fmt("%.2g", worst_lr) + ", " + fmt("%.2f s", s);
  return o;
}

// ---- 8. metrics ----

Outcome metric_fidelity() {
  Outcome o;
  const double a = ml::f1_score(0.9286, 0.8667), b = ml::f1_score(0.8333, 0.8784);
  o.expect(std::abs(a - 0.8966) <= 1e-4, "F1 " + fmt("%.6f", a) + " vs 0.8966");
  o.expect(std::abs(b - 0.8553) <= 1e-4, "F1 " + fmt("%.6f", b) + " vs 0.8553");
  Rng rng(1001);
  for (int trial = 0; trial < 1000 && o.ok; ++trial) {
    const std::size_t n = 1 + rng.index(200);
    std::vector<double> p(n);
    std::vector<int> y(n);
    double tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = rng.uniform();
      y[i] = rng.uniform() < 0.3;
      const bool pos = p[i] >= 0.5;
      (pos ? (y[i] ? tp : fp) : (y[i] ? fn : tn)) += 1;
    }
    const double prec = tp + fp > 0 ? tp / (tp + fp) : 0, rec = tp + fn > 0 ? tp / (tp + fn) : 0;
    const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0;
    const double fpr = fp + tn > 0 ? fp / (fp + tn) : 0, acc = (tp + tn) / static_cast<double>(n);
    const auto r = ml::evaluate(p, y);
    const bool same = r.tp == tp && r.fp == fp && r.tn == tn && r.fn == fn && std::abs(r.precision - prec) < 1e-12 &&
                      std::abs(r.recall - rec) < 1e-12 && std::abs(r.f1 - f1) < 1e-12 &&
                      std::abs(r.fpr - fpr) < 1e-12 && std::abs(r.accuracy - acc) < 1e-12;
    o.expect(same, "vector " + std::to_string(trial) + " differs from the counting oracle");
  }
  if (o.ok) o.detail = "F1 " + fmt("%.4f", a) + " and " + fmt("%.4f", b) + ", 1000 vectors match";
  return o;
}

// ---- 9. split protocol ----

Outcome split_protocol() {
  Outcome o;
  Rng rng(909);
  for (int trial = 0; trial < 100 && o.ok; ++trial) {
    const std::size_t n = 20 + rng.index(300);
    std::vector<ml::TimeKey> keys(n);
    std::vector<int> y(n);
    const auto span = 1 + rng.index(n * 2);  // small spans force timestamp ties
    for (std::size_t i = 0; i < n; ++i) {
      keys[i] = {static_cast<std::int64_t>(rng.index(span)), "c" + std::to_string(rng.index(1000000))};
      y[i] = rng.uniform() < 0.3;
    }
    y[0] = 1;
    y[1] = 0;
    auto ts = [&](std::size_t i) { return keys[i].timestamp; };
    auto max_of = [&](const std::vector<std::size_t>& v) {
      std::int64_t m = INT64_MIN;
      for (auto i : v) m = std::max(m, ts(i));
      return m;
    };
    auto min_of = [&](const std::vector<std::size_t>& v) {
      std::int64_t m = INT64_MAX;
      for (auto i : v) m = std::min(m, ts(i));
      return m;
    };
    const auto s = ml::chrono_split(keys);
    std::set<std::size_t> all(s.base_train.begin(), s.base_train.end());
    all.insert(s.meta_train.begin(), s.meta_train.end());
    all.insert(s.test.begin(), s.test.end());
    o.expect(all.size() == n && s.base_train.size() + s.meta_train.size() + s.test.size() == n,
             "split is not a partition");
    o.expect(max_of(s.base_train) <= min_of(s.meta_train), "base_train later than meta_train");
    o.expect(std::max(max_of(s.base_train), max_of(s.meta_train)) <= min_of(s.test), "training later than test");

    const std::size_t splits = 2 + rng.index(std::min<std::size_t>(9, n - 1));
    const auto plan = ml::expanding_window_cv(keys, y, splits);
    for (const auto& f : plan.folds) o.expect(max_of(f.train) <= min_of(f.test), "fold leaks future rows");
  }
  std::vector<ml::TimeKey> keys;
  std::vector<int> y;
  for (int i = 0; i < 100; ++i) {
    keys.push_back({1000 + 7 * i, "k" + std::to_string(i)});
    y.push_back(i % 4 == 0);
  }
  const auto plan = ml::expanding_window_cv(keys, y, 5);
  o.expect(plan.folds.size() == 4, "5-split CV gave " + std::to_string(plan.folds.size()) + " folds");
  for (std::size_t i = 1; i < plan.folds.size(); ++i)
    o.expect(plan.folds[i].train.size() > plan.folds[i - 1].train.size(), "train window does not grow");
  if (o.ok) o.detail = "100 datasets without leakage, 4 folds from 5 splits";
  return o;
}

// ---- 10. end-to-end scaled experiment ----

Outcome end_to_end() {
  Outcome o;
  const auto t0 = Clock::now();
  int meta_wins = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto records = pipeline::generate_synthetic({.contracts = 2000, .seed = seed});
    const auto st = pipeline::synthetic_stats(records);
    o.expect(st.adv_anonymous > 0.70 && st.adv_verified < 0.02 && st.benign_verified > 0.85 &&
                 st.benign_safe > 0.75 && st.adv_flashloan > 0.60 && st.benign_flashloan < 0.01,
             "generator statistics off for seed " + std::to_string(seed));
    ml::EnsembleConfig cfg;
    cfg.seed = seed;
    cfg.transformer = testing::small_transformer();
    const auto e = ml::train_ensemble(records, cfg);
    const auto rows = ml::evaluate_ensemble(e, ml::test_slice(records));
    double best_base = 0;
    for (std::size_t i = 0; i < 5; ++i) best_base = std::max(best_base, rows[i].report.f1);
    const auto& meta = rows[5 + e.selected_meta].report;
    o.expect(meta.f1 >= 0.95, "seed " + std::to_string(seed) + " meta F1 " + fmt("%.4f", meta.f1));
    o.expect(meta.fpr <= 0.01, "seed " + std::to_string(seed) + " meta FPR " + fmt("%.4f", meta.fpr));
    if (meta.f1 >= best_base) ++meta_wins;
    per_seed += (per_seed.empty() ? "" : "; ") + rows[5 + e.selected_meta].name + " " + fmt("%.4f", meta.f1) +
                "/" + fmt("%.4f", best_base);
  }
  o.expect(meta_wins >= 3, "meta >= best base on " + std::to_string(meta_wins) + " of 5 seeds");
  const double s = seconds_since(t0);
  o.expect(s < 600.0, "runtime " + fmt("%.1f s", s));
  o.detail = (o.ok ? "" : o.detail + " | ") + "meta wins " + std::to_string(meta_wins) + "/5 (meta/best base: " +
             per_seed + "), " + fmt("%.1f s", s);
  return o;
}

// ---- 11. latency ----

Outcome latency() {
  Outcome o;
  testing::TempDir dir("accept_latency");
  auto chain = std::make_shared<testing::FakeChain>();
  testing::add_common_signatures(*chain);
  const auto code = testing::mid_size_runtime(10000, 4);
  write_file(dir.file("mid.hex"), to_hex(code));
  pipeline::Analyzer analyzer(testing::scenario_config(dir, chain::Mode::Live), chain, testing::toy_model());
  std::ostringstream out;
  const auto t0 = Clock::now();
  const int rc = pipeline::cmd_analyze(analyzer, dir.file("mid.hex"), {dir.file("report.json"), false}, out);
  const double wall = seconds_since(t0);
  o.expect(rc != pipeline::kExitError, "analysis failed: " + out.str());
  const auto report = nlohmann::json::parse(read_file(dir.file("report.json")));
  const auto& t = report.at("timings");
  for (const char* k : {"external_fetch_s", "lift_and_pscft_s", "inference_s", "total_s"})
    o.expect(t.contains(k), std::string("timing missing: ") + k);
  const double total = t.at("total_s").get<double>(), inference = t.at("inference_s").get<double>();
  o.expect(total < 20.0 && wall < 20.0, "total " + fmt("%.3f s", total));
  o.expect(inference < 0.1, "inference " + fmt("%.4f s", inference));
  o.expect(out.str().find("timings") != std::string::npos, "timings not printed");
  if (o.ok)
    o.detail = std::to_string(code.size()) + " bytes: lift+pscft " + fmt("%.3f s", t.at("lift_and_pscft_s").get<double>()) +
               ", inference " + fmt("%.4f s", inference) + ", total " + fmt("%.3f s", total);
  return o;
}

// ---- 12. replay determinism ----

Outcome replay_determinism() {
  Outcome o;
  testing::TempDir dir("accept_replay");
  auto chain = std::make_shared<testing::FakeChain>();
  Rng rng(12);
  std::uint16_t actor = 1;
  testing::add_common_signatures(*chain);
  for (std::uint64_t n = 200; n <= 209; ++n) {
    chain->add_block(n, 1700000000 + static_cast<std::int64_t>(n) * 12);
    const auto kind = n % 3 == 0 ? testing::FixtureKind::Adversarial
                      : n % 3 == 1 ? testing::FixtureKind::Benign
                                   : testing::FixtureKind::Token;
    testing::deploy_fixture(*chain, n, kind, rng, actor);
    if (n % 2) testing::deploy_fixture(*chain, n, testing::FixtureKind::Benign, rng, actor);
  }
  chain->set_head(209);

  auto config = [&](chain::Mode mode, const std::string& alerts) {
    auto c = testing::scenario_config(dir, mode, dir.file("snapshot.jsonl"));
    c.from_block = 200;
    c.alerts = dir.file(alerts);
    c.workers = 3;
    return c;
  };
  std::ostringstream sink;
  {
    pipeline::Analyzer rec(config(chain::Mode::Record, "record.jsonl"), chain, testing::toy_model());
    pipeline::run_monitor(rec, sink, sink);
  }
  std::vector<std::string> logs;
  for (const char* name : {"replay1.jsonl", "replay2.jsonl"}) {
    pipeline::Analyzer rep(config(chain::Mode::Replay, name), nullptr, testing::toy_model());
    const auto s = pipeline::run_monitor(rep, sink, sink);
    o.expect(s.failed == 0 && !s.producer_error, "replay run had failures");
    logs.push_back(read_file(dir.file(name)));
  }
  const auto alerts = split(trim(logs[0]), '\n').size();
  o.expect(!trim(logs[0]).empty(), "no alerts raised");
  o.expect(logs[0] == logs[1], "alert logs differ");

  pipeline::save_dataset(dir.file("d.jsonl"),
                         pipeline::generate_synthetic({.contracts = 300, .adversarial_fraction = 0.2, .seed = 4}));
  pipeline::PipelineConfig cfg;
  cfg.seed = 9;
  cfg.transformer = testing::small_transformer();
  cfg.transformer.epochs = 3;
  const auto a = pipeline::cmd_train(cfg, dir.file("d.jsonl"), dir.file("b1"), sink);
  const auto b = pipeline::cmd_train(cfg, dir.file("d.jsonl"), dir.file("b2"), sink);
  o.expect(a.bundle_hash == b.bundle_hash, "bundle hashes differ");
  if (o.ok) o.detail = std::to_string(alerts) + " alerts identical, bundle " + a.bundle_hash.hex().substr(0, 18);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"lifter round trip and invariants", lifter_round_trip},
      {"pruning reachability oracle", prune_oracle},
      {"PSCFT determinism and flash rendering", pscft_determinism},
      {"implementation features on fixtures", feature_extraction},
      {"fund tracing against first-hop oracle", fund_tracing},
      {"ADASYN counts and segments", adasyn_checks},
      {"gradient checks", gradient_checks},
      {"metric fidelity", metric_fidelity},
      {"split protocol", split_protocol},
      {"end-to-end synthetic experiment", end_to_end},
      {"analysis latency", latency},
      {"replay determinism", replay_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    failed += !o.ok;
    std::cout << (o.ok ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failed ? 1 : 0;
}
