#include "sentinel/evm/lift.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>

#include "sentinel/evm/opcodes.hpp"
#include "stack_sim.hpp"

namespace sentinel::evm {

namespace {

constexpr std::size_t kMaxBacktrackBlocks = 8;

std::string hex_id(std::uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

bool dispatcher_safe(std::uint8_t code) {
  if (is_push(code) || code == op::PUSH0) return true;
  if (code >= op::DUP1 && code <= op::SWAP16) return true;
  switch (code) {
    case op::POP:
    case op::EQ:
    case 0x10:  // LT
    case 0x11:  // GT
    case 0x03:  // SUB
    case 0x04:  // DIV
    case op::ISZERO:
    case op::AND:
    case op::SHR:
    case op::CALLDATASIZE:
    case op::CALLDATALOAD:
    case op::CALLVALUE:
    case op::MSTORE:
    case op::JUMP:
    case op::JUMPI:
    case op::JUMPDEST:
    case op::REVERT:
    case op::STOP:
      return true;
    default:
      return false;
  }
}

bool block_is_dispatcher_safe(const BasicBlock& b) {
  return std::all_of(b.statements.begin(), b.statements.end(),
                     [](const Instruction& i) { return dispatcher_safe(i.opcode); });
}

std::vector<std::pair<Selector, BlockId>> find_dispatch_targets(const Cfg& cfg) {
  std::vector<std::pair<Selector, BlockId>> found;
  if (cfg.blocks.empty()) return found;
  std::set<Selector> seen_selectors;
  std::set<BlockId> targets;
  std::set<BlockId> visited;
  std::deque<BlockId> queue{cfg.blocks.begin()->first};
  visited.insert(queue.front());
  while (!queue.empty()) {
    const BlockId id = queue.front();
    queue.pop_front();
    const BasicBlock& b = cfg.blocks.at(id);
    if (b.statements.empty()) continue;
    detail::StackSim sim;
    for (std::size_t i = 0; i + 1 < b.statements.size(); ++i) sim.step(b.statements[i]);
    if (b.statements.back().opcode == op::JUMPI && b.jump_target) {
      const auto& cond = sim.peek(1);
      if (cond.kind == detail::AbstractValue::Kind::SelectorMatch && seen_selectors.insert(cond.selector).second) {
        found.emplace_back(cond.selector, *b.jump_target);
        targets.insert(*b.jump_target);
      }
    }
    if (!block_is_dispatcher_safe(b)) continue;
    for (BlockId s : b.successors) {
      if (targets.contains(s) || !visited.insert(s).second) continue;
      queue.push_back(s);
    }
  }
  return found;
}

using ReachMap = std::map<BlockId, std::vector<BlockId>>;

ReachMap compute_reach(const Cfg& cfg, const std::set<BlockId>& roots) {
  ReachMap reach;
  for (BlockId root : roots) {
    std::set<BlockId> visited{root};
    std::deque<BlockId> queue{root};
    while (!queue.empty()) {
      const BlockId id = queue.front();
      queue.pop_front();
      reach[id].push_back(root);
      for (BlockId s : cfg.blocks.at(id).successors) {
        if (roots.contains(s) || !visited.insert(s).second) continue;
        queue.push_back(s);
      }
    }
  }
  return reach;
}

bool is_selector_constant(const Instruction& ins, Selector& out) {
  if (ins.opcode == op::PUSH4) {
    if (std::all_of(ins.push_operand.begin(), ins.push_operand.end(), [](std::uint8_t b) { return b == 0xff; }))
      return false;
    out = Selector::from_span(ins.push_operand);
    return true;
  }
  if (ins.opcode == op::PUSH32) {
    // Selector already shifted into the top four bytes.
    if (std::all_of(ins.push_operand.begin(), ins.push_operand.begin() + 4, [](std::uint8_t b) { return b == 0; }))
      return false;
    if (!std::all_of(ins.push_operand.begin() + 4, ins.push_operand.end(), [](std::uint8_t b) { return b == 0; }))
      return false;
    out = Selector::from_span(std::span<const std::uint8_t>(ins.push_operand.data(), 4));
    return true;
  }
  return false;
}

bool is_address_constant(const Instruction& ins, Address& out) {
  if (ins.opcode != op::PUSH20) return false;
  if (std::all_of(ins.push_operand.begin(), ins.push_operand.end(), [](std::uint8_t b) { return b == 0xff; }))
    return false;
  out = Address::from_span(ins.push_operand);
  return true;
}

bool is_call_like(std::uint8_t code) { return is_external_call(code) || is_create(code); }

/// Scans backwards from `index` (exclusive) in `id`, then along unique
/// same-function predecessors, stopping at an earlier call.
template <typename T, typename Match>
std::optional<T> backtrack(const Cfg& cfg, const std::map<BlockId, BlockId>& owner, BlockId id, std::size_t index,
                           Match match) {
  std::set<BlockId> seen;
  const BlockId fn = owner.at(id);
  for (std::size_t hop = 0; hop < kMaxBacktrackBlocks; ++hop) {
    if (!seen.insert(id).second) break;
    const auto& stmts = cfg.blocks.at(id).statements;
    for (std::size_t i = index; i-- > 0;) {
      if (is_call_like(stmts[i].opcode)) return std::nullopt;
      T value;
      if (match(stmts[i], value)) return value;
    }
    const auto& preds = cfg.blocks.at(id).predecessors;
    std::vector<BlockId> same_fn;
    for (BlockId p : preds) {
      auto it = owner.find(p);
      if (it != owner.end() && it->second == fn) same_fn.push_back(p);
    }
    if (same_fn.size() != 1) break;
    id = same_fn.front();
    index = cfg.blocks.at(id).statements.size();
  }
  return std::nullopt;
}

}  // namespace

std::vector<FunctionIR> discover_functions(const Cfg& cfg, std::vector<std::string>* diagnostics) {
  std::vector<FunctionIR> functions;
  if (cfg.blocks.empty()) return functions;
  auto diag = [&](std::string msg) {
    if (diagnostics) diagnostics->push_back(std::move(msg));
  };

  const BlockId entry = cfg.blocks.begin()->first;
  const auto dispatch = find_dispatch_targets(cfg);
  std::map<BlockId, Selector> public_entries;
  for (const auto& [sel, target] : dispatch) {
    if (target == entry) continue;
    if (!public_entries.emplace(target, sel).second)
      diag("selectors " + public_entries.at(target).hex() + " and " + sel.hex() + " share entry " + hex_id(target) +
           "; keeping the first");
  }
  if (dispatch.empty()) diag("no selector dispatcher found; code lifted as a single fallback function");

  std::set<BlockId> call_targets;
  for (const auto& [id, b] : cfg.blocks)
    if (b.return_site && b.jump_target) call_targets.insert(*b.jump_target);

  std::set<BlockId> roots{entry};
  for (const auto& [target, sel] : public_entries) roots.insert(target);
  std::set<BlockId> private_roots;

  ReachMap reach;
  while (true) {
    reach = compute_reach(cfg, roots);
    std::vector<BlockId> shared;
    for (const auto& [id, from] : reach)
      if (from.size() >= 2 && !roots.contains(id) && call_targets.contains(id)) shared.push_back(id);
    if (shared.empty()) break;
    for (BlockId id : shared) {
      roots.insert(id);
      private_roots.insert(id);
    }
  }

  std::map<BlockId, BlockId> owner;
  for (const auto& [id, from] : reach) owner[id] = roots.contains(id) ? id : from.front();

  std::map<BlockId, std::size_t> function_index;
  for (BlockId root : roots) {
    FunctionIR f;
    f.entry = root;
    if (root == entry) {
      f.visibility = Visibility::Fallback;
      f.name = "fallback";
    } else if (auto it = public_entries.find(root); it != public_entries.end()) {
      f.visibility = Visibility::Public;
      f.selector = it->second;
    } else {
      f.visibility = Visibility::Private;
    }
    function_index[root] = functions.size();
    functions.push_back(std::move(f));
  }

  for (const auto& [id, fn] : owner) {
    const BasicBlock& src = cfg.blocks.at(id);
    Block block;
    block.id = id;
    detail::StackSim sim;
    for (std::size_t i = 0; i < src.statements.size(); ++i) {
      const Instruction& ins = src.statements[i];
      Statement st;
      st.id = ins.offset;
      st.op = ins.opcode;
      st.operand = ins.push_operand;
      if (is_external_call(ins.opcode)) {
        const auto& slot = sim.peek(1);
        if (slot.is_constant() && slot.push_opcode == op::PUSH20) {
          st.target = Address::from_span(slot.constant);
        } else {
          st.target = backtrack<Address>(cfg, owner, id, i, is_address_constant);
        }
        st.selector = backtrack<Selector>(cfg, owner, id, i, is_selector_constant);
      }
      sim.step(ins);
      block.statements.push_back(std::move(st));
    }
    functions[function_index.at(fn)].blocks.emplace(id, std::move(block));
  }

  for (const auto& [id, fn] : owner) {
    const BasicBlock& src = cfg.blocks.at(id);
    auto& blocks = functions[function_index.at(fn)].blocks;
    for (BlockId s : src.successors) {
      auto so = owner.find(s);
      if (so == owner.end()) continue;
      if (so->second == fn) {
        blocks.at(id).successors.insert(s);
        blocks.at(s).predecessors.insert(id);
      } else if (private_roots.contains(s) && src.jump_target == s && !src.statements.empty() &&
                 src.statements.back().opcode == op::JUMP) {
        blocks.at(id).statements.back().callee = s;
      }
    }
  }
  return functions;
}

ContractIR lift(std::span<const std::uint8_t> runtime_bytecode, std::optional<Address> address) {
  ContractIR ir;
  ir.address = address;
  ir.runtime_bytecode.assign(runtime_bytecode.begin(), runtime_bytecode.end());
  const auto instrs = disassemble(runtime_bytecode);
  for (const auto& ins : instrs) ++ir.opcode_counts[ins.opcode];
  Cfg cfg = resolve_jumps(identify_basic_blocks(instrs));
  ir.diagnostics = cfg.diagnostics;
  ir.functions = discover_functions(cfg, &ir.diagnostics);
  return ir;
}

RuntimeSplit extract_runtime_code(std::span<const std::uint8_t> creation_input) {
  RuntimeSplit out;
  const auto instrs = disassemble(creation_input);
  for (const auto& block : identify_basic_blocks(instrs)) {
    detail::StackSim sim;
    std::optional<std::pair<std::uint64_t, std::uint64_t>> copy;
    for (const auto& ins : block.statements) {
      if (ins.opcode == op::CODECOPY) {
        const auto offset = sim.peek(1).as_u64();
        const auto size = sim.peek(2).as_u64();
        if (offset && size && *offset > 0 && *size > 0 && *offset + *size <= creation_input.size())
          copy = std::make_pair(*offset, *size);
      } else if (ins.opcode == op::RETURN && copy) {
        out.runtime.assign(creation_input.begin() + static_cast<std::ptrdiff_t>(copy->first),
                           creation_input.begin() + static_cast<std::ptrdiff_t>(copy->first + copy->second));
        out.split = true;
        return out;
      }
      sim.step(ins);
    }
  }
  out.runtime.assign(creation_input.begin(), creation_input.end());
  out.diagnostic = "no CODECOPY/RETURN constructor pattern found; treating the whole input as runtime code";
  return out;
}

}  // namespace sentinel::evm
