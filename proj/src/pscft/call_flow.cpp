#include "sentinel/pscft/call_flow.hpp"

#include <stdexcept>

#include "sentinel/evm/opcodes.hpp"
#include "sentinel/pscft/semantics.hpp"

namespace sentinel::pscft {

namespace op = evm::op;

std::string CallStatement::render() const {
  switch (kind) {
    case CallKind::Private:
      return (callee_name.empty() ? std::string("InternalFunction") : callee_name) + "(...args)";
    case CallKind::Create:
      return opcode == op::CREATE2 ? "CREATE2(...args)" : "CREATE(...args)";
    case CallKind::SelfDestruct:
      return "SELFDESTRUCT(...args)";
    case CallKind::External:
      break;
  }
  std::string func;
  if (resolved_signature) {
    func = signature_name(*resolved_signature);
  } else if (selector) {
    func = kUnknownFunc;
  } else {
    switch (opcode) {
      case op::STATICCALL: func = "staticcall"; break;
      case op::DELEGATECALL: func = "delegatecall"; break;
      case op::CALLCODE: func = "callcode"; break;
      default: func = "call"; break;
    }
  }
  return target_label + "." + func + "(...args)";
}

std::size_t CallFunction::call_count() const {
  std::size_t n = 0;
  for (const auto& [id, b] : blocks) n += b.statements.size();
  return n;
}

namespace {

CallStatement to_call(const evm::Statement& s) {
  CallStatement c;
  c.opcode = s.op;
  c.target = s.target;
  c.selector = s.selector;
  c.callee = s.callee;
  if (s.callee || s.op == evm::kCallPrivate) {
    c.kind = CallKind::Private;
  } else if (s.op == op::CREATE || s.op == op::CREATE2) {
    c.kind = CallKind::Create;
  } else if (s.op == op::SELFDESTRUCT) {
    c.kind = CallKind::SelfDestruct;
  } else {
    c.kind = CallKind::External;
  }
  if (c.kind != CallKind::External) c.selector.reset();
  return c;
}

}  // namespace

CallFlowIR filter_call_statements(const evm::ContractIR& ir) {
  CallFlowIR out;
  out.address = ir.address;
  for (const auto& f : ir.functions) {
    CallFunction cf;
    cf.selector = f.selector;
    cf.visibility = f.visibility;
    cf.name = f.name;
    cf.entry = f.entry;
    for (const auto& [id, b] : f.blocks) {
      CallBlock cb;
      cb.id = id;
      cb.predecessors = b.predecessors;
      cb.successors = b.successors;
      for (const auto& s : b.statements)
        if (evm::is_call_statement(s)) cb.statements.push_back(to_call(s));
      cf.blocks.emplace(id, std::move(cb));
    }
    out.functions.push_back(std::move(cf));
  }
  return out;
}

void prune_cfg(CallFunction& fn) {
  std::vector<BlockId> doomed;
  for (const auto& [id, b] : fn.blocks)
    if (id != fn.entry && b.statements.empty()) doomed.push_back(id);
  for (BlockId id : doomed) {
    auto node = fn.blocks.extract(id);
    CallBlock& b = node.mapped();
    b.predecessors.erase(id);
    b.successors.erase(id);
    for (BlockId p : b.predecessors) fn.blocks.at(p).successors.erase(id);
    for (BlockId s : b.successors) fn.blocks.at(s).predecessors.erase(id);
    for (BlockId p : b.predecessors) {
      for (BlockId s : b.successors) {
        fn.blocks.at(p).successors.insert(s);
        fn.blocks.at(s).predecessors.insert(p);
      }
    }
  }
}

void prune_cfg(CallFlowIR& ir) {
  for (auto& f : ir.functions) prune_cfg(f);
}

void check_symmetry(const CallFunction& fn) {
  for (const auto& [id, b] : fn.blocks) {
    for (BlockId s : b.successors) {
      auto it = fn.blocks.find(s);
      if (it == fn.blocks.end() || !it->second.predecessors.contains(id))
        throw std::logic_error("asymmetric edge " + std::to_string(id) + " -> " + std::to_string(s));
    }
    for (BlockId p : b.predecessors) {
      auto it = fn.blocks.find(p);
      if (it == fn.blocks.end() || !it->second.successors.contains(id))
        throw std::logic_error("asymmetric edge " + std::to_string(p) + " -> " + std::to_string(id));
    }
  }
}

}  // namespace sentinel::pscft
