#include "sentinel/evm/contract_ir.hpp"

#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "sentinel/evm/opcodes.hpp"

namespace sentinel::evm {

std::string statement_op_name(std::uint16_t op) {
  if (op == kCallPrivate) return "CALLPRIVATE";
  if (op > 0xff) return "INVALID";
  return std::string(opcode_info(static_cast<std::uint8_t>(op)).name);
}

std::optional<std::uint16_t> statement_op_by_name(std::string_view name) {
  if (name == "CALLPRIVATE") return kCallPrivate;
  if (auto code = opcode_by_name(name)) return *code;
  return std::nullopt;
}

bool is_call_statement(const Statement& s) {
  if (s.callee || s.op == kCallPrivate) return true;
  if (s.op > 0xff) return false;
  const auto code = static_cast<std::uint8_t>(s.op);
  return is_external_call(code) || is_create(code) || code == op::SELFDESTRUCT;
}

std::string_view visibility_name(Visibility v) {
  switch (v) {
    case Visibility::Public:
      return "public";
    case Visibility::Private:
      return "private";
    case Visibility::Fallback:
      return "fallback";
  }
  return "private";
}

std::size_t ContractIR::block_count() const {
  std::size_t n = 0;
  for (const auto& f : functions) n += f.blocks.size();
  return n;
}

const FunctionIR* ContractIR::function_at(BlockId entry) const {
  for (const auto& f : functions)
    if (f.entry == entry) return &f;
  return nullptr;
}

std::uint32_t count_opcode(const ContractIR& ir, std::uint8_t opcode) { return ir.opcode_counts[opcode]; }

void check_ir_invariants(const ContractIR& ir) {
  auto hex = [](std::uint64_t v) {
    std::ostringstream os;
    os << "0x" << std::hex << v;
    return os.str();
  };
  std::unordered_map<BlockId, std::size_t> owner;
  for (std::size_t fi = 0; fi < ir.functions.size(); ++fi) {
    const auto& f = ir.functions[fi];
    if (!f.blocks.contains(f.entry)) throw std::logic_error("function entry " + hex(f.entry) + " not among its blocks");
    if (f.visibility == Visibility::Public && !f.selector) throw std::logic_error("public function without selector");
    if (f.visibility == Visibility::Private && f.selector) throw std::logic_error("private function with selector");
    for (const auto& [id, b] : f.blocks) {
      if (!owner.emplace(id, fi).second) throw std::logic_error("block " + hex(id) + " owned by two functions");
      for (BlockId s : b.successors) {
        auto it = f.blocks.find(s);
        if (it == f.blocks.end()) throw std::logic_error("edge " + hex(id) + " -> " + hex(s) + " leaves its function");
        if (!it->second.predecessors.contains(id))
          throw std::logic_error("edge " + hex(id) + " -> " + hex(s) + " missing predecessor link");
      }
      for (BlockId p : b.predecessors) {
        auto it = f.blocks.find(p);
        if (it == f.blocks.end() || !it->second.successors.contains(id))
          throw std::logic_error("edge " + hex(p) + " -> " + hex(id) + " missing successor link");
      }
    }
  }
}

}  // namespace sentinel::evm
