#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sentinel/common/bytes.hpp"
#include "sentinel/evm/cfg.hpp"

namespace sentinel::evm {

/// Pseudo-opcode for a private-function call coming from external IR.
inline constexpr std::uint16_t kCallPrivate = 0x100;

struct Statement {
  std::uint64_t id = 0;  ///< byte offset for lifted code
  std::uint16_t op = 0;  ///< EVM opcode byte, or kCallPrivate
  Bytes operand;         ///< PUSH data

  // Call-site annotations.
  std::optional<Address> target;     ///< constant call target
  std::optional<Selector> selector;  ///< constant calldata selector
  std::optional<BlockId> callee;     ///< private function entry

  bool operator==(const Statement&) const = default;
};

std::string statement_op_name(std::uint16_t op);
std::optional<std::uint16_t> statement_op_by_name(std::string_view name);

/// External calls, private calls, CREATE/CREATE2 and SELFDESTRUCT.
bool is_call_statement(const Statement& s);

struct Block {
  BlockId id = 0;
  std::vector<Statement> statements;
  std::set<BlockId> predecessors;
  std::set<BlockId> successors;

  bool operator==(const Block&) const = default;
};

enum class Visibility { Public, Private, Fallback };

std::string_view visibility_name(Visibility v);

struct FunctionIR {
  std::optional<Selector> selector;  ///< public functions only
  Visibility visibility = Visibility::Private;
  std::string name;  ///< empty until recovered
  BlockId entry = 0;
  std::map<BlockId, Block> blocks;

  bool operator==(const FunctionIR&) const = default;
};

struct ContractIR {
  std::optional<Address> address;
  Bytes runtime_bytecode;
  std::vector<FunctionIR> functions;  ///< ordered by entry offset
  std::array<std::uint32_t, 256> opcode_counts{};
  std::vector<std::string> diagnostics;

  std::size_t block_count() const;
  const FunctionIR* function_at(BlockId entry) const;
};

/// Static occurrence count of `opcode` in the runtime code (PUSH operand
/// bytes excluded).
std::uint32_t count_opcode(const ContractIR& ir, std::uint8_t opcode);

/// Throws std::logic_error when a function graph has an asymmetric edge, an
/// edge leaving the function, or a block owned by two functions.
void check_ir_invariants(const ContractIR& ir);

}  // namespace sentinel::evm
