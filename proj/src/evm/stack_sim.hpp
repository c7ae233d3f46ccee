#pragma once

#include <optional>
#include <vector>

#include "sentinel/common/bytes.hpp"
#include "sentinel/evm/disassembler.hpp"

namespace sentinel::evm::detail {

/// Value tracked by the block-local abstract stack.
struct AbstractValue {
  enum class Kind { Unknown, Constant, SelectorMatch };
  Kind kind = Kind::Unknown;
  /// Constant: the PUSH operand, width preserved (empty for PUSH0).
  Bytes constant;
  std::uint8_t push_opcode = 0;
  /// SelectorMatch: result of EQ between a PUSH4 constant and calldata.
  Selector selector;

  bool is_constant() const { return kind == Kind::Constant; }
  std::optional<std::uint64_t> as_u64() const;
};

/// Tracks PUSH constants through DUP/SWAP within one block. Values that were
/// on the stack at block entry, or computed by any other instruction, are
/// Unknown.
class StackSim {
 public:
  void step(const Instruction& ins);
  /// depth 0 is the top of the stack.
  const AbstractValue& peek(std::size_t depth) const;
  std::size_t depth() const { return stack_.size(); }

 private:
  void ensure(std::size_t n);
  AbstractValue pop();

  std::vector<AbstractValue> stack_;
  AbstractValue unknown_;
};

}  // namespace sentinel::evm::detail
