#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sentinel/common/bytes.hpp"

namespace sentinel::evm {

struct Instruction {
  std::uint32_t offset = 0;
  std::uint8_t opcode = 0;
  /// Present (1-32 bytes) iff opcode is PUSH1..PUSH32.
  Bytes push_operand;

  std::uint32_t size() const noexcept { return 1 + static_cast<std::uint32_t>(push_operand.size()); }
  std::uint32_t next_offset() const noexcept { return offset + size(); }
  std::string_view name() const noexcept;
  /// Operand as an integer when it fits in 64 bits.
  std::optional<std::uint64_t> operand_u64() const;

  bool operator==(const Instruction&) const = default;
};

/// Linear sweep. Bytes inside PUSH operands are never decoded; a truncated
/// trailing operand is zero-padded to the declared width.
std::vector<Instruction> disassemble(std::span<const std::uint8_t> bytecode);

/// Inverse of disassemble for well-formed instruction lists (offsets ignored).
Bytes assemble(std::span<const Instruction> instructions);

/// Mnemonic assembler used for fixtures and the CLI.
///
/// Grammar (whitespace separated, `;` or `//` start a comment):
///   label:            binds `label` to the current offset (emits nothing)
///   PUSHn 0x..        push with explicit width
///   PUSHn @label      push a label's offset at width n
///   PUSH 0x.. | @lbl  push with the minimal width (labels default to 2 bytes)
///   MNEMONIC          any other opcode
///   .byte 0x..        raw bytes
/// Throws std::invalid_argument on unknown mnemonics or labels.
Bytes assemble_text(std::string_view source);

/// One instruction per line: "<offset hex>: <MNEMONIC> [operand]".
std::string format_listing(std::span<const Instruction> instructions);

}  // namespace sentinel::evm
