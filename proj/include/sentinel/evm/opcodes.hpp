#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace sentinel::evm {

namespace op {
inline constexpr std::uint8_t STOP = 0x00;
inline constexpr std::uint8_t ADD = 0x01;
inline constexpr std::uint8_t EQ = 0x14;
inline constexpr std::uint8_t ISZERO = 0x15;
inline constexpr std::uint8_t AND = 0x16;
inline constexpr std::uint8_t SHL = 0x1b;
inline constexpr std::uint8_t SHR = 0x1c;
inline constexpr std::uint8_t CALLVALUE = 0x34;
inline constexpr std::uint8_t CALLDATALOAD = 0x35;
inline constexpr std::uint8_t CALLDATASIZE = 0x36;
inline constexpr std::uint8_t CODECOPY = 0x39;
inline constexpr std::uint8_t POP = 0x50;
inline constexpr std::uint8_t MSTORE = 0x52;
inline constexpr std::uint8_t SLOAD = 0x54;
inline constexpr std::uint8_t SSTORE = 0x55;
inline constexpr std::uint8_t JUMP = 0x56;
inline constexpr std::uint8_t JUMPI = 0x57;
inline constexpr std::uint8_t GAS = 0x5a;
inline constexpr std::uint8_t JUMPDEST = 0x5b;
inline constexpr std::uint8_t PUSH0 = 0x5f;
inline constexpr std::uint8_t PUSH1 = 0x60;
inline constexpr std::uint8_t PUSH2 = 0x61;
inline constexpr std::uint8_t PUSH4 = 0x63;
inline constexpr std::uint8_t PUSH20 = 0x73;
inline constexpr std::uint8_t PUSH32 = 0x7f;
inline constexpr std::uint8_t DUP1 = 0x80;
inline constexpr std::uint8_t DUP16 = 0x8f;
inline constexpr std::uint8_t SWAP1 = 0x90;
inline constexpr std::uint8_t SWAP16 = 0x9f;
inline constexpr std::uint8_t CREATE = 0xf0;
inline constexpr std::uint8_t CALL = 0xf1;
inline constexpr std::uint8_t CALLCODE = 0xf2;
inline constexpr std::uint8_t RETURN = 0xf3;
inline constexpr std::uint8_t DELEGATECALL = 0xf4;
inline constexpr std::uint8_t CREATE2 = 0xf5;
inline constexpr std::uint8_t STATICCALL = 0xfa;
inline constexpr std::uint8_t REVERT = 0xfd;
inline constexpr std::uint8_t INVALID = 0xfe;
inline constexpr std::uint8_t SELFDESTRUCT = 0xff;
}  // namespace op

struct OpcodeInfo {
  std::string_view name;  ///< "INVALID" for unassigned bytes
  std::uint8_t immediate_size = 0;
  std::uint8_t pops = 0;
  std::uint8_t pushes = 0;
  bool defined = false;
};

const OpcodeInfo& opcode_info(std::uint8_t opcode) noexcept;

/// Case-insensitive lookup by mnemonic; accepts SHA3 and DIFFICULTY aliases.
std::optional<std::uint8_t> opcode_by_name(std::string_view name) noexcept;

inline constexpr bool is_push(std::uint8_t opcode) noexcept { return opcode >= op::PUSH1 && opcode <= op::PUSH32; }
inline constexpr std::uint8_t push_width(std::uint8_t opcode) noexcept {
  return is_push(opcode) ? static_cast<std::uint8_t>(opcode - op::PUSH1 + 1) : 0;
}

/// Ends a basic block. Unassigned bytes execute as INVALID and also terminate.
bool is_terminator(std::uint8_t opcode) noexcept;

bool is_external_call(std::uint8_t opcode) noexcept;
bool is_create(std::uint8_t opcode) noexcept;

}  // namespace sentinel::evm
