#include "sentinel/evm/opcodes.hpp"

#include <array>
#include <cctype>
#include <string>

#include "sentinel/common/text.hpp"

namespace sentinel::evm {

namespace {

struct Def {
  std::uint8_t code;
  std::string_view name;
  std::uint8_t pops;
  std::uint8_t pushes;
};

constexpr Def kDefs[] = {
    {0x00, "STOP", 0, 0},          {0x01, "ADD", 2, 1},          {0x02, "MUL", 2, 1},
    {0x03, "SUB", 2, 1},           {0x04, "DIV", 2, 1},          {0x05, "SDIV", 2, 1},
    {0x06, "MOD", 2, 1},           {0x07, "SMOD", 2, 1},         {0x08, "ADDMOD", 3, 1},
    {0x09, "MULMOD", 3, 1},        {0x0a, "EXP", 2, 1},          {0x0b, "SIGNEXTEND", 2, 1},
    {0x10, "LT", 2, 1},            {0x11, "GT", 2, 1},           {0x12, "SLT", 2, 1},
    {0x13, "SGT", 2, 1},           {0x14, "EQ", 2, 1},           {0x15, "ISZERO", 1, 1},
    {0x16, "AND", 2, 1},           {0x17, "OR", 2, 1},           {0x18, "XOR", 2, 1},
    {0x19, "NOT", 1, 1},           {0x1a, "BYTE", 2, 1},         {0x1b, "SHL", 2, 1},
    {0x1c, "SHR", 2, 1},           {0x1d, "SAR", 2, 1},          {0x20, "KECCAK256", 2, 1},
    {0x30, "ADDRESS", 0, 1},       {0x31, "BALANCE", 1, 1},      {0x32, "ORIGIN", 0, 1},
    {0x33, "CALLER", 0, 1},        {0x34, "CALLVALUE", 0, 1},    {0x35, "CALLDATALOAD", 1, 1},
    {0x36, "CALLDATASIZE", 0, 1},  {0x37, "CALLDATACOPY", 3, 0}, {0x38, "CODESIZE", 0, 1},
    {0x39, "CODECOPY", 3, 0},      {0x3a, "GASPRICE", 0, 1},     {0x3b, "EXTCODESIZE", 1, 1},
    {0x3c, "EXTCODECOPY", 4, 0},   {0x3d, "RETURNDATASIZE", 0, 1}, {0x3e, "RETURNDATACOPY", 3, 0},
    {0x3f, "EXTCODEHASH", 1, 1},   {0x40, "BLOCKHASH", 1, 1},    {0x41, "COINBASE", 0, 1},
    {0x42, "TIMESTAMP", 0, 1},     {0x43, "NUMBER", 0, 1},       {0x44, "PREVRANDAO", 0, 1},
    {0x45, "GASLIMIT", 0, 1},      {0x46, "CHAINID", 0, 1},      {0x47, "SELFBALANCE", 0, 1},
    {0x48, "BASEFEE", 0, 1},       {0x49, "BLOBHASH", 1, 1},     {0x4a, "BLOBBASEFEE", 0, 1},
    {0x50, "POP", 1, 0},           {0x51, "MLOAD", 1, 1},        {0x52, "MSTORE", 2, 0},
    {0x53, "MSTORE8", 2, 0},       {0x54, "SLOAD", 1, 1},        {0x55, "SSTORE", 2, 0},
    {0x56, "JUMP", 1, 0},          {0x57, "JUMPI", 2, 0},        {0x58, "PC", 0, 1},
    {0x59, "MSIZE", 0, 1},         {0x5a, "GAS", 0, 1},          {0x5b, "JUMPDEST", 0, 0},
    {0x5c, "TLOAD", 1, 1},         {0x5d, "TSTORE", 2, 0},       {0x5e, "MCOPY", 3, 0},
    {0x5f, "PUSH0", 0, 1},         {0xa0, "LOG0", 2, 0},         {0xa1, "LOG1", 3, 0},
    {0xa2, "LOG2", 4, 0},          {0xa3, "LOG3", 5, 0},         {0xa4, "LOG4", 6, 0},
    {0xf0, "CREATE", 3, 1},        {0xf1, "CALL", 7, 1},         {0xf2, "CALLCODE", 7, 1},
    {0xf3, "RETURN", 2, 0},        {0xf4, "DELEGATECALL", 6, 1}, {0xf5, "CREATE2", 4, 1},
    {0xfa, "STATICCALL", 6, 1},    {0xfd, "REVERT", 2, 0},       {0xfe, "INVALID", 0, 0},
    {0xff, "SELFDESTRUCT", 1, 0},
};

// Storage for the generated PUSHn/DUPn/SWAPn mnemonics.
struct Names {
  std::array<std::string, 32> push;
  std::array<std::string, 16> dup;
  std::array<std::string, 16> swap;
  Names() {
    for (int i = 0; i < 32; ++i) push[i] = "PUSH" + std::to_string(i + 1);
    for (int i = 0; i < 16; ++i) {
      dup[i] = "DUP" + std::to_string(i + 1);
      swap[i] = "SWAP" + std::to_string(i + 1);
    }
  }
};

const Names& names() {
  static const Names n;
  return n;
}

std::array<OpcodeInfo, 256> build_table() {
  std::array<OpcodeInfo, 256> t{};
  for (auto& info : t) info = OpcodeInfo{"INVALID", 0, 0, 0, false};
  for (const auto& d : kDefs) t[d.code] = OpcodeInfo{d.name, 0, d.pops, d.pushes, true};
  for (int i = 0; i < 32; ++i)
    t[0x60 + i] = OpcodeInfo{names().push[i], static_cast<std::uint8_t>(i + 1), 0, 1, true};
  for (int i = 0; i < 16; ++i) {
    t[0x80 + i] = OpcodeInfo{names().dup[i], 0, static_cast<std::uint8_t>(i + 1), static_cast<std::uint8_t>(i + 2), true};
    t[0x90 + i] = OpcodeInfo{names().swap[i], 0, static_cast<std::uint8_t>(i + 2), static_cast<std::uint8_t>(i + 2), true};
  }
  return t;
}

const std::array<OpcodeInfo, 256>& table() {
  static const auto t = build_table();
  return t;
}

}  // namespace

const OpcodeInfo& opcode_info(std::uint8_t opcode) noexcept { return table()[opcode]; }

std::optional<std::uint8_t> opcode_by_name(std::string_view name) noexcept {
  std::string upper(name);
  for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "SHA3") return std::uint8_t{0x20};
  if (upper == "DIFFICULTY") return std::uint8_t{0x44};
  if (upper == "SUICIDE") return op::SELFDESTRUCT;
  for (int i = 0; i < 256; ++i) {
    const auto& info = table()[i];
    if (info.defined && info.name == upper) return static_cast<std::uint8_t>(i);
  }
  return std::nullopt;
}

bool is_terminator(std::uint8_t opcode) noexcept {
  switch (opcode) {
    case op::STOP:
    case op::JUMP:
    case op::JUMPI:
    case op::RETURN:
    case op::REVERT:
    case op::INVALID:
    case op::SELFDESTRUCT:
      return true;
    default:
      return !opcode_info(opcode).defined;
  }
}

bool is_external_call(std::uint8_t opcode) noexcept {
  return opcode == op::CALL || opcode == op::CALLCODE || opcode == op::DELEGATECALL || opcode == op::STATICCALL;
}

bool is_create(std::uint8_t opcode) noexcept { return opcode == op::CREATE || opcode == op::CREATE2; }

}  // namespace sentinel::evm
