#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sentinel/evm/disassembler.hpp"

namespace sentinel::evm {

/// Blocks are identified by the byte offset of their first instruction.
using BlockId = std::uint64_t;

struct BasicBlock {
  BlockId id = 0;
  std::vector<Instruction> statements;
  std::set<BlockId> predecessors;
  std::set<BlockId> successors;

  /// Constant target of the terminating JUMP/JUMPI, when resolved.
  std::optional<BlockId> jump_target;
  /// For a JUMP that looks like an internal call (a JUMPDEST constant left on
  /// the stack below the target), the continuation the callee returns to.
  std::optional<BlockId> return_site;
  bool unresolved_jump = false;

  std::uint32_t end_offset() const { return statements.empty() ? static_cast<std::uint32_t>(id) : statements.back().next_offset(); }
  bool starts_with_jumpdest() const;
};

struct Cfg {
  std::map<BlockId, BasicBlock> blocks;
  std::vector<std::string> diagnostics;

  std::size_t unresolved_jump_count() const;
  /// Throws std::logic_error naming the first asymmetric edge.
  void check_symmetry() const;
};

/// Splits at every JUMPDEST and after every terminator. Concatenating the
/// blocks in id order reproduces `instrs`.
std::vector<BasicBlock> identify_basic_blocks(std::span<const Instruction> instrs);

/// Adds fallthrough edges, JUMPI false edges, constant-target jump edges and
/// call-return continuation edges. Jump targets come only from PUSH constants
/// produced inside the same block and moved solely by DUP/SWAP. Unresolved
/// jumps and jumps to non-JUMPDEST offsets add no edge and leave a diagnostic.
Cfg resolve_jumps(std::vector<BasicBlock> blocks);

}  // namespace sentinel::evm
