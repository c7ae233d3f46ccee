#include "sentinel/evm/cfg.hpp"

#include <sstream>
#include <stdexcept>

#include "sentinel/evm/opcodes.hpp"
#include "stack_sim.hpp"

namespace sentinel::evm {

namespace {

std::string hex_id(std::uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

}  // namespace

bool BasicBlock::starts_with_jumpdest() const {
  return !statements.empty() && statements.front().opcode == op::JUMPDEST;
}

std::size_t Cfg::unresolved_jump_count() const {
  std::size_t n = 0;
  for (const auto& [id, b] : blocks) n += b.unresolved_jump ? 1 : 0;
  return n;
}

void Cfg::check_symmetry() const {
  for (const auto& [id, b] : blocks) {
    for (BlockId s : b.successors) {
      auto it = blocks.find(s);
      if (it == blocks.end() || !it->second.predecessors.contains(id))
        throw std::logic_error("edge " + hex_id(id) + " -> " + hex_id(s) + " has no matching predecessor");
    }
    for (BlockId p : b.predecessors) {
      auto it = blocks.find(p);
      if (it == blocks.end() || !it->second.successors.contains(id))
        throw std::logic_error("edge " + hex_id(p) + " -> " + hex_id(id) + " has no matching successor");
    }
  }
}

std::vector<BasicBlock> identify_basic_blocks(std::span<const Instruction> instrs) {
  std::vector<BasicBlock> blocks;
  bool open = false;
  for (const auto& ins : instrs) {
    if (!open || (ins.opcode == op::JUMPDEST && !blocks.back().statements.empty())) {
      BasicBlock b;
      b.id = ins.offset;
      blocks.push_back(std::move(b));
      open = true;
    }
    blocks.back().statements.push_back(ins);
    if (is_terminator(ins.opcode)) open = false;
  }
  return blocks;
}

Cfg resolve_jumps(std::vector<BasicBlock> blocks) {
  Cfg cfg;
  for (auto& b : blocks) {
    BlockId id = b.id;
    cfg.blocks.emplace(id, std::move(b));
  }

  auto add_edge = [&](BlockId from, BlockId to) {
    cfg.blocks.at(from).successors.insert(to);
    cfg.blocks.at(to).predecessors.insert(from);
  };
  auto is_jumpdest = [&](std::uint64_t target) {
    auto it = cfg.blocks.find(target);
    return it != cfg.blocks.end() && it->second.starts_with_jumpdest();
  };

  for (auto& [id, block] : cfg.blocks) {
    if (block.statements.empty()) continue;
    detail::StackSim sim;
    for (std::size_t i = 0; i + 1 < block.statements.size(); ++i) sim.step(block.statements[i]);
    const Instruction& last = block.statements.back();
    const BlockId next = last.next_offset();
    const bool has_next = cfg.blocks.contains(next);

    if (last.opcode == op::JUMP || last.opcode == op::JUMPI) {
      const auto target = sim.peek(0).as_u64();
      if (!target) {
        block.unresolved_jump = true;
        cfg.diagnostics.push_back("unresolved jump at " + hex_id(last.offset));
      } else if (!is_jumpdest(*target)) {
        cfg.diagnostics.push_back("jump at " + hex_id(last.offset) + " targets non-JUMPDEST " + hex_id(*target));
      } else {
        block.jump_target = *target;
        add_edge(id, *target);
        if (last.opcode == op::JUMP) {
          // A JUMPDEST constant left below the target is the return address
          // of an internal call.
          for (std::size_t d = 1; d < sim.depth(); ++d) {
            const auto ret = sim.peek(d).as_u64();
            if (ret && *ret != *target && is_jumpdest(*ret)) {
              block.return_site = *ret;
              add_edge(id, *ret);
              break;
            }
          }
        }
      }
      if (last.opcode == op::JUMPI && has_next) add_edge(id, next);
    } else if (!is_terminator(last.opcode) && has_next) {
      add_edge(id, next);
    }
  }
  return cfg;
}

}  // namespace sentinel::evm
