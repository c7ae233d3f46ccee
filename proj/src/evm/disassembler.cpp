#include "sentinel/evm/disassembler.hpp"

#include <map>
#include <sstream>
#include <stdexcept>

#include "sentinel/common/text.hpp"
#include "sentinel/evm/opcodes.hpp"

namespace sentinel::evm {

std::string_view Instruction::name() const noexcept { return opcode_info(opcode).name; }

std::optional<std::uint64_t> Instruction::operand_u64() const {
  if (opcode == op::PUSH0) return 0;
  if (push_operand.empty()) return std::nullopt;
  std::size_t first = 0;
  while (first < push_operand.size() && push_operand[first] == 0) ++first;
  if (push_operand.size() - first > 8) return std::nullopt;
  std::uint64_t v = 0;
  for (std::size_t i = first; i < push_operand.size(); ++i) v = (v << 8) | push_operand[i];
  return v;
}

std::vector<Instruction> disassemble(std::span<const std::uint8_t> bytecode) {
  std::vector<Instruction> out;
  out.reserve(bytecode.size() / 2 + 1);
  std::size_t pc = 0;
  while (pc < bytecode.size()) {
    Instruction ins;
    ins.offset = static_cast<std::uint32_t>(pc);
    ins.opcode = bytecode[pc];
    const std::size_t width = push_width(ins.opcode);
    if (width > 0) {
      ins.push_operand.assign(width, 0);
      const std::size_t avail = std::min(width, bytecode.size() - pc - 1);
      std::copy_n(bytecode.begin() + static_cast<std::ptrdiff_t>(pc + 1), avail, ins.push_operand.begin());
    }
    pc += 1 + width;
    out.push_back(std::move(ins));
  }
  return out;
}

Bytes assemble(std::span<const Instruction> instructions) {
  Bytes out;
  for (const auto& ins : instructions) {
    out.push_back(ins.opcode);
    const std::size_t width = push_width(ins.opcode);
    if (ins.push_operand.size() != width)
      throw std::invalid_argument("operand width mismatch for " + std::string(ins.name()));
    out.insert(out.end(), ins.push_operand.begin(), ins.push_operand.end());
  }
  return out;
}

namespace {

struct PendingLabel {
  std::size_t position;
  std::size_t width;
  std::string label;
};

std::vector<std::string> tokenize_asm(std::string_view source) {
  std::vector<std::string> tokens;
  for (auto line : split(source, '\n')) {
    auto cut = line.find(';');
    if (cut != std::string_view::npos) line = line.substr(0, cut);
    cut = line.find("//");
    if (cut != std::string_view::npos) line = line.substr(0, cut);
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      if (j > i) tokens.emplace_back(line.substr(i, j - i));
      i = j;
    }
  }
  return tokens;
}

}  // namespace

Bytes assemble_text(std::string_view source) {
  const auto tokens = tokenize_asm(source);
  Bytes out;
  std::map<std::string, std::size_t> labels;
  std::vector<PendingLabel> pending;

  auto emit_push = [&](std::size_t width, const std::string& operand) {
    if (operand.empty()) throw std::invalid_argument("PUSH without operand");
    if (operand.front() == '@') {
      if (width == 0) width = 2;
      out.push_back(static_cast<std::uint8_t>(op::PUSH1 + width - 1));
      pending.push_back({out.size(), width, operand.substr(1)});
      out.insert(out.end(), width, 0);
      return;
    }
    Bytes value = from_hex(operand);
    while (value.size() > 1 && value.front() == 0 && width == 0) value.erase(value.begin());
    if (width == 0) width = std::max<std::size_t>(1, value.size());
    if (value.size() > width) throw std::invalid_argument("operand " + operand + " wider than PUSH" + std::to_string(width));
    out.push_back(static_cast<std::uint8_t>(op::PUSH1 + width - 1));
    out.insert(out.end(), width - value.size(), 0);
    out.insert(out.end(), value.begin(), value.end());
  };

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& tok = tokens[i];
    if (tok.back() == ':') {
      const std::string name = tok.substr(0, tok.size() - 1);
      if (!labels.emplace(name, out.size()).second) throw std::invalid_argument("duplicate label " + name);
      continue;
    }
    if (tok == ".byte" || tok == ".bytes") {
      if (i + 1 >= tokens.size()) throw std::invalid_argument(".byte without operand");
      const Bytes raw = from_hex(tokens[++i]);
      out.insert(out.end(), raw.begin(), raw.end());
      continue;
    }
    const std::string upper = [&] {
      std::string u = tok;
      for (auto& c : u) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      return u;
    }();
    if (upper == "PUSH") {
      if (i + 1 >= tokens.size()) throw std::invalid_argument("PUSH without operand");
      emit_push(0, tokens[++i]);
      continue;
    }
    const auto code = opcode_by_name(upper);
    if (!code) throw std::invalid_argument("unknown mnemonic " + tok);
    if (is_push(*code)) {
      if (i + 1 >= tokens.size()) throw std::invalid_argument(tok + " without operand");
      emit_push(push_width(*code), tokens[++i]);
      continue;
    }
    out.push_back(*code);
  }

  for (const auto& p : pending) {
    auto it = labels.find(p.label);
    if (it == labels.end()) throw std::invalid_argument("undefined label " + p.label);
    std::size_t v = it->second;
    for (std::size_t k = 0; k < p.width; ++k) {
      out[p.position + p.width - 1 - k] = static_cast<std::uint8_t>(v & 0xff);
      v >>= 8;
    }
    if (v != 0) throw std::invalid_argument("label " + p.label + " does not fit its PUSH width");
  }
  return out;
}

std::string format_listing(std::span<const Instruction> instructions) {
  std::ostringstream os;
  for (const auto& ins : instructions) {
    os << std::hex << "0x" << ins.offset << std::dec << ": " << ins.name();
    if (!ins.push_operand.empty()) os << ' ' << to_hex(ins.push_operand);
    os << '\n';
  }
  return os.str();
}

}  // namespace sentinel::evm
