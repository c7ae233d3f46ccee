#include "stack_sim.hpp"

#include <algorithm>

#include "sentinel/evm/opcodes.hpp"

namespace sentinel::evm::detail {

std::optional<std::uint64_t> AbstractValue::as_u64() const {
  if (kind != Kind::Constant) return std::nullopt;
  std::size_t first = 0;
  while (first < constant.size() && constant[first] == 0) ++first;
  if (constant.size() - first > 8) return std::nullopt;
  std::uint64_t v = 0;
  for (std::size_t i = first; i < constant.size(); ++i) v = (v << 8) | constant[i];
  return v;
}

void StackSim::ensure(std::size_t n) {
  if (stack_.size() < n) stack_.insert(stack_.begin(), n - stack_.size(), AbstractValue{});
}

AbstractValue StackSim::pop() {
  if (stack_.empty()) return AbstractValue{};
  AbstractValue v = std::move(stack_.back());
  stack_.pop_back();
  return v;
}

const AbstractValue& StackSim::peek(std::size_t depth) const {
  if (depth >= stack_.size()) return unknown_;
  return stack_[stack_.size() - 1 - depth];
}

namespace {

bool is_address_mask(const AbstractValue& v) {
  if (!v.is_constant() || v.constant.size() != 20) return false;
  return std::all_of(v.constant.begin(), v.constant.end(), [](std::uint8_t b) { return b == 0xff; });
}

}  // namespace

void StackSim::step(const Instruction& ins) {
  const std::uint8_t code = ins.opcode;
  if (is_push(code) || code == op::PUSH0) {
    AbstractValue v;
    v.kind = AbstractValue::Kind::Constant;
    v.constant = ins.push_operand;
    v.push_opcode = code;
    stack_.push_back(std::move(v));
    return;
  }
  if (code >= op::DUP1 && code <= op::DUP16) {
    const std::size_t n = code - op::DUP1 + 1;
    ensure(n);
    stack_.push_back(stack_[stack_.size() - n]);
    return;
  }
  if (code >= op::SWAP1 && code <= op::SWAP16) {
    const std::size_t n = code - op::SWAP1 + 1;
    ensure(n + 1);
    std::swap(stack_.back(), stack_[stack_.size() - 1 - n]);
    return;
  }
  if (code == op::EQ) {
    AbstractValue a = pop();
    AbstractValue b = pop();
    AbstractValue r;
    auto selector_side = [](const AbstractValue& c, const AbstractValue& other) {
      return c.is_constant() && c.push_opcode == op::PUSH4 && !other.is_constant();
    };
    if (selector_side(a, b) || selector_side(b, a)) {
      const AbstractValue& c = a.is_constant() ? a : b;
      r.kind = AbstractValue::Kind::SelectorMatch;
      r.selector = Selector::from_span(c.constant);
    }
    stack_.push_back(std::move(r));
    return;
  }
  if (code == op::AND) {
    AbstractValue a = pop();
    AbstractValue b = pop();
    // Address masking keeps the constant.
    if (is_address_mask(a) && b.is_constant()) {
      stack_.push_back(std::move(b));
    } else if (is_address_mask(b) && a.is_constant()) {
      stack_.push_back(std::move(a));
    } else {
      stack_.push_back(AbstractValue{});
    }
    return;
  }
  const auto& info = opcode_info(code);
  for (int i = 0; i < info.pops; ++i) pop();
  for (int i = 0; i < info.pushes; ++i) stack_.push_back(AbstractValue{});
}

}  // namespace sentinel::evm::detail
