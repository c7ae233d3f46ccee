#include "contract_builder.hpp"

#include <sstream>

#include "sentinel/common/keccak.hpp"
#include "sentinel/evm/disassembler.hpp"
#include "sentinel/evm/opcodes.hpp"

namespace sentinel::testing {

namespace {

void emit_call(std::ostream& os, const CallSpec& c, const std::string& ret_label) {
  if (c.kind == CallKind::Private) {
    os << "PUSH2 @" << ret_label << "\nPUSH2 @priv_" << c.private_index << "\nJUMP\n" << ret_label << ":\nJUMPDEST\n";
    return;
  }
  if (c.kind == CallKind::SelfDestruct) {
    if (c.target)
      os << "PUSH20 " << c.target->hex() << "\n";
    else
      os << "CALLER\n";
    os << "SELFDESTRUCT\n";
    return;
  }
  if (c.kind == CallKind::Create || c.kind == CallKind::Create2) {
    if (c.kind == CallKind::Create2) os << "PUSH1 0x01\n";
    os << "PUSH1 0x20\nPUSH1 0x00\nPUSH1 0x00\n" << (c.kind == CallKind::Create ? "CREATE" : "CREATE2") << "\nPOP\n";
    return;
  }
  if (c.selector) os << "PUSH4 " << c.selector->hex() << "\nPUSH1 0xe0\nSHL\nPUSH1 0x00\nMSTORE\n";
  os << "PUSH1 0x20\nPUSH1 0x00\nPUSH1 0x44\nPUSH1 0x00\n";
  if (c.kind == CallKind::Call || c.kind == CallKind::CallCode) os << "PUSH1 0x00\n";
  if (c.target) {
    os << "PUSH20 " << c.target->hex() << "\n";
    if (c.mask_target) os << "PUSH20 0xffffffffffffffffffffffffffffffffffffffff\nAND\n";
  } else {
    os << "PUSH1 0x04\nCALLDATALOAD\n";
  }
  os << "GAS\n";
  switch (c.kind) {
    case CallKind::Call: os << "CALL\n"; break;
    case CallKind::StaticCall: os << "STATICCALL\n"; break;
    case CallKind::DelegateCall: os << "DELEGATECALL\n"; break;
    case CallKind::CallCode: os << "CALLCODE\n"; break;
    default: break;
  }
  os << "POP\n";
}

void emit_padding(std::ostream& os, std::size_t groups, std::size_t salt) {
  for (std::size_t g = 0; g < groups; ++g) {
    os << "PUSH1 0x" << std::hex << ((g + salt) & 0x7f) << std::dec << "\nSLOAD\nPUSH2 0x1234\nADD\n"
       << "PUSH1 0x" << std::hex << ((g * 3 + salt) & 0x7f) << std::dec << "\nSSTORE\n";
  }
}

}  // namespace

Address fixed_address(std::uint8_t tag) {
  Address a;
  for (std::size_t i = 0; i < a.bytes.size(); ++i) a.bytes[i] = static_cast<std::uint8_t>(tag + 0x11 * i);
  return a;
}

std::string contract_asm(const ContractSpec& spec) {
  std::ostringstream os;
  std::size_t label_counter = 0;
  auto fresh = [&](const std::string& base) { return base + "_" + std::to_string(label_counter++); };

  os << "PUSH1 0x80\nPUSH1 0x40\nMSTORE\n";
  if (!spec.publics.empty()) {
    os << "PUSH1 0x04\nCALLDATASIZE\nLT\nPUSH2 @fallback\nJUMPI\n";
    os << "PUSH1 0x00\nCALLDATALOAD\nPUSH1 0xe0\nSHR\n";
    for (std::size_t i = 0; i < spec.publics.size(); ++i) {
      os << "DUP1\nPUSH4 " << spec.publics[i].selector.hex() << "\nEQ\nPUSH2 @fn_" << i << "\nJUMPI\n";
    }
  }
  os << "fallback:\nJUMPDEST\n";
  if (spec.erc1967_slot)
    os << "PUSH32 0x360894a13ba1a3210667c828492db98dca3e2076cc3735a920a3ca505d382bbc\nSLOAD\nPOP\n";
  if (spec.hide_opcodes_in_push) os << "PUSH2 0xf4ff\nPOP\nPUSH32 0xf4f4f4f4ffffffff00000000000000000000000000000000000000000000f4ff\nPOP\n";
  for (const auto& c : spec.fallback_calls) emit_call(os, c, fresh("ret"));
  os << "STOP\n";

  for (std::size_t i = 0; i < spec.publics.size(); ++i) {
    const auto& f = spec.publics[i];
    os << "fn_" << i << ":\nJUMPDEST\n";
    emit_padding(os, f.padding, i);
    if (f.branch) {
      const auto skip = fresh("skip");
      os << "CALLVALUE\nPUSH2 @" << skip << "\nJUMPI\n";
      for (const auto& c : f.calls) emit_call(os, c, fresh("ret"));
      os << skip << ":\nJUMPDEST\nSTOP\n";
    } else {
      for (const auto& c : f.calls) emit_call(os, c, fresh("ret"));
      os << "STOP\n";
    }
  }
  for (std::size_t p = 0; p < spec.privates.size(); ++p) {
    os << "priv_" << p << ":\nJUMPDEST\n";
    for (const auto& c : spec.privates[p]) emit_call(os, c, fresh("ret"));
    os << "JUMP\n";
  }
  return os.str();
}

Bytes build_runtime(const ContractSpec& spec) { return evm::assemble_text(contract_asm(spec)); }

Bytes wrap_in_constructor(const Bytes& runtime) {
  // PUSH2 len DUP1 PUSH2 off PUSH1 0 CODECOPY PUSH1 0 RETURN INVALID
  const std::size_t header = 3 + 1 + 3 + 2 + 1 + 2 + 1 + 1;
  Bytes out{0x61, static_cast<std::uint8_t>(runtime.size() >> 8), static_cast<std::uint8_t>(runtime.size()), 0x80,
            0x61, 0,  static_cast<std::uint8_t>(header), 0x60, 0x00, 0x39, 0x60, 0x00, 0xf3, 0xfe};
  out.insert(out.end(), runtime.begin(), runtime.end());
  return out;
}

std::string random_program_asm(Rng& rng, std::size_t instructions) {
  static const char* plain[] = {"ADD",    "MUL",    "SUB",     "DIV",   "LT",    "GT",     "EQ",     "ISZERO",
                                "AND",    "OR",     "XOR",     "NOT",   "SHL",   "SHR",    "POP",    "MLOAD",
                                "MSTORE", "SLOAD",  "SSTORE",  "CALLER", "CALLVALUE", "CALLDATALOAD", "GAS", "DUP1",
                                "DUP2",   "SWAP1",  "SWAP2",   "ADDRESS", "BALANCE", "CALL",  "STATICCALL", "DELEGATECALL",
                                "KECCAK256", "TIMESTAMP", "NUMBER", "PUSH0"};
  static const char* terminators[] = {"STOP", "RETURN", "REVERT", "INVALID", "SELFDESTRUCT"};
  const std::size_t label_count = 1 + instructions / 12;
  std::ostringstream os;
  std::size_t placed = 0;
  for (std::size_t i = 0; i < instructions; ++i) {
    const double r = rng.uniform();
    if (placed < label_count && r < 0.08) {
      os << "L" << placed++ << ":\nJUMPDEST\n";
    } else if (r < 0.16) {
      const std::size_t width = 1 + rng.index(32);
      os << "PUSH" << width << " 0x";
      for (std::size_t b = 0; b < width; ++b) {
        static const char* hex = "0123456789abcdef";
        const auto byte = rng.index(256);
        os << hex[byte >> 4] << hex[byte & 15];
      }
      os << "\n";
    } else if (r < 0.24) {
      os << "PUSH2 @L" << rng.index(label_count) << "\n" << (rng.bernoulli(0.5) ? "JUMP" : "JUMPI") << "\n";
    } else if (r < 0.27) {
      os << "PUSH1 0x03\nADD\nJUMP\n";
    } else if (r < 0.30) {
      os << terminators[rng.index(std::size(terminators))] << "\n";
    } else {
      os << plain[rng.index(std::size(plain))] << "\n";
    }
  }
  while (placed < label_count) os << "L" << placed++ << ":\nJUMPDEST\n";
  os << "STOP\n";
  return os.str();
}

Bytes mid_size_runtime(std::size_t target_bytes, std::uint64_t seed) {
  Rng rng(seed);
  static const char* token_sigs[] = {"transfer(address,uint256)", "transferFrom(address,address,uint256)",
                                     "approve(address,uint256)", "balanceOf(address)",
                                     "swap(uint256,uint256,address,bytes)"};
  ContractSpec spec;
  spec.privates.push_back({CallSpec{CallKind::Call, fixed_address(0x20), selector_of(token_sigs[0])}});
  spec.privates.push_back({CallSpec{CallKind::StaticCall, fixed_address(0x30), selector_of(token_sigs[3])}});
  std::size_t index = 0;
  while (build_runtime(spec).size() < target_bytes) {
    FunctionSpec f;
    f.selector = selector_of("fn" + std::to_string(index++) + "(uint256)");
    f.padding = 4 + rng.index(8);
    f.branch = rng.bernoulli(0.3);
    const std::size_t calls = 1 + rng.index(3);
    for (std::size_t c = 0; c < calls; ++c) {
      CallSpec cs;
      const double r = rng.uniform();
      if (r < 0.3) {
        cs.kind = CallKind::Private;
        cs.private_index = rng.index(spec.privates.size());
      } else {
        cs.kind = r < 0.9 ? CallKind::Call : CallKind::StaticCall;
        cs.target = fixed_address(static_cast<std::uint8_t>(rng.index(200)));
        cs.selector = selector_of(token_sigs[rng.index(std::size(token_sigs))]);
        cs.mask_target = rng.bernoulli(0.5);
      }
      f.calls.push_back(cs);
    }
    spec.publics.push_back(std::move(f));
  }
  return build_runtime(spec);
}

}  // namespace sentinel::testing
