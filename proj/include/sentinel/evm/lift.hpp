#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sentinel/evm/cfg.hpp"
#include "sentinel/evm/contract_ir.hpp"

namespace sentinel::evm {

/// Partitions the resolved CFG into functions.
///
/// Public functions come from the selector dispatcher (PUSH4 sel; EQ;
/// PUSH target; JUMPI) found in the blocks reachable from the entry through
/// dispatcher-only code. The entry block roots the fallback function, which
/// also owns the dispatcher itself. Blocks that are targets of call-like
/// jumps and are reachable from more than one function become private
/// functions; the JUMP into them is annotated with the callee. Every other
/// reachable block is owned by the lowest-offset function that reaches it.
/// A contract without a dispatcher yields a single fallback function.
std::vector<FunctionIR> discover_functions(const Cfg& cfg, std::vector<std::string>* diagnostics = nullptr);

/// disassemble -> identify_basic_blocks -> resolve_jumps -> discover_functions,
/// plus opcode counts and call-site annotation.
ContractIR lift(std::span<const std::uint8_t> runtime_bytecode, std::optional<Address> address = std::nullopt);

struct RuntimeSplit {
  Bytes runtime;
  bool split = false;  ///< false: the whole input was taken as runtime code
  std::string diagnostic;
};

/// Finds the constructor's CODECOPY + RETURN of the runtime image and slices
/// it out of the creation input.
RuntimeSplit extract_runtime_code(std::span<const std::uint8_t> creation_input);

}  // namespace sentinel::evm
