#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sentinel/evm/contract_ir.hpp"

namespace sentinel::pscft {

using evm::BlockId;
using evm::Visibility;

enum class CallKind { External, Private, Create, SelfDestruct };

inline constexpr const char* kUnknownTarget = "UnknownTarget";
inline constexpr const char* kUnknownFunc = "UnknownFunc";

struct CallStatement {
  CallKind kind = CallKind::External;
  std::uint16_t opcode = 0;
  std::optional<Address> target;
  std::optional<Selector> selector;
  std::optional<std::string> resolved_signature;  ///< keccak-4 equals selector
  std::string target_label = kUnknownTarget;
  std::optional<BlockId> callee;  ///< private callee entry
  std::string callee_name;        ///< set by canonical_rename

  /// External call with no calldata selector constant.
  bool raw() const { return kind == CallKind::External && !selector; }
  /// `Label.func(...args)`, `Label.delegatecall(...args)`,
  /// `InternalFunction_k(...args)`, `CREATE(...args)`, ...
  std::string render() const;

  bool operator==(const CallStatement&) const = default;
};

struct CallBlock {
  BlockId id = 0;
  std::string name;  ///< BB_i_j after canonical_rename
  std::vector<CallStatement> statements;
  std::set<BlockId> predecessors;
  std::set<BlockId> successors;

  bool operator==(const CallBlock&) const = default;
};

struct CallFunction {
  std::optional<Selector> selector;
  Visibility visibility = Visibility::Private;
  std::string name;
  BlockId entry = 0;
  std::map<BlockId, CallBlock> blocks;

  std::size_t call_count() const;
  bool operator==(const CallFunction&) const = default;
};

struct CallFlowIR {
  std::optional<Address> address;
  std::vector<CallFunction> functions;

  bool operator==(const CallFlowIR&) const = default;
};

/// Keeps only call statements (external calls, private calls, CREATE,
/// CREATE2, SELFDESTRUCT); the block graph is unchanged.
CallFlowIR filter_call_statements(const evm::ContractIR& ir);

/// Removes every empty non-entry block, connecting each of its predecessors
/// to each of its successors. Reachability between call statements is
/// preserved exactly; edges are deduplicated, self-loops are kept.
void prune_cfg(CallFunction& fn);
void prune_cfg(CallFlowIR& ir);

/// Throws std::logic_error on an asymmetric or dangling edge.
void check_symmetry(const CallFunction& fn);

}  // namespace sentinel::pscft
