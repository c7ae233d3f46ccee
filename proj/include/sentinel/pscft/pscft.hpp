#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sentinel/pscft/call_flow.hpp"
#include "sentinel/pscft/semantics.hpp"

namespace sentinel::pscft {

/// Orders functions (resolved public by name, unresolved public by
/// selector hex, fallback, then private by name with entry-offset
/// tiebreak), names private functions InternalFunction_i and blocks BB_i_j
/// in DFS preorder with children in ascending original id. Idempotent.
void canonical_rename(CallFlowIR& ir);

struct PSCFTDocument {
  std::string contract_id;
  std::string text;
  std::vector<std::string> tokens;
};

/// Splits PSCFT text into names ([A-Za-z0-9_$]+) and the punctuation
/// tokens `.`, `(`, `)`, `->`, `:`, `;`, `,`.
std::vector<std::string> tokenize(std::string_view text);

/// Renders a renamed IR:
///   function <name>
///   BB_i_j: <stmt>; <stmt>
///   BB_i_j -> BB_i_k
/// Functions without call statements render as the header alone. LF line
/// endings, trailing LF.
PSCFTDocument serialize_pscft(const CallFlowIR& ir);

/// filter -> prune -> recover_semantics -> canonical_rename -> serialize.
PSCFTDocument build_pscft(const evm::ContractIR& ir, SignatureResolver* signatures, LabelProvider* labels);

/// Text-level view of a PSCFT document, used to read documents back.
struct PscftGraph {
  struct Block {
    std::string name;
    std::vector<std::string> statements;
    bool operator==(const Block&) const = default;
  };
  struct Function {
    std::string name;
    std::vector<Block> blocks;
    std::vector<std::pair<std::string, std::string>> flows;
    bool operator==(const Function&) const = default;
  };
  std::vector<Function> functions;
  bool operator==(const PscftGraph&) const = default;
};

PscftGraph to_graph(const CallFlowIR& ir);
/// Throws std::invalid_argument on malformed lines.
PscftGraph read_pscft(std::string_view text);
std::string write_pscft(const PscftGraph& graph);

enum class StandardKind { TokenERC20, TokenERC721, ProxyERC1967, Other };

std::string_view standard_kind_name(StandardKind k);

/// ERC-721 is checked before ERC-20 (they share selectors). Proxy when the
/// ERC-1967 implementation slot is pushed anywhere, or when there are no
/// public functions and the code delegates.
StandardKind detect_standard_contract(const evm::ContractIR& ir);

}  // namespace sentinel::pscft
