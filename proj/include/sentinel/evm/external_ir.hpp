#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "sentinel/evm/contract_ir.hpp"

namespace sentinel::evm {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Reads the line-oriented external IR (see docs/formats.md):
///
///   contract 0x<address>                          (optional)
///   function <name|-> public selector=0x<8 hex>
///   function <name|-> private
///   function <name|-> fallback
///   block 0x<id> preds=<id,id,...> succs=<id,...>
///     0x<id>: MNEMONIC [0x<push data>] [target=0x..] [selector=0x..] [callee=0x..]
///
/// The first block of a function is its entry. Every edge must be declared on
/// both ends, inside one function. Throws ParseError with 1-based line and
/// column.
ContractIR ingest_external_ir(std::string_view text);

/// Canonical rendering: functions by entry offset, entry block first then
/// ascending ids, lowercase hex, sorted edge lists.
std::string serialize_external_ir(const ContractIR& ir);

}  // namespace sentinel::evm
