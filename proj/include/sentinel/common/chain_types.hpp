#pragma once

#include <cstdint>
#include <optional>

#include "sentinel/common/bytes.hpp"

namespace sentinel {

struct Transaction {
  Hash32 hash;
  Address from;
  std::optional<Address> to;  ///< absent for contract creation
  std::uint64_t nonce = 0;
  Uint256 value;
  Bytes input;
  std::uint64_t block_number = 0;
  std::uint64_t transaction_index = 0;
};

struct Receipt {
  Hash32 transaction_hash;
  std::uint64_t gas_used = 0;
  std::optional<Address> contract_address;
  bool success = true;
};

}  // namespace sentinel
