#pragma once

#include <span>
#include <string_view>

#include "sentinel/common/bytes.hpp"

namespace sentinel {

/// Original Keccak-256 (0x01 domain padding) as used by the EVM, not the
/// FIPS-202 SHA3-256 variant.
Hash32 keccak256(std::span<const std::uint8_t> data);
Hash32 keccak256(std::string_view text);

/// First four bytes of keccak256(signature), e.g. "transfer(address,uint256)"
/// -> 0xa9059cbb.
Selector selector_of(std::string_view canonical_signature);

/// Address of a contract created by `sender` via CREATE with `nonce`:
/// keccak256(rlp([sender, nonce]))[12:].
Address create_address(const Address& sender, std::uint64_t nonce);

}  // namespace sentinel
