#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <algorithm>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sentinel {

using Bytes = std::vector<std::uint8_t>;

/// Parses hex text with an optional 0x prefix. Surrounding whitespace is
/// ignored; an odd digit count is left-padded with a zero nibble.
/// Throws std::invalid_argument on non-hex characters.
Bytes from_hex(std::string_view text);

std::string to_hex(std::span<const std::uint8_t> data, bool prefix = true);

bool is_hex_digit(char c) noexcept;

/// Fixed-width big-endian byte string. Distinct widths are distinct types so
/// an Address can never be passed where a Selector is expected.
template <std::size_t N>
struct FixedBytes {
  static constexpr std::size_t size = N;
  std::array<std::uint8_t, N> bytes{};

  /// Exact-width parse; shorter input is left-padded with zeros, longer
  /// input throws.
  static FixedBytes from_hex(std::string_view text) {
    const Bytes raw = ::sentinel::from_hex(text);
    if (raw.size() > N) {
      throw std::invalid_argument("hex value wider than " + std::to_string(N) + " bytes: " +
                                  std::string(text));
    }
    FixedBytes out;
    std::copy(raw.begin(), raw.end(), out.bytes.begin() + (N - raw.size()));
    return out;
  }

  static FixedBytes from_span(std::span<const std::uint8_t> raw) {
    if (raw.size() > N) throw std::invalid_argument("byte span wider than fixed width");
    FixedBytes out;
    std::copy(raw.begin(), raw.end(), out.bytes.begin() + (N - raw.size()));
    return out;
  }

  std::string hex(bool prefix = true) const { return to_hex(bytes, prefix); }

  bool is_zero() const noexcept {
    for (auto b : bytes)
      if (b != 0) return false;
    return true;
  }

  auto operator<=>(const FixedBytes&) const = default;
};

using Address = FixedBytes<20>;
using Selector = FixedBytes<4>;
using Hash32 = FixedBytes<32>;

/// Big-endian 256-bit quantity as carried by JSON-RPC quantities (wei).
struct Uint256 {
  Hash32 be;

  static Uint256 from_quantity(std::string_view hex_quantity);
  static Uint256 from_u64(std::uint64_t v);
  bool is_zero() const noexcept { return be.is_zero(); }
  /// Minimal 0x-prefixed quantity ("0x0" for zero).
  std::string quantity() const;
  /// Value if it fits in 64 bits.
  std::optional<std::uint64_t> to_u64() const;
  auto operator<=>(const Uint256&) const = default;
};

/// Parses a JSON-RPC quantity ("0x1a") into 64 bits; throws on overflow.
std::uint64_t parse_quantity(std::string_view hex_quantity);
std::string format_quantity(std::uint64_t v);

}  // namespace sentinel

template <std::size_t N>
struct std::hash<sentinel::FixedBytes<N>> {
  std::size_t operator()(const sentinel::FixedBytes<N>& v) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (auto b : v.bytes) h = (h ^ b) * 1099511628211ULL;
    return h;
  }
};
