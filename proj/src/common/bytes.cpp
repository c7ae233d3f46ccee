#include "sentinel/common/bytes.hpp"

#include <stdexcept>

#include "sentinel/common/text.hpp"

namespace sentinel {

namespace {

int nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

bool is_hex_digit(char c) noexcept { return nibble(c) >= 0; }

Bytes from_hex(std::string_view text) {
  text = trim(text);
  if (text.size() >= 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) text.remove_prefix(2);
  Bytes out;
  out.reserve(text.size() / 2 + 1);
  std::size_t i = 0;
  if (text.size() % 2 == 1) {
    int lo = nibble(text[0]);
    if (lo < 0) throw std::invalid_argument("invalid hex digit in '" + std::string(text) + "'");
    out.push_back(static_cast<std::uint8_t>(lo));
    i = 1;
  }
  for (; i < text.size(); i += 2) {
    int hi = nibble(text[i]);
    int lo = nibble(text[i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("invalid hex digit in '" + std::string(text) + "'");
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return out;
}

std::string to_hex(std::span<const std::uint8_t> data, bool prefix) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2 + 2);
  if (prefix) out += "0x";
  for (auto b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

Uint256 Uint256::from_quantity(std::string_view hex_quantity) {
  return Uint256{Hash32::from_hex(hex_quantity)};
}

Uint256 Uint256::from_u64(std::uint64_t v) {
  Uint256 out;
  for (int i = 0; i < 8; ++i) out.be.bytes[31 - i] = static_cast<std::uint8_t>(v >> (8 * i));
  return out;
}

std::string Uint256::quantity() const {
  std::string h = be.hex(false);
  auto first = h.find_first_not_of('0');
  if (first == std::string::npos) return "0x0";
  return "0x" + h.substr(first);
}

std::optional<std::uint64_t> Uint256::to_u64() const {
  for (int i = 0; i < 24; ++i)
    if (be.bytes[i] != 0) return std::nullopt;
  std::uint64_t v = 0;
  for (int i = 24; i < 32; ++i) v = (v << 8) | be.bytes[i];
  return v;
}

std::uint64_t parse_quantity(std::string_view hex_quantity) {
  auto v = Uint256::from_quantity(hex_quantity).to_u64();
  if (!v) throw std::out_of_range("quantity exceeds 64 bits: " + std::string(hex_quantity));
  return *v;
}

std::string format_quantity(std::uint64_t v) { return Uint256::from_u64(v).quantity(); }

}  // namespace sentinel
