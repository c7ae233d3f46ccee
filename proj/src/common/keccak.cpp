#include "sentinel/common/keccak.hpp"

#include <array>
#include <cstring>

namespace sentinel {

namespace {

constexpr std::array<std::uint64_t, 24> kRoundConstants = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL, 0x8000000080008000ULL,
    0x000000000000808bULL, 0x0000000080000001ULL, 0x8000000080008081ULL, 0x8000000000008009ULL,
    0x000000000000008aULL, 0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
    0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL, 0x8000000000008003ULL,
    0x8000000000008002ULL, 0x8000000000000080ULL, 0x000000000000800aULL, 0x800000008000000aULL,
    0x8000000080008081ULL, 0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL};

constexpr std::array<int, 25> kRotations = {0,  1,  62, 28, 27, 36, 44, 6,  55, 20, 3,  10, 43,
                                            25, 39, 41, 45, 15, 21, 8,  18, 2,  61, 56, 14};

inline std::uint64_t rotl(std::uint64_t x, int n) { return n == 0 ? x : (x << n) | (x >> (64 - n)); }

void keccak_f1600(std::array<std::uint64_t, 25>& a) {
  for (std::uint64_t rc : kRoundConstants) {
    // theta
    std::array<std::uint64_t, 5> c{};
    for (int x = 0; x < 5; ++x) c[x] = a[x] ^ a[x + 5] ^ a[x + 10] ^ a[x + 15] ^ a[x + 20];
    for (int x = 0; x < 5; ++x) {
      std::uint64_t d = c[(x + 4) % 5] ^ rotl(c[(x + 1) % 5], 1);
      for (int y = 0; y < 25; y += 5) a[y + x] ^= d;
    }
    // rho + pi
    std::array<std::uint64_t, 25> b{};
    for (int x = 0; x < 5; ++x)
      for (int y = 0; y < 5; ++y) b[y + 5 * ((2 * x + 3 * y) % 5)] = rotl(a[x + 5 * y], kRotations[x + 5 * y]);
    // chi
    for (int y = 0; y < 25; y += 5)
      for (int x = 0; x < 5; ++x) a[y + x] = b[y + x] ^ (~b[y + (x + 1) % 5] & b[y + (x + 2) % 5]);
    // iota
    a[0] ^= rc;
  }
}

void absorb_block(std::array<std::uint64_t, 25>& state, const std::uint8_t* block, std::size_t rate) {
  for (std::size_t i = 0; i < rate / 8; ++i) {
    std::uint64_t lane = 0;
    for (int b = 0; b < 8; ++b) lane |= static_cast<std::uint64_t>(block[i * 8 + b]) << (8 * b);
    state[i] ^= lane;
  }
  keccak_f1600(state);
}

void rlp_append_bytes(Bytes& out, std::span<const std::uint8_t> data) {
  if (data.size() == 1 && data[0] < 0x80) {
    out.push_back(data[0]);
    return;
  }
  // Only short strings occur here (addresses and 64-bit nonces).
  out.push_back(static_cast<std::uint8_t>(0x80 + data.size()));
  out.insert(out.end(), data.begin(), data.end());
}

}  // namespace

Hash32 keccak256(std::span<const std::uint8_t> data) {
  constexpr std::size_t kRate = 136;
  std::array<std::uint64_t, 25> state{};
  std::size_t offset = 0;
  while (data.size() - offset >= kRate) {
    absorb_block(state, data.data() + offset, kRate);
    offset += kRate;
  }
  std::array<std::uint8_t, kRate> last{};
  const std::size_t rem = data.size() - offset;
  if (rem > 0) std::memcpy(last.data(), data.data() + offset, rem);
  last[rem] ^= 0x01;
  last[kRate - 1] ^= 0x80;
  absorb_block(state, last.data(), kRate);

  Hash32 out;
  for (int i = 0; i < 4; ++i)
    for (int b = 0; b < 8; ++b) out.bytes[i * 8 + b] = static_cast<std::uint8_t>(state[i] >> (8 * b));
  return out;
}

Hash32 keccak256(std::string_view text) {
  return keccak256(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Selector selector_of(std::string_view canonical_signature) {
  const Hash32 h = keccak256(canonical_signature);
  Selector s;
  std::copy_n(h.bytes.begin(), 4, s.bytes.begin());
  return s;
}

Address create_address(const Address& sender, std::uint64_t nonce) {
  Bytes nonce_be;
  for (int i = 7; i >= 0; --i) {
    auto b = static_cast<std::uint8_t>(nonce >> (8 * i));
    if (nonce_be.empty() && b == 0) continue;
    nonce_be.push_back(b);
  }
  Bytes payload;
  rlp_append_bytes(payload, sender.bytes);
  if (nonce_be.empty()) {
    payload.push_back(0x80);
  } else {
    rlp_append_bytes(payload, nonce_be);
  }
  Bytes encoded;
  encoded.push_back(static_cast<std::uint8_t>(0xc0 + payload.size()));
  encoded.insert(encoded.end(), payload.begin(), payload.end());
  const Hash32 h = keccak256(encoded);
  Address a;
  std::copy(h.bytes.begin() + 12, h.bytes.end(), a.bytes.begin());
  return a;
}

}  // namespace sentinel
