#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biosketch/error.hpp"
#include "biosketch/gf.hpp"

namespace biosketch {

/// Ordered sequence of bits, one byte per bit (values 0 or 1).
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t size, bool value = false) : bits_(size, value ? 1 : 0) {}
  explicit BitVector(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (auto& b : bits_) b = b ? 1 : 0;
  }

  /// Parses a string of '0'/'1' characters; any other character is skipped
  /// so that "101 110" is accepted.
  static BitVector from_string(std::string_view text) {
    BitVector v;
    for (char c : text) {
      if (c == '0' || c == '1') v.bits_.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return v;
  }

  std::size_t size() const noexcept { return bits_.size(); }
  bool empty() const noexcept { return bits_.empty(); }

  std::uint8_t operator[](std::size_t i) const noexcept { return bits_[i]; }
  void set(std::size_t i, bool value) noexcept { bits_[i] = value ? 1 : 0; }
  void push_back(bool value) { bits_.push_back(value ? 1 : 0); }

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  auto begin() const noexcept { return bits_.begin(); }
  auto end() const noexcept { return bits_.end(); }

  std::size_t popcount() const noexcept {
    std::size_t n = 0;
    for (auto b : bits_) n += b;
    return n;
  }

  std::string to_string() const {
    std::string s;
    s.reserve(bits_.size());
    for (auto b : bits_) s.push_back(static_cast<char>('0' + b));
    return s;
  }

  /// Packs the bits MSB-first into bytes; the final byte is zero-padded.
  std::vector<std::uint8_t> to_bytes() const {
    std::vector<std::uint8_t> out((bits_.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits_.size(); ++i) {
      if (bits_[i]) out[i / 8] |= static_cast<std::uint8_t>(0x80U >> (i % 8));
    }
    return out;
  }

  static BitVector from_bytes(std::span<const std::uint8_t> bytes, std::size_t nbits) {
    if (nbits > bytes.size() * 8) throw Error(Errc::LengthMismatch, "not enough bytes for bit count");
    BitVector v(nbits);
    for (std::size_t i = 0; i < nbits; ++i) v.bits_[i] = (bytes[i / 8] >> (7 - i % 8)) & 1U;
    return v;
  }

  friend BitVector operator^(const BitVector& a, const BitVector& b) {
    if (a.size() != b.size()) throw Error(Errc::LengthMismatch, "xor of bit vectors of different length");
    BitVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out.bits_[i] = a.bits_[i] ^ b.bits_[i];
    return out;
  }

  friend bool operator==(const BitVector&, const BitVector&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Groups bits into m-bit symbols, most significant bit first within each
/// symbol: bits "101 110" with m = 3 become symbols {5, 6}.
inline std::vector<Symbol> bits_to_symbols(const BitVector& v, unsigned m) {
  if (m == 0 || m > kMaxSymbolBits) throw Error(Errc::InvalidParams, "symbol size out of range");
  if (v.size() % m != 0) {
    throw Error(Errc::LengthMismatch,
                std::to_string(v.size()) + " bits is not a multiple of m=" + std::to_string(m));
  }
  std::vector<Symbol> out(v.size() / m, 0);
  for (std::size_t s = 0; s < out.size(); ++s) {
    Symbol x = 0;
    for (unsigned j = 0; j < m; ++j) x = static_cast<Symbol>((x << 1) | v[s * m + j]);
    out[s] = x;
  }
  return out;
}

inline BitVector symbols_to_bits(std::span<const Symbol> symbols, unsigned m) {
  if (m == 0 || m > kMaxSymbolBits) throw Error(Errc::InvalidParams, "symbol size out of range");
  BitVector v(symbols.size() * m);
  for (std::size_t s = 0; s < symbols.size(); ++s) {
    if (symbols[s] >> m) throw Error(Errc::InvalidParams, "symbol wider than m bits");
    for (unsigned j = 0; j < m; ++j) v.set(s * m + j, (symbols[s] >> (m - 1 - j)) & 1U);
  }
  return v;
}

}  // namespace biosketch
