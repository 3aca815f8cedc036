#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "biosketch/error.hpp"

namespace biosketch {

/// Raw symbol value in GF(2^m); always < 2^m for the owning field.
using Symbol = std::uint16_t;

inline constexpr unsigned kMinSymbolBits = 2;
inline constexpr unsigned kMaxSymbolBits = 10;

/// Default primitive polynomials, indexed by m. Bit i is the coefficient of
/// x^i. Any primitive choice gives an equivalent code; these are pinned so
/// outputs are reproducible.
inline constexpr std::array<std::uint32_t, kMaxSymbolBits + 1> kDefaultPrimitivePoly = {
    0,      0,
    0x7,    // x^2 + x + 1
    0xb,    // x^3 + x + 1
    0x13,   // x^4 + x + 1
    0x25,   // x^5 + x^2 + 1
    0x43,   // x^6 + x + 1
    0x89,   // x^7 + x^3 + 1
    0x11d,  // x^8 + x^4 + x^3 + x^2 + 1
    0x211,  // x^9 + x^4 + 1
    0x409,  // x^10 + x^3 + 1
};

/// Carry-less multiply of a and b reduced modulo poly (degree m). This is the
/// slow reference path; the table-driven Field is checked against it.
constexpr Symbol poly_mulmod(Symbol a, Symbol b, unsigned m, std::uint32_t poly) noexcept {
  std::uint32_t acc = 0;
  std::uint32_t x = a;
  for (unsigned i = 0; i < m; ++i) {
    if ((b >> i) & 1U) acc ^= x;
    x <<= 1;
    if (x & (1U << m)) x ^= poly;
  }
  return static_cast<Symbol>(acc);
}

class Field;

/// A value bound to the field it lives in. Mixing elements of different
/// fields raises FieldMismatch.
class FieldElement {
 public:
  FieldElement(const Field& field, Symbol value);

  Symbol value() const noexcept { return value_; }
  const Field& field() const noexcept { return *field_; }

  friend bool operator==(const FieldElement& a, const FieldElement& b) noexcept {
    return a.value_ == b.value_ && a.same_field_as(b);
  }

  bool same_field_as(const FieldElement& other) const noexcept;

 private:
  const Field* field_;
  Symbol value_;
};

/// GF(2^m) with exp/log tables over the primitive element alpha = x.
/// Immutable after construction.
class Field {
 public:
  explicit Field(unsigned m, std::optional<std::uint32_t> primitive_poly = std::nullopt)
      : m_(m) {
    if (m < kMinSymbolBits || m > kMaxSymbolBits) {
      throw Error(Errc::UnsupportedM, "m must be in [2, 10], got " + std::to_string(m));
    }
    poly_ = primitive_poly.value_or(kDefaultPrimitivePoly[m]);
    if (std::bit_width(poly_) != m + 1) {
      throw Error(Errc::NonPrimitivePolynomial, "polynomial does not have degree m");
    }
    const unsigned order = (1U << m) - 1;
    exp_.resize(2 * order);
    log_.assign(order + 1, 0);
    std::vector<bool> seen(order + 1, false);
    std::uint32_t x = 1;
    for (unsigned i = 0; i < order; ++i) {
      if (seen[x] || (i > 0 && x == 1)) {
        throw Error(Errc::NonPrimitivePolynomial,
                    "x has order " + std::to_string(i) + " < " + std::to_string(order));
      }
      seen[x] = true;
      exp_[i] = static_cast<Symbol>(x);
      log_[x] = static_cast<Symbol>(i);
      x <<= 1;
      if (x & (1U << m)) x ^= poly_;
    }
    if (x != 1) throw Error(Errc::NonPrimitivePolynomial, "alpha^(2^m-1) != 1");
    for (unsigned i = order; i < 2 * order; ++i) exp_[i] = exp_[i - order];
  }

  unsigned m() const noexcept { return m_; }
  std::uint32_t primitive_poly() const noexcept { return poly_; }
  unsigned size() const noexcept { return 1U << m_; }
  /// Order of the multiplicative group, 2^m - 1.
  unsigned order() const noexcept { return (1U << m_) - 1; }

  Symbol exp(unsigned i) const noexcept { return exp_[i % order()]; }
  /// Discrete log; a must be nonzero.
  unsigned log(Symbol a) const noexcept { return log_[a]; }

  static Symbol add(Symbol a, Symbol b) noexcept { return a ^ b; }

  Symbol mul(Symbol a, Symbol b) const noexcept {
    if (a == 0 || b == 0) return 0;
    return exp_[log_[a] + log_[b]];
  }

  Symbol inv(Symbol a) const {
    if (a == 0) throw Error(Errc::DivisionByZero, "inverse of zero");
    return exp_[(order() - log_[a]) % order()];
  }

  Symbol div(Symbol a, Symbol b) const {
    if (b == 0) throw Error(Errc::DivisionByZero, "division by zero");
    if (a == 0) return 0;
    return exp_[log_[a] + order() - log_[b]];
  }

  /// a^e for any integer e (negative exponents require a != 0). 0^0 = 1.
  Symbol pow(Symbol a, long long e) const {
    if (a == 0) {
      if (e < 0) throw Error(Errc::DivisionByZero, "zero to a negative power");
      return e == 0 ? 1 : 0;
    }
    const long long ord = order();
    long long r = (static_cast<long long>(log_[a]) * (e % ord)) % ord;
    if (r < 0) r += ord;
    return exp_[static_cast<std::size_t>(r)];
  }

  bool contains(Symbol a) const noexcept { return a < size(); }

  FieldElement element(Symbol value) const { return FieldElement(*this, value); }
  FieldElement alpha() const { return FieldElement(*this, 2); }

  friend bool operator==(const Field& a, const Field& b) noexcept {
    return a.m_ == b.m_ && a.poly_ == b.poly_;
  }

 private:
  unsigned m_;
  std::uint32_t poly_ = 0;
  std::vector<Symbol> exp_;
  std::vector<Symbol> log_;
};

inline FieldElement::FieldElement(const Field& field, Symbol value)
    : field_(&field), value_(value) {
  if (!field.contains(value)) {
    throw Error(Errc::InvalidParams, "value " + std::to_string(value) + " outside GF(2^" +
                                         std::to_string(field.m()) + ")");
  }
}

inline bool FieldElement::same_field_as(const FieldElement& other) const noexcept {
  return field_ == other.field_ || *field_ == *other.field_;
}

namespace detail {
inline const Field& same_field(const FieldElement& a, const FieldElement& b) {
  if (!a.same_field_as(b)) throw Error(Errc::FieldMismatch, "operands from different fields");
  return a.field();
}
}  // namespace detail

inline FieldElement add(const FieldElement& a, const FieldElement& b) {
  const Field& f = detail::same_field(a, b);
  return f.element(Field::add(a.value(), b.value()));
}

inline FieldElement mul(const FieldElement& a, const FieldElement& b) {
  const Field& f = detail::same_field(a, b);
  return f.element(f.mul(a.value(), b.value()));
}

inline FieldElement inv(const FieldElement& a) { return a.field().element(a.field().inv(a.value())); }

inline FieldElement pow(const FieldElement& a, long long e) {
  return a.field().element(a.field().pow(a.value(), e));
}

inline FieldElement operator+(const FieldElement& a, const FieldElement& b) { return add(a, b); }
inline FieldElement operator*(const FieldElement& a, const FieldElement& b) { return mul(a, b); }

}  // namespace biosketch
