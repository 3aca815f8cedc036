#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biosketch/bits.hpp"
#include "biosketch/error.hpp"
#include "biosketch/gf.hpp"

namespace biosketch {

enum class DecodePolicy {
  /// Strict bounded-distance decoding; anything beyond t is a Failure.
  FailDeny,
  /// Beyond t, fall back to the systematic positions of the received word.
  /// Total and deterministic.
  FallbackSystematic,
};

enum class DecodeStatus { ExactCodeword, Corrected, Fallback, Failure };

constexpr std::string_view to_string(DecodePolicy p) noexcept {
  return p == DecodePolicy::FailDeny ? "fail-deny" : "fallback";
}

constexpr std::string_view to_string(DecodeStatus s) noexcept {
  switch (s) {
    case DecodeStatus::ExactCodeword: return "exact";
    case DecodeStatus::Corrected: return "corrected";
    case DecodeStatus::Fallback: return "fallback";
    case DecodeStatus::Failure: return "failure";
  }
  return "?";
}

/// Result of RsCode::decode. codeword and message are empty on Failure;
/// error_count is only meaningful for Corrected.
struct DecodeOutcome {
  DecodeStatus status = DecodeStatus::Failure;
  unsigned error_count = 0;
  std::vector<Symbol> codeword;
  std::vector<Symbol> message;

  bool ok() const noexcept { return status != DecodeStatus::Failure; }
  friend bool operator==(const DecodeOutcome&, const DecodeOutcome&) = default;
};

/// Systematic Reed-Solomon code RS(N, K) over GF(2^m), N = 2^m - 1.
///
/// Codeword layout: symbol i holds the coefficient of x^(N-1-i), so the K
/// message symbols occupy positions [0, K) verbatim and the N-K parity
/// symbols occupy [K, N). The generator polynomial has roots
/// alpha^1 .. alpha^(N-K).
class RsCode {
 public:
  RsCode(Field field, unsigned k) : field_(std::move(field)), n_(field_.order()), k_(k) {
    if (k_ < 1 || k_ > n_) {
      throw Error(Errc::InvalidK, "K=" + std::to_string(k_) + " outside [1, " + std::to_string(n_) + "]");
    }
    const unsigned p = n_ - k_;
    // Ascending coefficients: gen_[i] multiplies x^i.
    gen_.assign(1, 1);
    for (unsigned j = 1; j <= p; ++j) {
      const Symbol root = field_.exp(j);
      std::vector<Symbol> next(gen_.size() + 1, 0);
      for (std::size_t i = 0; i < gen_.size(); ++i) {
        next[i + 1] ^= gen_[i];
        next[i] ^= field_.mul(gen_[i], root);
      }
      gen_ = std::move(next);
    }
  }

  const Field& field() const noexcept { return field_; }
  unsigned m() const noexcept { return field_.m(); }
  /// Codeword length in symbols.
  unsigned n_symbols() const noexcept { return n_; }
  /// Message length in symbols.
  unsigned k_symbols() const noexcept { return k_; }
  unsigned parity_symbols() const noexcept { return n_ - k_; }
  unsigned t() const noexcept { return (n_ - k_) / 2; }
  unsigned min_distance() const noexcept { return n_ - k_ + 1; }
  /// Codeword length in bits, m * N.
  unsigned n_bits() const noexcept { return m() * n_; }
  /// Message (sketch) length in bits, m * K.
  unsigned k_bits() const noexcept { return m() * k_; }

  /// Generator polynomial, ascending coefficients, monic of degree N-K.
  std::span<const Symbol> generator() const noexcept { return gen_; }

  std::vector<Symbol> encode(std::span<const Symbol> message) const {
    if (message.size() != k_) {
      throw Error(Errc::LengthMismatch, "message has " + std::to_string(message.size()) +
                                            " symbols, expected " + std::to_string(k_));
    }
    check_symbols(message);
    const unsigned p = n_ - k_;
    std::vector<Symbol> cw(message.begin(), message.end());
    cw.resize(n_, 0);
    if (p == 0) return cw;
    // LFSR division of m(x) x^p by g(x); rem[0] is the highest-degree term.
    std::vector<Symbol> rem(p, 0);
    for (unsigned i = 0; i < k_; ++i) {
      const Symbol fb = message[i] ^ rem[0];
      for (unsigned j = 0; j + 1 < p; ++j) rem[j] = rem[j + 1] ^ field_.mul(fb, gen_[p - 1 - j]);
      rem[p - 1] = field_.mul(fb, gen_[0]);
    }
    std::copy(rem.begin(), rem.end(), cw.begin() + k_);
    return cw;
  }

  /// S_j = r(alpha^j) for j = 1 .. N-K.
  std::vector<Symbol> syndromes(std::span<const Symbol> received) const {
    check_length(received);
    std::vector<Symbol> s(n_ - k_, 0);
    for (unsigned j = 1; j <= n_ - k_; ++j) {
      const Symbol x = field_.exp(j);
      Symbol acc = 0;
      for (Symbol r : received) acc = field_.mul(acc, x) ^ r;
      s[j - 1] = acc;
    }
    return s;
  }

  bool is_codeword(std::span<const Symbol> word) const {
    const auto s = syndromes(word);
    return std::all_of(s.begin(), s.end(), [](Symbol v) { return v == 0; });
  }

  /// Systematic positions of any N-symbol word.
  std::vector<Symbol> systematic_part(std::span<const Symbol> word) const {
    check_length(word);
    return {word.begin(), word.begin() + k_};
  }

  /// Syndrome decoding: Berlekamp-Massey for the error locator, Chien search
  /// for its roots, Forney for the magnitudes. Beyond t errors the result is
  /// governed by policy (miscorrection to another codeword is possible, as
  /// with any bounded-distance decoder).
  DecodeOutcome decode(std::span<const Symbol> received,
                       DecodePolicy policy = DecodePolicy::FallbackSystematic) const {
    check_length(received);
    check_symbols(received);
    const auto synd = syndromes(received);
    if (std::all_of(synd.begin(), synd.end(), [](Symbol v) { return v == 0; })) {
      DecodeOutcome out;
      out.status = DecodeStatus::ExactCodeword;
      out.codeword.assign(received.begin(), received.end());
      out.message = systematic_part(received);
      return out;
    }
    std::vector<Symbol> corrected(received.begin(), received.end());
    unsigned errors = 0;
    if (correct_errors(synd, corrected, errors)) {
      DecodeOutcome out;
      out.status = DecodeStatus::Corrected;
      out.error_count = errors;
      out.message = systematic_part(corrected);
      out.codeword = std::move(corrected);
      return out;
    }
    DecodeOutcome out;
    if (policy == DecodePolicy::FallbackSystematic) {
      out.status = DecodeStatus::Fallback;
      out.message = systematic_part(received);
      out.codeword = encode(out.message);
    }
    return out;
  }

  DecodeOutcome decode_bits(const BitVector& received,
                            DecodePolicy policy = DecodePolicy::FallbackSystematic) const {
    if (received.size() != n_bits()) {
      throw Error(Errc::LengthMismatch, "received word has " + std::to_string(received.size()) +
                                            " bits, expected " + std::to_string(n_bits()));
    }
    return decode(bits_to_symbols(received, m()), policy);
  }

 private:
  void check_length(std::span<const Symbol> word) const {
    if (word.size() != n_) {
      throw Error(Errc::LengthMismatch, "word has " + std::to_string(word.size()) +
                                            " symbols, expected " + std::to_string(n_));
    }
  }

  void check_symbols(std::span<const Symbol> word) const {
    for (Symbol s : word) {
      if (!field_.contains(s)) throw Error(Errc::InvalidParams, "symbol outside the field");
    }
  }

  // Evaluates an ascending-coefficient polynomial at x.
  Symbol eval(std::span<const Symbol> poly, Symbol x) const noexcept {
    Symbol acc = 0;
    for (std::size_t i = poly.size(); i-- > 0;) acc = field_.mul(acc, x) ^ poly[i];
    return acc;
  }

  bool correct_errors(const std::vector<Symbol>& synd, std::vector<Symbol>& word,
                      unsigned& errors) const {
    const std::size_t p = synd.size();
    std::vector<Symbol> locator{1};
    std::vector<Symbol> prev{1};
    unsigned degree = 0;
    unsigned shift = 1;
    Symbol prev_discrepancy = 1;
    for (std::size_t r = 0; r < p; ++r) {
      Symbol d = synd[r];
      for (unsigned i = 1; i <= degree && i < locator.size(); ++i) d ^= field_.mul(locator[i], synd[r - i]);
      if (d == 0) {
        ++shift;
        continue;
      }
      const Symbol scale = field_.div(d, prev_discrepancy);
      std::vector<Symbol> next = locator;
      if (next.size() < prev.size() + shift) next.resize(prev.size() + shift, 0);
      for (std::size_t i = 0; i < prev.size(); ++i) next[i + shift] ^= field_.mul(scale, prev[i]);
      if (2 * degree <= r) {
        prev = std::move(locator);
        degree = static_cast<unsigned>(r + 1 - degree);
        prev_discrepancy = d;
        shift = 1;
      } else {
        ++shift;
      }
      locator = std::move(next);
    }
    while (locator.size() > 1 && locator.back() == 0) locator.pop_back();
    if (degree > t() || locator.size() - 1 != degree) return false;

    // Chien search over every position; position i has locator X = alpha^(N-1-i).
    std::vector<unsigned> positions;
    for (unsigned i = 0; i < n_; ++i) {
      const unsigned power = n_ - 1 - i;
      if (eval(locator, field_.exp(n_ - power)) == 0) positions.push_back(i);
    }
    if (positions.size() != degree) return false;

    // Omega(x) = S(x) Lambda(x) mod x^p.
    std::vector<Symbol> omega(p, 0);
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < locator.size() && i + j < p; ++j) omega[i + j] ^= field_.mul(synd[i], locator[j]);
    }
    // Formal derivative: only odd powers survive in characteristic 2.
    std::vector<Symbol> deriv(locator.size() > 1 ? locator.size() - 1 : 1, 0);
    for (std::size_t i = 1; i < locator.size(); i += 2) deriv[i - 1] = locator[i];

    for (unsigned pos : positions) {
      const unsigned power = n_ - 1 - pos;
      const Symbol x_inv = field_.exp(n_ - power);
      const Symbol denom = eval(deriv, x_inv);
      if (denom == 0) return false;
      const Symbol magnitude = field_.div(eval(omega, x_inv), denom);
      if (magnitude == 0) return false;
      word[pos] ^= magnitude;
    }
    if (!is_codeword(word)) return false;
    errors = degree;
    return true;
  }

  Field field_;
  unsigned n_;
  unsigned k_;
  std::vector<Symbol> gen_;
};

}  // namespace biosketch
