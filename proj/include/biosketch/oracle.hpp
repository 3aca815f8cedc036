#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "biosketch/error.hpp"
#include "biosketch/rng.hpp"
#include "biosketch/rs.hpp"

namespace biosketch::oracle {

inline constexpr std::uint64_t kDefaultBudget = std::uint64_t{1} << 20;

struct NearestResult {
  /// All codewords at the minimum distance, ordered lexicographically by
  /// message. The complete decoder's pick among them is given by
  /// CodebookTable::column_of.
  std::vector<std::vector<Symbol>> best_codewords;
  unsigned distance = 0;
};

inline unsigned symbol_distance(std::span<const Symbol> a, std::span<const Symbol> b) {
  if (a.size() != b.size()) throw Error(Errc::LengthMismatch, "distance between words of different length");
  unsigned d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

/// Every codeword of the code, in lexicographic message order. Message
/// symbol 0 is the most significant digit of the enumeration counter.
class CodebookTable {
 public:
  explicit CodebookTable(const RsCode& code, std::uint64_t budget = kDefaultBudget) : n_(code.n_symbols()) {
    const std::uint64_t q = code.field().size();
    std::uint64_t total = 1;
    for (unsigned i = 0; i < code.k_symbols(); ++i) {
      total *= q;
      if (total > budget) throw Error(Errc::BudgetExceeded, "codebook exceeds the enumeration budget");
    }
    words_.reserve(total * n_);
    std::vector<Symbol> msg(code.k_symbols(), 0);
    for (std::uint64_t idx = 0; idx < total; ++idx) {
      std::uint64_t v = idx;
      for (unsigned i = code.k_symbols(); i-- > 0;) {
        msg[i] = static_cast<Symbol>(v % q);
        v /= q;
      }
      const auto cw = code.encode(msg);
      words_.insert(words_.end(), cw.begin(), cw.end());
    }
    count_ = total;
  }

  std::uint64_t size() const noexcept { return count_; }
  std::span<const Symbol> operator[](std::uint64_t i) const noexcept {
    return std::span<const Symbol>(words_).subspan(i * n_, n_);
  }

  NearestResult nearest(std::span<const Symbol> received) const {
    if (received.size() != n_) throw Error(Errc::LengthMismatch, "received length differs from N");
    NearestResult out;
    out.distance = n_ + 1;
    for (std::uint64_t i = 0; i < count_; ++i) {
      const auto cw = (*this)[i];
      const unsigned d = symbol_distance(cw, received);
      if (d < out.distance) {
        out.distance = d;
        out.best_codewords.clear();
      }
      if (d == out.distance) out.best_codewords.emplace_back(cw.begin(), cw.end());
    }
    return out;
  }

  /// Standard-array column of `received`: among the codewords at minimum
  /// distance, the one whose error pattern (received - codeword) is
  /// lexicographically smallest. Every word of a coset sees the same set of
  /// minimum-weight error patterns, so this picks one leader per coset and
  /// all columns have exactly q^(N-K) members.
  std::uint64_t column_of(std::span<const Symbol> received) const {
    if (received.size() != n_) throw Error(Errc::LengthMismatch, "received length differs from N");
    std::uint64_t best = 0;
    unsigned best_d = n_ + 1;
    for (std::uint64_t i = 0; i < count_; ++i) {
      const auto cw = (*this)[i];
      const unsigned d = symbol_distance(cw, received);
      if (d < best_d || (d == best_d && error_less(received, cw, (*this)[best]))) {
        best_d = d;
        best = i;
      }
    }
    return best;
  }

 private:
  static bool error_less(std::span<const Symbol> r, std::span<const Symbol> a, std::span<const Symbol> b) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      const Symbol ea = r[i] ^ a[i];
      const Symbol eb = r[i] ^ b[i];
      if (ea != eb) return ea < eb;
    }
    return false;
  }

  unsigned n_;
  std::uint64_t count_ = 0;
  std::vector<Symbol> words_;
};

/// Exhaustive nearest-codeword search.
inline NearestResult nearest_codeword(const RsCode& code, std::span<const Symbol> received,
                                      std::uint64_t budget = kDefaultBudget) {
  return CodebookTable(code, budget).nearest(received);
}

/// Fraction of uniformly random pairs of received words that the
/// standard-array decoder maps to the same codeword. For a code with K*m message bits this
/// estimates 2^(-K*m).
inline double column_collision_rate(const RsCode& code, std::uint64_t trials, std::uint64_t seed,
                                    std::uint64_t budget = kDefaultBudget) {
  if (trials == 0) throw Error(Errc::InvalidParams, "trials must be positive");
  const CodebookTable table(code, budget);
  const std::uint64_t q = code.field().size();
  std::uint64_t hits = 0;
  std::vector<Symbol> a(code.n_symbols());
  std::vector<Symbol> b(code.n_symbols());
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    Rng rng(derive_seed(seed, trial));
    for (auto& s : a) s = static_cast<Symbol>(rng.below(q));
    for (auto& s : b) s = static_cast<Symbol>(rng.below(q));
    hits += table.column_of(a) == table.column_of(b);
  }
  return static_cast<double>(hits) / static_cast<double>(trials);
}

}  // namespace biosketch::oracle
