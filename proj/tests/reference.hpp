#pragma once

// Slow, table-free reference arithmetic used as an oracle in tests. Nothing
// here touches the exp/log tables or the LFSR encoder.

#include <cstdint>
#include <vector>

#include "biosketch/fusion.hpp"
#include "biosketch/gf.hpp"

namespace reference {

using biosketch::Symbol;

inline Symbol mul(Symbol a, Symbol b, unsigned m, std::uint32_t poly) {
  return biosketch::poly_mulmod(a, b, m, poly);
}

inline Symbol power(Symbol a, unsigned e, unsigned m, std::uint32_t poly) {
  Symbol r = 1;
  for (unsigned i = 0; i < e; ++i) r = mul(r, a, m, poly);
  return r;
}

/// Generator polynomial (ascending) with roots x^1 .. x^p, by repeated
/// multiplication with (x + alpha^j).
inline std::vector<Symbol> generator(unsigned m, std::uint32_t poly, unsigned p) {
  std::vector<Symbol> g{1};
  for (unsigned j = 1; j <= p; ++j) {
    const Symbol root = power(2, j, m, poly);
    std::vector<Symbol> next(g.size() + 1, 0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      next[i + 1] ^= g[i];
      next[i] ^= mul(g[i], root, m, poly);
    }
    g = next;
  }
  return g;
}

/// Systematic codeword by schoolbook long division of msg(x) x^p by g(x).
/// Layout matches RsCode: index 0 is the highest-degree coefficient.
inline std::vector<Symbol> encode(const std::vector<Symbol>& msg, unsigned m, std::uint32_t poly, unsigned n) {
  const unsigned k = static_cast<unsigned>(msg.size());
  const unsigned p = n - k;
  const auto g = generator(m, poly, p);
  // Descending dividend.
  std::vector<Symbol> work(msg);
  work.resize(n, 0);
  for (unsigned i = 0; i < k; ++i) {
    const Symbol lead = work[i];
    if (lead == 0) continue;
    for (unsigned j = 0; j <= p; ++j) work[i + j] ^= mul(lead, g[p - j], m, poly);
  }
  std::vector<Symbol> cw(msg);
  cw.insert(cw.end(), work.begin() + k, work.end());
  return cw;
}

// Naive reference: explicit index arithmetic, no shared helpers.
inline biosketch::Vector fca(const biosketch::Vector& f, const biosketch::Vector& i, const biosketch::FusionWeights& w) {
  biosketch::Vector e(w.out_dim, 0.0);
  const std::size_t cols = f.size() + i.size();
  for (std::size_t r = 0; r < w.out_dim; ++r) {
    double acc = w.bias[r];
    for (std::size_t c = 0; c < f.size(); ++c) acc += w.matrix[r * cols + c] * f[c];
    for (std::size_t c = 0; c < i.size(); ++c) acc += w.matrix[r * cols + f.size() + c] * i[c];
    e[r] = (w.activation == biosketch::Activation::Rectifier && acc < 0) ? 0 : acc;
  }
  return e;
}

inline biosketch::Vector bla(const biosketch::Vector& f, const biosketch::Vector& i, const biosketch::FusionWeights& w) {
  biosketch::Vector e(w.out_dim, 0.0);
  for (std::size_t r = 0; r < w.out_dim; ++r) {
    double acc = 0;
    for (std::size_t a = 0; a < f.size(); ++a) {
      for (std::size_t b = 0; b < i.size(); ++b) {
        const double outer = f[a] * i[b];
        acc += w.matrix.empty() ? (r == a * i.size() + b ? outer : 0.0) : w.matrix[r * f.size() * i.size() + a * i.size() + b] * outer;
      }
    }
    e[r] = (w.activation == biosketch::Activation::Rectifier && acc < 0) ? 0 : acc;
  }
  return e;
}

}  // namespace reference
