#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "biosketch/bits.hpp"
#include "biosketch/error.hpp"
#include "biosketch/fusion.hpp"
#include "biosketch/rng.hpp"

namespace biosketch {

/// Fused vectors of one subject.
struct FusedSubject {
  std::string id;
  std::vector<Vector> samples;
};

/// Per-dimension reference statistics over a population of fused vectors.
struct PopulationStats {
  Vector mean;
  Vector median;

  std::size_t dimension() const noexcept { return median.size(); }
};

/// Per-dimension mean and standard deviation over one user's samples.
struct UserStats {
  Vector mean;
  Vector stddev;
  std::size_t count = 0;

  std::size_t dimension() const noexcept { return mean.size(); }
};

inline constexpr double kSigmaFloor = 1e-9;

inline PopulationStats population_stats(std::span<const FusedSubject> population) {
  if (population.size() < 2) throw Error(Errc::InsufficientData, "population statistics need at least 2 subjects");
  std::vector<const Vector*> all;
  for (const auto& s : population) {
    for (const auto& v : s.samples) all.push_back(&v);
  }
  if (all.empty()) throw Error(Errc::InsufficientData, "population has no samples");
  const std::size_t d = all.front()->size();
  for (const auto* v : all) {
    if (v->size() != d) throw Error(Errc::DimensionMismatch, "population vectors differ in dimension");
  }
  PopulationStats stats;
  stats.mean.assign(d, 0.0);
  stats.median.assign(d, 0.0);
  std::vector<double> column(all.size());
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < all.size(); ++i) {
      column[i] = (*all[i])[j];
      sum += column[i];
    }
    stats.mean[j] = sum / static_cast<double>(all.size());
    const std::size_t half = column.size() / 2;
    std::nth_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(half), column.end());
    const double upper = column[half];
    if (column.size() % 2 == 1) {
      stats.median[j] = upper;
    } else {
      const double lower = *std::max_element(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(half));
      stats.median[j] = lower + (upper - lower) / 2.0;
    }
  }
  return stats;
}

/// Sample mean and (n-1)-normalized standard deviation.
inline UserStats user_stats(std::span<const Vector> samples) {
  if (samples.size() < 2) throw Error(Errc::InsufficientData, "user statistics need at least 2 samples");
  const std::size_t d = samples.front().size();
  UserStats u;
  u.count = samples.size();
  u.mean.assign(d, 0.0);
  u.stddev.assign(d, 0.0);
  for (const auto& v : samples) {
    if (v.size() != d) throw Error(Errc::DimensionMismatch, "user samples differ in dimension");
    for (std::size_t j = 0; j < d; ++j) u.mean[j] += v[j];
  }
  for (double& m : u.mean) m /= static_cast<double>(u.count);
  for (const auto& v : samples) {
    for (std::size_t j = 0; j < d; ++j) u.stddev[j] += (v[j] - u.mean[j]) * (v[j] - u.mean[j]);
  }
  for (double& s : u.stddev) s = std::sqrt(s / static_cast<double>(u.count - 1));
  return u;
}

/// a_j = 1 iff e_j > population median_j.
inline BitVector binarize(std::span<const double> e, const PopulationStats& pop) {
  if (e.size() != pop.dimension()) {
    throw Error(Errc::DimensionMismatch, "vector has " + std::to_string(e.size()) + " components, stats have " +
                                             std::to_string(pop.dimension()));
  }
  BitVector a(e.size());
  for (std::size_t j = 0; j < e.size(); ++j) a.set(j, e[j] > pop.median[j]);
  return a;
}

/// Probability that a fresh sample binarizes to the same bit as the user's
/// mean, under a per-dimension Gaussian model: Phi(|mu - median| / sigma).
inline Vector reliability(const UserStats& user, const PopulationStats& pop) {
  if (user.dimension() != pop.dimension() || user.stddev.size() != user.mean.size()) {
    throw Error(Errc::DimensionMismatch, "user and population statistics differ in dimension");
  }
  Vector score(user.dimension());
  for (std::size_t j = 0; j < score.size(); ++j) {
    const double z = std::abs(user.mean[j] - pop.median[j]) / std::max(user.stddev[j], kSigmaFloor);
    score[j] = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  }
  return score;
}

/// User-specific key: the sorted component indices selected at enrollment.
struct ReliableKey {
  std::vector<std::uint32_t> indices;
  std::size_t dimension = 0;
  std::uint64_t nonce = 0;

  std::size_t size() const noexcept { return indices.size(); }
  friend bool operator==(const ReliableKey&, const ReliableKey&) = default;
};

namespace detail {
inline std::uint64_t keyed(std::uint64_t nonce, std::uint64_t domain, std::uint64_t index) noexcept {
  return splitmix64(nonce ^ splitmix64(index ^ (domain << 40)));
}
}  // namespace detail

/// Selects G component indices.
///
/// Components are ranked by score (descending), with equal scores ordered by
/// a nonce-keyed hash. The top ceil(window * G) form the candidate window,
/// and the G candidates with the smallest second keyed hash are kept. With
/// window = 1 this is exactly the top-G set; a wider window lets a fresh
/// nonce reissue a different key drawn from still-reliable components.
inline ReliableKey select_reliable(std::span<const double> scores, std::size_t g, std::uint64_t nonce,
                                   double window = 1.0) {
  const std::size_t d = scores.size();
  if (g > d) throw Error(Errc::GTooLarge, "G=" + std::to_string(g) + " exceeds dimension " + std::to_string(d));
  if (!(window >= 1.0)) throw Error(Errc::InvalidParams, "window factor must be >= 1");
  std::vector<std::uint32_t> order(d);
  std::iota(order.begin(), order.end(), 0U);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    const auto ha = detail::keyed(nonce, 1, a), hb = detail::keyed(nonce, 1, b);
    return ha != hb ? ha < hb : a < b;
  });
  const auto width = std::min<std::size_t>(d, static_cast<std::size_t>(std::ceil(window * static_cast<double>(g))));
  order.resize(std::max(width, g));
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return detail::keyed(nonce, 2, a) < detail::keyed(nonce, 2, b);
  });
  order.resize(g);
  std::sort(order.begin(), order.end());
  return ReliableKey{std::move(order), d, nonce};
}

/// Gathers a[g_0], a[g_1], ... in key order.
inline BitVector extract(const BitVector& a, const ReliableKey& key) {
  BitVector r(key.size());
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (key.indices[i] >= a.size()) {
      throw Error(Errc::IndexOutOfRange, "key index " + std::to_string(key.indices[i]) + " outside vector of " +
                                             std::to_string(a.size()) + " bits");
    }
    r.set(i, a[key.indices[i]]);
  }
  return r;
}

// Key file:
//
//   version 1
//   d <int>
//   G <int>
//   nonce <uint64, decimal>
//   <index>          (G lines, decimal, ascending)
inline std::string serialize_key(const ReliableKey& key) {
  std::ostringstream out;
  out << "version 1\n"
      << "d " << key.dimension << '\n'
      << "G " << key.size() << '\n'
      << "nonce " << key.nonce << '\n';
  for (auto i : key.indices) out << i << '\n';
  return out.str();
}

inline ReliableKey parse_key(std::string_view text) {
  std::istringstream in{std::string(text)};
  auto expect = [&](const char* name) -> std::uint64_t {
    std::string word;
    std::string value;
    if (!(in >> word >> value) || word != name) throw Error(Errc::ParseError, std::string("key file: expected ") + name);
    std::uint64_t v = 0;
    const auto r = std::from_chars(value.data(), value.data() + value.size(), v);
    if (r.ec != std::errc() || r.ptr != value.data() + value.size()) {
      throw Error(Errc::ParseError, std::string("key file: bad value for ") + name);
    }
    return v;
  };
  if (expect("version") != 1) throw Error(Errc::ParseError, "key file: unsupported version");
  ReliableKey key;
  key.dimension = expect("d");
  const auto g = expect("G");
  key.nonce = expect("nonce");
  if (g > key.dimension) throw Error(Errc::ParseError, "key file: G exceeds d");
  key.indices.reserve(g);
  std::string token;
  while (in >> token) {
    std::uint32_t v = 0;
    const auto r = std::from_chars(token.data(), token.data() + token.size(), v);
    if (r.ec != std::errc() || r.ptr != token.data() + token.size()) throw Error(Errc::ParseError, "key file: bad index");
    if (v >= key.dimension) throw Error(Errc::ParseError, "key file: index out of range");
    if (!key.indices.empty() && v <= key.indices.back()) throw Error(Errc::ParseError, "key file: indices not ascending");
    key.indices.push_back(v);
  }
  if (key.indices.size() != g) throw Error(Errc::ParseError, "key file: index count differs from G");
  return key;
}

}  // namespace biosketch
