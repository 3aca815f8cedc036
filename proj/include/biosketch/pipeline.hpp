#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biosketch/error.hpp"
#include "biosketch/fusion.hpp"
#include "biosketch/quantizer.hpp"
#include "biosketch/rs.hpp"
#include "biosketch/sketch.hpp"
#include "biosketch/store.hpp"
#include "biosketch/synth.hpp"

namespace biosketch {

inline constexpr double kDefaultWindow = 2.0;

/// Per-enrollment randomness: key-selection nonce, hash salt, and the
/// fuzzy-commitment message seed.
struct EnrollmentSecrets {
  std::uint64_t nonce = 0;
  Salt salt{};
  std::uint64_t message_seed = 0;
};

inline std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Derives enrollment secrets from (seed, subject id), skipping any nonce or
/// salt that was used by a revoked enrollment of the same subject.
inline EnrollmentSecrets fresh_secrets(std::uint64_t seed, std::string_view subject_id,
                                       const KeyStore::Revoked& revoked = {}) {
  const std::uint64_t base = derive_seed(seed, fnv1a(subject_id));
  for (std::uint64_t attempt = 0;; ++attempt) {
    const std::uint64_t s = derive_seed(base, attempt);
    EnrollmentSecrets out{derive_seed(s, 1), salt_from_seed(derive_seed(s, 2)), derive_seed(s, 3)};
    if (!revoked.nonces.count(out.nonce) && !revoked.salts.count(to_hex(out.salt))) return out;
  }
}

/// A user's cancelable template before sealing: the key and the reliable
/// bits it selects from the binarized enrollment vector.
struct UserTemplate {
  ReliableKey key;
  BitVector reliable_bits;
  Vector source;  // the fused vector the bits were taken from
};

/// Fusion, binarization and reliable-bit selection for one code size.
class Pipeline {
 public:
  Pipeline(FusionWeights weights, PopulationStats population, unsigned key_bits, double window = kDefaultWindow)
      : weights_(std::move(weights)), population_(std::move(population)), key_bits_(key_bits), window_(window) {
    weights_.validate();
    if (population_.dimension() != weights_.out_dim) {
      throw Error(Errc::DimensionMismatch, "population statistics do not match the fused dimension");
    }
    if (key_bits_ > population_.dimension()) {
      throw Error(Errc::GTooLarge, "code needs " + std::to_string(key_bits_) + " reliable bits but only " +
                                       std::to_string(population_.dimension()) + " components exist");
    }
  }

  /// Population statistics from every sample of a reference dataset.
  static Pipeline from_reference(const EmbeddingDataset& reference, FusionWeights weights, unsigned key_bits,
                                 double window = kDefaultWindow) {
    std::vector<FusedSubject> fused;
    for (const auto& s : reference.subjects) {
      FusedSubject f{s.id, {}};
      for (const auto& p : s.samples) f.samples.push_back(fuse(p.face, p.iris, weights));
      fused.push_back(std::move(f));
    }
    auto stats = population_stats(fused);
    return Pipeline(std::move(weights), std::move(stats), key_bits, window);
  }

  const FusionWeights& weights() const noexcept { return weights_; }
  const PopulationStats& population() const noexcept { return population_; }
  unsigned key_bits() const noexcept { return key_bits_; }
  double window() const noexcept { return window_; }

  Vector fuse_sample(const SamplePair& p) const { return fuse(p.face, p.iris, weights_); }

  /// Key and reliable bits from a user's fused enrollment vectors. The
  /// enrolled vector is their mean. With a single sample the spread is
  /// unknown and every dimension gets unit sigma, so the ranking reduces to
  /// the distance from the population median.
  UserTemplate make_template(std::span<const Vector> fused, std::uint64_t nonce) const {
    if (fused.empty()) throw Error(Errc::InsufficientData, "enrollment needs at least one sample");
    UserStats stats;
    if (fused.size() == 1) {
      stats = UserStats{fused.front(), Vector(fused.front().size(), 1.0), 1};
    } else {
      stats = user_stats(fused);
    }
    UserTemplate t;
    t.key = select_reliable(reliability(stats, population_), key_bits_, nonce, window_);
    t.source = stats.mean;
    t.reliable_bits = extract(binarize(stats.mean, population_), t.key);
    return t;
  }

  BitVector probe_bits(std::span<const double> fused, const ReliableKey& key) const {
    return extract(binarize(fused, population_), key);
  }

  BitVector probe_bits(const SamplePair& p, const ReliableKey& key) const { return probe_bits(fuse_sample(p), key); }

 private:
  FusionWeights weights_;
  PopulationStats population_;
  unsigned key_bits_;
  double window_;
};

/// Seals reliable bits under the chosen scheme.
inline EnrollmentRecord seal(const BitVector& r_a, const RsCode& code, Scheme scheme, DecodePolicy policy,
                             const EnrollmentSecrets& secrets, std::string subject_id) {
  return scheme == Scheme::SecureSketch
             ? enroll_ss(r_a, code, policy, secrets.salt, std::move(subject_id))
             : enroll_fc(r_a, code, policy, secrets.message_seed, secrets.salt, std::move(subject_id));
}

}  // namespace biosketch
