#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biosketch/error.hpp"
#include "biosketch/pipeline.hpp"
#include "biosketch/rng.hpp"
#include "biosketch/rs.hpp"
#include "biosketch/sketch.hpp"
#include "biosketch/synth.hpp"

namespace biosketch {

/// RS parameters that reach a requested security level.
struct CodePlan {
  unsigned m = 0;
  unsigned n_symbols = 0;  // N = 2^m - 1
  unsigned n_bits = 0;     // n = m N
  unsigned k_symbols = 0;  // K
  double requested_bits = 0;
  unsigned achieved_bits = 0;  // K m
  double rate = 0;             // K m / n
};

/// K = round(security / m), at least 1. Securities that are not multiples
/// of m are quantized; both the requested and achieved values are reported.
inline CodePlan params_for_security(unsigned m, double security_bits) {
  if (m < kMinSymbolBits || m > kMaxSymbolBits) throw Error(Errc::UnsupportedM, "m must be in [2, 10]");
  if (!(security_bits > 0)) throw Error(Errc::InvalidParams, "security must be positive");
  CodePlan p;
  p.m = m;
  p.n_symbols = (1U << m) - 1;
  p.n_bits = m * p.n_symbols;
  if (security_bits > p.n_bits) {
    throw Error(Errc::SecurityTooHigh, std::to_string(security_bits) + " bits exceeds n=" + std::to_string(p.n_bits));
  }
  p.requested_bits = security_bits;
  p.k_symbols = std::max(1U, static_cast<unsigned>(std::lround(security_bits / m)));
  p.achieved_bits = p.k_symbols * m;
  p.rate = static_cast<double>(p.achieved_bits) / p.n_bits;
  return p;
}

inline CodePlan params_for_k(unsigned m, unsigned k_symbols) {
  const RsCode code(Field(m), k_symbols);
  CodePlan p;
  p.m = m;
  p.n_symbols = code.n_symbols();
  p.n_bits = code.n_bits();
  p.k_symbols = k_symbols;
  p.achieved_bits = code.k_bits();
  p.requested_bits = p.achieved_bits;
  p.rate = static_cast<double>(p.achieved_bits) / p.n_bits;
  return p;
}

/// Leakage bound when the key and/or sketch are exposed: the adversary learns
/// at most the n selected components of the d-bit binary feature vector.
struct PrivacyReport {
  std::size_t feature_bits = 0;   // d, also H(x) for balanced i.i.d. bits
  std::size_t exposed_bits = 0;   // n
  std::size_t entropy = 0;        // H(x) = d
  std::size_t max_leakage = 0;    // I(x; V) <= n
  std::size_t residual = 0;       // H(x | V) >= d - n
};

inline PrivacyReport privacy_report(std::size_t d, std::size_t n) {
  if (n > d) throw Error(Errc::InvalidParams, "exposed bits exceed feature bits");
  return {d, n, d, n, d - n};
}

enum class Scenario { ZeroEffort, StolenKey };
enum class ImpostorSource { Embeddings, UniformBits };
enum class ProbeSet { HeldOut, Enrollment };

constexpr std::string_view to_string(Scenario s) noexcept {
  return s == Scenario::ZeroEffort ? "zero-effort" : "stolen-key";
}

struct EvalConfig {
  unsigned m = 5;
  Scheme scheme = Scheme::SecureSketch;
  DecodePolicy policy = DecodePolicy::FallbackSystematic;
  double window = kDefaultWindow;
  ProbeSet probes = ProbeSet::HeldOut;
  Scenario scenario = Scenario::StolenKey;
  ImpostorSource impostors = ImpostorSource::Embeddings;
  std::uint64_t far_trials = 0;
  std::uint64_t seed = 1;
};

/// One impostor attempt. A probe whose length does not match the victim's
/// code (for instance an impostor key of another size) is structurally
/// denied.
inline bool impostor_accepted(const BitVector& r_b, const EnrollmentRecord& victim, const RsCode& code) {
  if (r_b.size() != code.n_bits()) return false;
  return authenticate(r_b, victim, code).accepted;
}

/// Everything about a dataset that does not depend on K: fused vectors,
/// population statistics, per-subject keys and reliable bits, and the
/// binarized vectors of every sample. Subjects enroll from the first
/// ceil(s/2) of their s samples and are probed with the rest.
class Evaluation {
 public:
  Evaluation(const EmbeddingDataset& dataset, const FusionWeights& weights, const EvalConfig& cfg)
      : cfg_(cfg), pipeline_(build(dataset, weights, cfg)) {
    for (std::size_t s = 0; s < dataset.subjects.size(); ++s) {
      const auto& subj = dataset.subjects[s];
      const std::size_t count = fused_[s].size();
      const std::size_t enroll = (count + 1) / 2;
      const std::span<const Vector> enroll_set(fused_[s].data(), enroll);
      const auto secrets = fresh_secrets(cfg.seed, subj.id);
      Enrolled e{subj.id, secrets, pipeline_.make_template(enroll_set, secrets.nonce), {}, {}};
      if (cfg.probes == ProbeSet::Enrollment) {
        e.probes.push_back(e.user.reliable_bits);
      } else {
        for (std::size_t k = enroll; k < count; ++k) e.probes.push_back(pipeline_.probe_bits(fused_[s][k], e.user.key));
      }
      for (const auto& v : fused_[s]) e.binarized.push_back(binarize(v, pipeline_.population()));
      subjects_.push_back(std::move(e));
    }
  }

  const Pipeline& pipeline() const noexcept { return pipeline_; }
  std::size_t subject_count() const noexcept { return subjects_.size(); }

  /// One slot per subject; empty when the subject fails to enroll (secure
  /// sketch under fail-deny with reliable bits farther than t from every
  /// codeword).
  std::vector<std::optional<EnrollmentRecord>> enroll_all(const RsCode& code) const {
    check_code(code);
    std::vector<std::optional<EnrollmentRecord>> records;
    for (const auto& e : subjects_) {
      try {
        records.emplace_back(seal(e.user.reliable_bits, code, cfg_.scheme, cfg_.policy, e.secrets, e.id));
      } catch (const Error& err) {
        if (err.code() != Errc::EnrollmentDecodeFailure) throw;
        records.emplace_back();
      }
    }
    return records;
  }

  std::size_t enrolled_count(const RsCode& code) const {
    const auto records = enroll_all(code);
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const auto& r) { return r.has_value(); }));
  }

  /// Genuine accept rate over subjects that enrolled.
  double gar(const RsCode& code) const {
    const auto records = enroll_all(code);
    std::size_t accepted = 0, total = 0;
    for (std::size_t s = 0; s < subjects_.size(); ++s) {
      if (!records[s]) continue;
      for (const auto& r_b : subjects_[s].probes) {
        accepted += authenticate(r_b, *records[s], code).accepted;
        ++total;
      }
    }
    if (total == 0) throw Error(Errc::InsufficientData, "no subject could enroll at K=" + std::to_string(code.k_symbols()));
    return static_cast<double>(accepted) / static_cast<double>(total);
  }

  /// Victims are drawn among enrolled subjects, impostors among all others.
  double empirical_far(const RsCode& code, std::uint64_t trials, std::uint64_t seed) const {
    if (trials == 0) throw Error(Errc::InvalidParams, "FAR needs at least one trial");
    const auto records = enroll_all(code);
    std::vector<std::size_t> victims;
    for (std::size_t s = 0; s < records.size(); ++s) {
      if (records[s]) victims.push_back(s);
    }
    if (victims.empty()) throw Error(Errc::InsufficientData, "no subject could enroll at K=" + std::to_string(code.k_symbols()));
    const std::uint64_t subjects = subjects_.size();
    std::uint64_t accepted = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
      Rng rng(derive_seed(seed, t));
      const auto victim = victims[rng.below(victims.size())];
      BitVector r_b;
      if (cfg_.impostors == ImpostorSource::UniformBits) {
        r_b = BitVector(code.n_bits());
        for (std::size_t i = 0; i < r_b.size(); ++i) r_b.set(i, rng.bit());
      } else {
        auto impostor = rng.below(subjects - 1);
        if (impostor >= victim) ++impostor;
        const auto& imp = subjects_[impostor];
        const auto& a = imp.binarized[rng.below(imp.binarized.size())];
        const auto& key = cfg_.scenario == Scenario::StolenKey ? subjects_[victim].user.key : imp.user.key;
        r_b = extract(a, key);
      }
      accepted += impostor_accepted(r_b, *records[victim], code);
    }
    return static_cast<double>(accepted) / static_cast<double>(trials);
  }

 private:
  struct Enrolled {
    std::string id;
    EnrollmentSecrets secrets;
    UserTemplate user;
    std::vector<BitVector> probes;
    std::vector<BitVector> binarized;
  };

  Pipeline build(const EmbeddingDataset& dataset, const FusionWeights& weights, const EvalConfig& cfg) {
    dataset.validate();
    if (dataset.subjects.size() < 2) throw Error(Errc::InsufficientData, "evaluation needs at least 2 subjects");
    std::vector<FusedSubject> fused;
    for (const auto& s : dataset.subjects) {
      if (s.samples.size() < 2) {
        throw Error(Errc::InsufficientData, "subject " + s.id + " needs at least 2 samples (enrollment + probe)");
      }
      FusedSubject f{s.id, {}};
      for (const auto& p : s.samples) f.samples.push_back(fuse(p.face, p.iris, weights));
      fused_.push_back(f.samples);
      fused.push_back(std::move(f));
    }
    const unsigned key_bits = cfg.m * ((1U << cfg.m) - 1);
    return Pipeline(weights, population_stats(fused), key_bits, cfg.window);
  }

  void check_code(const RsCode& code) const {
    if (code.n_bits() != pipeline_.key_bits()) throw Error(Errc::ParameterMismatch, "code size differs from key size");
  }

  EvalConfig cfg_;
  std::vector<std::vector<Vector>> fused_;
  Pipeline pipeline_;
  std::vector<Enrolled> subjects_;
};

inline double gar(const EmbeddingDataset& dataset, const FusionWeights& weights, const EvalConfig& cfg, unsigned k) {
  return Evaluation(dataset, weights, cfg).gar(RsCode(Field(cfg.m), k));
}

inline double empirical_far(const EmbeddingDataset& dataset, const FusionWeights& weights, const EvalConfig& cfg,
                            unsigned k) {
  return Evaluation(dataset, weights, cfg).empirical_far(RsCode(Field(cfg.m), k), cfg.far_trials, cfg.seed);
}

struct GsCurvePoint {
  unsigned m = 0;
  unsigned k = 0;
  unsigned security_bits = 0;
  double rate = 0;
  double gar = 0;
  std::size_t enrolled = 0;
  double far_analytic = 0;
  std::optional<double> far_empirical;
  Scheme scheme = Scheme::SecureSketch;
  DecodePolicy policy = DecodePolicy::FallbackSystematic;
  Scenario scenario = Scenario::StolenKey;
  ImpostorSource impostors = ImpostorSource::Embeddings;
};

/// One G-S point per K. The FAR column is measured only when
/// cfg.far_trials > 0; each K uses its own trial stream derived from the seed.
/// GAR is NaN when no subject enrolls at that K.
inline std::vector<GsCurvePoint> run_gs_curve(const Evaluation& eval, const EvalConfig& cfg,
                                              std::span<const unsigned> k_list) {
  std::vector<GsCurvePoint> points;
  for (unsigned k : k_list) {
    const RsCode code(Field(cfg.m), k);
    GsCurvePoint p;
    p.m = cfg.m;
    p.k = k;
    p.security_bits = code.k_bits();
    p.rate = static_cast<double>(code.k_bits()) / code.n_bits();
    p.enrolled = eval.enrolled_count(code);
    p.gar = p.enrolled > 0 ? eval.gar(code) : std::numeric_limits<double>::quiet_NaN();
    p.far_analytic = std::ldexp(1.0, -static_cast<int>(code.k_bits()));
    if (cfg.far_trials > 0 && p.enrolled > 0) p.far_empirical = eval.empirical_far(code, cfg.far_trials, derive_seed(cfg.seed, k));
    p.scheme = cfg.scheme;
    p.policy = cfg.policy;
    p.scenario = cfg.scenario;
    p.impostors = cfg.impostors;
    points.push_back(p);
  }
  return points;
}

inline std::vector<GsCurvePoint> run_gs_curve(const EmbeddingDataset& dataset, const FusionWeights& weights,
                                              const EvalConfig& cfg, std::span<const unsigned> k_list) {
  return run_gs_curve(Evaluation(dataset, weights, cfg), cfg, k_list);
}

inline constexpr std::string_view kGsCsvHeader =
    "m,K,security_bits,rate,gar,far_analytic,far_empirical,scheme,policy,scenario";

/// CSV with the fixed header above. far_empirical is empty when not
/// measured; the scenario gets a "+uniform" suffix when impostor bits were
/// drawn uniformly instead of from embeddings.
inline std::string gs_curve_csv(std::span<const GsCurvePoint> points) {
  std::string out(kGsCsvHeader);
  out += '\n';
  char buf[256];
  for (const auto& p : points) {
    std::string far_emp;
    if (p.far_empirical) {
      std::snprintf(buf, sizeof buf, "%.6e", *p.far_empirical);
      far_emp = buf;
    }
    std::string scenario(to_string(p.scenario));
    if (p.impostors == ImpostorSource::UniformBits) scenario += "+uniform";
    std::snprintf(buf, sizeof buf, "%u,%u,%u,%.6f,%.6f,%.6e,%s,%s,%s,%s\n", p.m, p.k, p.security_bits, p.rate, p.gar,
                  p.far_analytic, far_emp.c_str(), std::string(to_string(p.scheme)).c_str(),
                  std::string(to_string(p.policy)).c_str(), scenario.c_str());
    out += buf;
  }
  return out;
}

}  // namespace biosketch
