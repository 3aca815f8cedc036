#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include <openssl/evp.h>

#include "biosketch/bits.hpp"
#include "biosketch/error.hpp"
#include "biosketch/rng.hpp"
#include "biosketch/rs.hpp"

namespace biosketch {

using Salt = std::array<std::uint8_t, 16>;
using Digest = std::array<std::uint8_t, 32>;

enum class Scheme { SecureSketch, FuzzyCommitment };

constexpr std::string_view to_string(Scheme s) noexcept { return s == Scheme::SecureSketch ? "ss" : "fc"; }

inline std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

inline std::vector<std::uint8_t> from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) throw Error(Errc::ParseError, "odd-length hex string");
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int hi = nibble(hex[2 * i]), lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(Errc::ParseError, "invalid hex digit");
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

inline Salt salt_from_seed(std::uint64_t seed) {
  Salt s{};
  Rng rng(seed);
  for (std::size_t i = 0; i < s.size(); i += 8) {
    const auto v = rng.next_u64();
    for (std::size_t j = 0; j < 8; ++j) s[i + j] = static_cast<std::uint8_t>(v >> (8 * j));
  }
  return s;
}

/// SHA-256 over salt || 8-byte big-endian bit count || bits packed MSB-first.
inline Digest hash_sketch(const BitVector& bits, const Salt& salt) {
  std::vector<std::uint8_t> buf(salt.begin(), salt.end());
  const std::uint64_t n = bits.size();
  for (int i = 7; i >= 0; --i) buf.push_back(static_cast<std::uint8_t>(n >> (8 * i)));
  const auto packed = bits.to_bytes();
  buf.insert(buf.end(), packed.begin(), packed.end());
  Digest d{};
  unsigned int len = 0;
  if (EVP_Digest(buf.data(), buf.size(), d.data(), &len, EVP_sha256(), nullptr) != 1 || len != d.size()) {
    throw Error(Errc::IoError, "SHA-256 computation failed");
  }
  return d;
}

/// Code and decoder parameters recorded with every enrollment.
struct CodeParams {
  unsigned m = 0;
  std::uint32_t primitive_poly = 0;
  unsigned k = 0;
  DecodePolicy policy = DecodePolicy::FallbackSystematic;

  static CodeParams of(const RsCode& code, DecodePolicy policy) {
    return {code.m(), code.field().primitive_poly(), code.k_symbols(), policy};
  }
  RsCode make_code() const { return RsCode(Field(m, primitive_poly), k); }

  friend bool operator==(const CodeParams&, const CodeParams&) = default;
};

/// The stored template. Holds only the salted hash of the sketch (or of the
/// random message) and, for fuzzy commitment, the codeword offset.
struct EnrollmentRecord {
  std::string subject_id;
  Scheme scheme = Scheme::SecureSketch;
  CodeParams params;
  Salt salt{};
  Digest digest{};
  std::optional<BitVector> offset;

  friend bool operator==(const EnrollmentRecord&, const EnrollmentRecord&) = default;
};

enum class DecisionReason { HashMatch, HashMismatch, DecodeFailure };

constexpr std::string_view to_string(DecisionReason r) noexcept {
  switch (r) {
    case DecisionReason::HashMatch: return "hash-match";
    case DecisionReason::HashMismatch: return "hash-mismatch";
    case DecisionReason::DecodeFailure: return "decode-failure";
  }
  return "?";
}

struct Decision {
  bool accepted = false;
  DecisionReason reason = DecisionReason::HashMismatch;

  static Decision from(DecisionReason r) { return {r == DecisionReason::HashMatch, r}; }
};

namespace detail {

inline void check_length(const BitVector& v, const RsCode& code) {
  if (v.size() != code.n_bits()) {
    throw Error(Errc::LengthMismatch, "reliable-bit vector has " + std::to_string(v.size()) + " bits, code needs " +
                                          std::to_string(code.n_bits()));
  }
}

inline void check_params(const EnrollmentRecord& rec, Scheme scheme, const RsCode& code) {
  if (rec.scheme != scheme) throw Error(Errc::ParameterMismatch, "record was enrolled with another scheme");
  if (rec.params.m != code.m() || rec.params.k != code.k_symbols() ||
      rec.params.primitive_poly != code.field().primitive_poly()) {
    throw Error(Errc::ParameterMismatch, "code parameters differ from the enrollment record");
  }
}

inline Decision compare(const DecodeOutcome& out, const RsCode& code, const EnrollmentRecord& rec) {
  if (!out.ok()) return Decision::from(DecisionReason::DecodeFailure);
  const auto digest = hash_sketch(symbols_to_bits(out.message, code.m()), rec.salt);
  return Decision::from(digest == rec.digest ? DecisionReason::HashMatch : DecisionReason::HashMismatch);
}

}  // namespace detail

/// Secure sketch enrollment: the sketch is the message part of the decoded
/// reliable bits (K*m bits). Only its salted hash is kept.
inline EnrollmentRecord enroll_ss(const BitVector& r_a, const RsCode& code, DecodePolicy policy, const Salt& salt,
                                  std::string subject_id = {}) {
  detail::check_length(r_a, code);
  const auto out = code.decode_bits(r_a, policy);
  if (!out.ok()) {
    throw Error(Errc::EnrollmentDecodeFailure, "reliable bits are farther than t from every codeword; re-enroll");
  }
  EnrollmentRecord rec;
  rec.subject_id = std::move(subject_id);
  rec.scheme = Scheme::SecureSketch;
  rec.params = CodeParams::of(code, policy);
  rec.salt = salt;
  rec.digest = hash_sketch(symbols_to_bits(out.message, code.m()), salt);
  return rec;
}

inline Decision auth_ss(const BitVector& r_b, const EnrollmentRecord& rec, const RsCode& code) {
  detail::check_params(rec, Scheme::SecureSketch, code);
  detail::check_length(r_b, code);
  return detail::compare(code.decode_bits(r_b, rec.params.policy), code, rec);
}

/// Fuzzy commitment: a random message is encoded and XOR-ed onto r_a; the
/// offset and the salted hash of the message are stored.
inline EnrollmentRecord enroll_fc(const BitVector& r_a, const RsCode& code, DecodePolicy policy,
                                  std::uint64_t rng_seed, const Salt& salt, std::string subject_id = {}) {
  detail::check_length(r_a, code);
  Rng rng(rng_seed);
  std::vector<Symbol> msg(code.k_symbols());
  for (auto& s : msg) s = static_cast<Symbol>(rng.below(code.field().size()));
  const auto c = symbols_to_bits(code.encode(msg), code.m());
  EnrollmentRecord rec;
  rec.subject_id = std::move(subject_id);
  rec.scheme = Scheme::FuzzyCommitment;
  rec.params = CodeParams::of(code, policy);
  rec.salt = salt;
  rec.digest = hash_sketch(symbols_to_bits(msg, code.m()), salt);
  rec.offset = c ^ r_a;
  return rec;
}

inline Decision auth_fc(const BitVector& r_b, const EnrollmentRecord& rec, const RsCode& code) {
  detail::check_params(rec, Scheme::FuzzyCommitment, code);
  detail::check_length(r_b, code);
  if (!rec.offset || rec.offset->size() != code.n_bits()) {
    throw Error(Errc::ParameterMismatch, "fuzzy-commitment record lacks a valid offset");
  }
  return detail::compare(code.decode_bits(*rec.offset ^ r_b, rec.params.policy), code, rec);
}

inline Decision auth_fc(const BitVector& r_b, const EnrollmentRecord& rec) {
  return auth_fc(r_b, rec, rec.params.make_code());
}

inline Decision authenticate(const BitVector& r_b, const EnrollmentRecord& rec, const RsCode& code) {
  return rec.scheme == Scheme::SecureSketch ? auth_ss(r_b, rec, code) : auth_fc(r_b, rec, code);
}

// Record file:
//
//   biosketch-record 1
//   subject_id <id>
//   scheme <ss|fc>
//   m <int>
//   poly <int, decimal>
//   K <int>
//   policy <fail-deny|fallback>
//   salt <32 hex digits>
//   digest <64 hex digits>
//   offset <hex, m*N bits packed MSB-first, zero-padded>   (fc only)
inline std::string serialize_record(const EnrollmentRecord& rec) {
  std::ostringstream out;
  out << "biosketch-record 1\n"
      << "subject_id " << rec.subject_id << '\n'
      << "scheme " << to_string(rec.scheme) << '\n'
      << "m " << rec.params.m << '\n'
      << "poly " << rec.params.primitive_poly << '\n'
      << "K " << rec.params.k << '\n'
      << "policy " << to_string(rec.params.policy) << '\n'
      << "salt " << to_hex(rec.salt) << '\n'
      << "digest " << to_hex(rec.digest) << '\n';
  if (rec.offset) out << "offset " << to_hex(rec.offset->to_bytes()) << '\n';
  return out.str();
}

inline EnrollmentRecord parse_record(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != "biosketch-record 1") throw Error(Errc::ParseError, "not a biosketch record");
  std::map<std::string, std::string> fields;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    if (sp == std::string::npos) throw Error(Errc::ParseError, "record line without value: " + line);
    if (!fields.emplace(line.substr(0, sp), line.substr(sp + 1)).second) {
      throw Error(Errc::ParseError, "duplicate record field " + line.substr(0, sp));
    }
  }
  auto take = [&](const std::string& key) {
    auto it = fields.find(key);
    if (it == fields.end()) throw Error(Errc::ParseError, "record lacks field " + key);
    std::string v = std::move(it->second);
    fields.erase(it);
    return v;
  };
  auto number = [&](const std::string& key) {
    const std::string v = take(key);
    unsigned long value = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), value);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw Error(Errc::ParseError, "bad number for " + key);
    return value;
  };
  EnrollmentRecord rec;
  rec.subject_id = take("subject_id");
  const auto scheme = take("scheme");
  if (scheme == "ss") rec.scheme = Scheme::SecureSketch;
  else if (scheme == "fc") rec.scheme = Scheme::FuzzyCommitment;
  else throw Error(Errc::ParseError, "unknown scheme " + scheme);
  rec.params.m = static_cast<unsigned>(number("m"));
  rec.params.primitive_poly = static_cast<std::uint32_t>(number("poly"));
  rec.params.k = static_cast<unsigned>(number("K"));
  const auto policy = take("policy");
  if (policy == "fail-deny") rec.params.policy = DecodePolicy::FailDeny;
  else if (policy == "fallback") rec.params.policy = DecodePolicy::FallbackSystematic;
  else throw Error(Errc::ParseError, "unknown policy " + policy);
  const auto salt = from_hex(take("salt"));
  const auto digest = from_hex(take("digest"));
  if (salt.size() != rec.salt.size() || digest.size() != rec.digest.size()) {
    throw Error(Errc::ParseError, "salt or digest has the wrong length");
  }
  std::copy(salt.begin(), salt.end(), rec.salt.begin());
  std::copy(digest.begin(), digest.end(), rec.digest.begin());
  if (rec.params.m < kMinSymbolBits || rec.params.m > kMaxSymbolBits) throw Error(Errc::ParseError, "m out of range");
  const std::size_t n_bits = rec.params.m * ((std::size_t{1} << rec.params.m) - 1);
  if (rec.scheme == Scheme::FuzzyCommitment) {
    const auto bytes = from_hex(take("offset"));
    if (bytes.size() != (n_bits + 7) / 8) throw Error(Errc::ParseError, "offset has the wrong length");
    rec.offset = BitVector::from_bytes(bytes, n_bits);
  }
  if (!fields.empty()) throw Error(Errc::ParseError, "unexpected record field " + fields.begin()->first);
  return rec;
}

}  // namespace biosketch
