#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <utility>

#include "biosketch/error.hpp"
#include "biosketch/quantizer.hpp"
#include "biosketch/sketch.hpp"

namespace biosketch {

namespace detail {

inline void check_subject_id(std::string_view id) {
  const bool ok = !id.empty() && id.size() <= 128 && id.front() != '.' &&
                  id.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789._-") ==
                      std::string_view::npos;
  if (!ok) throw Error(Errc::InvalidParams, "invalid subject id '" + std::string(id) + "'");
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Write-to-temp then rename, so readers never see a half-written file.
inline void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::error_code ec;
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(Errc::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + tmp.string());
    out << contents;
    if (!out.flush()) throw Error(Errc::IoError, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::IoError, "cannot rename into " + path.string() + ": " + ec.message());
}

/// One file per subject under a directory: <dir>/<subject_id><extension>.
class FlatStore {
 public:
  FlatStore(std::filesystem::path dir, std::string extension) : dir_(std::move(dir)), ext_(std::move(extension)) {}

  const std::filesystem::path& dir() const noexcept { return dir_; }

  std::filesystem::path path_for(std::string_view id) const {
    check_subject_id(id);
    return dir_ / (std::string(id) + ext_);
  }

  bool contains(std::string_view id) const { return std::filesystem::exists(path_for(id)); }

  void put(std::string_view id, const std::string& contents, bool overwrite) const {
    const auto path = path_for(id);
    if (!overwrite && std::filesystem::exists(path)) {
      throw Error(Errc::DuplicateSubject, "subject " + std::string(id) + " already stored in " + dir_.string());
    }
    write_file(path, contents);
  }

  std::string get(std::string_view id) const {
    const auto path = path_for(id);
    if (!std::filesystem::exists(path)) throw Error(Errc::NotFound, "no entry for subject " + std::string(id));
    return read_file(path);
  }

  void erase(std::string_view id) const {
    const auto path = path_for(id);
    std::error_code ec;
    if (!std::filesystem::remove(path, ec)) {
      if (ec) throw Error(Errc::IoError, "cannot remove " + path.string() + ": " + ec.message());
      throw Error(Errc::NotFound, "no entry for subject " + std::string(id));
    }
  }

 private:
  std::filesystem::path dir_;
  std::string ext_;
};

}  // namespace detail

/// Template database: templates/<subject_id>.rec. Holds enrollment records
/// only; keys live in a separate KeyStore.
class TemplateDb {
 public:
  explicit TemplateDb(std::filesystem::path dir) : files_(std::move(dir), ".rec") {}

  const std::filesystem::path& dir() const noexcept { return files_.dir(); }
  bool contains(std::string_view id) const { return files_.contains(id); }

  void save(std::string_view id, const EnrollmentRecord& rec, bool overwrite = false) const {
    if (rec.subject_id != id) throw Error(Errc::InvalidParams, "record subject id differs from storage id");
    files_.put(id, serialize_record(rec), overwrite);
  }

  EnrollmentRecord load(std::string_view id) const { return parse_record(files_.get(id)); }

  void erase(std::string_view id) const { files_.erase(id); }

 private:
  detail::FlatStore files_;
};

/// Matcher-local key store: keys/<subject_id>.key, plus keys/<subject_id>.revoked
/// listing the nonces and salts of revoked enrollments so they are never
/// reissued.
class KeyStore {
 public:
  explicit KeyStore(std::filesystem::path dir) : files_(std::move(dir), ".key"), revoked_(files_.dir(), ".revoked") {}

  const std::filesystem::path& dir() const noexcept { return files_.dir(); }
  bool contains(std::string_view id) const { return files_.contains(id); }

  void save(std::string_view id, const ReliableKey& key, bool overwrite = false) const {
    files_.put(id, serialize_key(key), overwrite);
  }

  ReliableKey load(std::string_view id) const { return parse_key(files_.get(id)); }

  void erase(std::string_view id) const { files_.erase(id); }

  struct Revoked {
    std::set<std::uint64_t> nonces;
    std::set<std::string> salts;  // hex
  };

  Revoked revoked(std::string_view id) const {
    Revoked out;
    if (!revoked_.contains(id)) return out;
    std::istringstream in(revoked_.get(id));
    std::string word, value;
    while (in >> word >> value) {
      if (word == "nonce") out.nonces.insert(std::stoull(value));
      else if (word == "salt") out.salts.insert(value);
      else throw Error(Errc::ParseError, "bad revocation entry '" + word + "'");
    }
    return out;
  }

  void record_revocation(std::string_view id, std::optional<std::uint64_t> nonce, std::optional<Salt> salt) const {
    std::string log = revoked_.contains(id) ? revoked_.get(id) : std::string{};
    if (nonce) log += "nonce " + std::to_string(*nonce) + "\n";
    if (salt) log += "salt " + to_hex(*salt) + "\n";
    revoked_.put(id, log, true);
  }

 private:
  detail::FlatStore files_;
  detail::FlatStore revoked_;
};

/// Deletes a subject's record and key, remembering the nonce and salt so a
/// later enrollment must use fresh ones.
inline void revoke(const TemplateDb& db, const KeyStore& keys, std::string_view id) {
  const bool has_record = db.contains(id);
  const bool has_key = keys.contains(id);
  if (!has_record && !has_key) throw Error(Errc::NotFound, "subject " + std::string(id) + " is not enrolled");
  std::optional<std::uint64_t> nonce;
  std::optional<Salt> salt;
  if (has_key) nonce = keys.load(id).nonce;
  if (has_record) salt = db.load(id).salt;
  keys.record_revocation(id, nonce, salt);
  if (has_record) db.erase(id);
  if (has_key) keys.erase(id);
}

}  // namespace biosketch
