#include <gtest/gtest.h>

#include <filesystem>

#include "biosketch/pipeline.hpp"
#include "biosketch/store.hpp"

using namespace biosketch;
namespace fs = std::filesystem;

namespace {

class StoreTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("biosketch_store_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  EnrollmentRecord record(const std::string& id, Scheme scheme = Scheme::SecureSketch) {
    const RsCode code(Field(5), 20);
    BitVector r_a(155);
    for (std::size_t i = 0; i < 155; i += 3) r_a.set(i, true);
    const auto secrets = fresh_secrets(1, id);
    return seal(r_a, code, scheme, DecodePolicy::FallbackSystematic, secrets, id);
  }

  fs::path root_;
};

}  // namespace

TEST_F(StoreTest, RecordRoundTrip) {
  const TemplateDb db(root_ / "templates");
  for (auto scheme : {Scheme::SecureSketch, Scheme::FuzzyCommitment}) {
    const std::string id = scheme == Scheme::SecureSketch ? "alice" : "bob";
    const auto rec = record(id, scheme);
    db.save(id, rec);
    EXPECT_EQ(db.load(id), rec);
    EXPECT_TRUE(fs::exists(root_ / "templates" / (id + ".rec")));
  }
}

TEST_F(StoreTest, KeyRoundTrip) {
  const KeyStore keys(root_ / "keys");
  const auto key = select_reliable(Vector(300, 0.5), 155, 42);
  keys.save("alice", key);
  EXPECT_EQ(keys.load("alice"), key);
  EXPECT_TRUE(fs::exists(root_ / "keys" / "alice.key"));
}

TEST_F(StoreTest, NotFound) {
  const TemplateDb db(root_ / "templates");
  const KeyStore keys(root_ / "keys");
  try {
    db.load("nobody");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotFound);
  }
  EXPECT_THROW(keys.load("nobody"), Error);
}

TEST_F(StoreTest, DuplicateSubject) {
  const TemplateDb db(root_ / "templates");
  db.save("alice", record("alice"));
  try {
    db.save("alice", record("alice"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DuplicateSubject);
  }
  EXPECT_NO_THROW(db.save("alice", record("alice"), true));
}

TEST_F(StoreTest, RejectsPathLikeIds) {
  const TemplateDb db(root_ / "templates");
  EXPECT_THROW(db.load("../etc/passwd"), Error);
  EXPECT_THROW(db.load(""), Error);
  EXPECT_THROW(db.load(".hidden"), Error);
  EXPECT_THROW(db.save("other", record("alice")), Error);
}

TEST_F(StoreTest, RevokeDeletesBoth) {
  const TemplateDb db(root_ / "templates");
  const KeyStore keys(root_ / "keys");
  db.save("alice", record("alice"));
  keys.save("alice", select_reliable(Vector(300, 0.5), 155, 42));
  revoke(db, keys, "alice");
  EXPECT_THROW(db.load("alice"), Error);
  EXPECT_THROW(keys.load("alice"), Error);
  try {
    revoke(db, keys, "alice");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotFound);
  }
  try {
    revoke(db, keys, "unknown");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotFound);
  }
}

TEST_F(StoreTest, ReEnrollmentAfterRevokeUsesFreshSecrets) {
  const TemplateDb db(root_ / "templates");
  const KeyStore keys(root_ / "keys");
  // Equal scores: the key is decided by the nonce alone. C(300,155) is
  // astronomically large, so distinct nonces give distinct keys.
  const Vector scores(300, 0.5);
  const auto first = fresh_secrets(7, "alice", keys.revoked("alice"));
  const auto key1 = select_reliable(scores, 155, first.nonce, 2.0);
  keys.save("alice", key1);
  BitVector r_a(155);
  db.save("alice", seal(r_a, RsCode(Field(5), 20), Scheme::SecureSketch, DecodePolicy::FallbackSystematic, first,
                        "alice"));
  revoke(db, keys, "alice");

  const auto revoked = keys.revoked("alice");
  EXPECT_TRUE(revoked.nonces.count(first.nonce));
  EXPECT_TRUE(revoked.salts.count(to_hex(first.salt)));
  const auto second = fresh_secrets(7, "alice", revoked);
  EXPECT_NE(second.nonce, first.nonce);
  EXPECT_NE(second.salt, first.salt);
  EXPECT_NE(select_reliable(scores, 155, second.nonce, 2.0).indices, key1.indices);
}

TEST_F(StoreTest, TemplateDbHoldsNoKeyOrBits) {
  const TemplateDb db(root_ / "templates");
  const KeyStore keys(root_ / "keys");
  const auto rec = record("alice");
  const auto key = select_reliable(Vector(300, 0.5), 155, 42);
  db.save("alice", rec);
  keys.save("alice", key);
  EXPECT_NE(db.dir(), keys.dir());
  for (const auto& entry : fs::directory_iterator(db.dir())) {
    const auto text = detail::read_file(entry.path());
    EXPECT_EQ(text.find("nonce"), std::string::npos);
    // Only the documented record fields appear.
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      const auto name = line.substr(0, line.find(' '));
      EXPECT_TRUE(name == "subject_id" || name == "scheme" || name == "m" || name == "poly" || name == "K" ||
                  name == "policy" || name == "salt" || name == "digest" || name == "offset")
          << name;
    }
  }
}

TEST_F(StoreTest, WriteFileRelativeToCwd) {
  fs::create_directories(root_);
  const auto old = fs::current_path();
  fs::current_path(root_);
  detail::write_file("plain.txt", "abc");
  EXPECT_EQ(detail::read_file("plain.txt"), "abc");
  fs::current_path(old);
}
