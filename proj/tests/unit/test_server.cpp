#include <gtest/gtest.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <thread>

#include "test_util.hpp"
#include "voicesearch/common/error.hpp"
#include "voicesearch/common/files.hpp"
#include "voicesearch/matching/distance.hpp"
#include "voicesearch/ringhe/serialize.hpp"
#include "voicesearch/server/api.hpp"
#include "voicesearch/server/store.hpp"

using namespace voicesearch;
using namespace voicesearch::server;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return Errc::io;
}

NewRecord make_record(const std::string& device, double fill, RandomSource& rng, std::size_t blob_bytes = 100) {
  const auto& k = vs_test::shared_keys();
  mfcc::FeatureVector v{};
  v.fill(fill);
  NewRecord r;
  r.device_id = device;
  r.meta = {{"duration_ms", "1000"}};
  Bytes data(blob_bytes);
  rng.fill(data);
  r.blob = blobcrypt::seal(k.blob_key, data, blobcrypt::Nonce::from_counter(1, rng.next_u64() | 1), k.key_id);
  r.features = matching::encrypt_features(k.he.pub, v, rng);
  return r;
}

std::string tree_hash(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) all += f.string() + "\n" + sha256_hex(read_file(f)) + "\n";
  return sha256_hex(as_bytes(all));
}

struct StoreFixture : ::testing::Test {
  vs_test::TempDir tmp;
  fs::path dir = tmp / "store";
  SeededRandom rng{31};
  void SetUp() override { VoiceStore::create(dir, ringhe::HeParams::defaults()); }
};

// Every indexed record must load completely.
void expect_store_consistent(const fs::path& dir) {
  VoiceStore store(dir);
  const auto& k = vs_test::shared_keys();
  SeededRandom rng(1);
  const auto q = matching::encrypt_features(k.he.pub, mfcc::FeatureVector{}, rng);
  const auto results = store.query(q);
  EXPECT_EQ(results.size(), store.size());
  std::vector<std::string> ids;
  for (const auto& s : store.list()) ids.push_back(s.record_id);
  for (const auto& b : store.fetch_blobs(ids)) {
    ASSERT_TRUE(b.blob.has_value());
    EXPECT_NO_THROW(blobcrypt::open(k.blob_key, *b.blob));
  }
  std::size_t files = 0;
  for (const auto& sub : {"records", "blobs"})
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / sub)) ++files;
  EXPECT_EQ(files, 2 * store.size());
}

}  // namespace

TEST_F(StoreFixture, EmptyStore) {
  VoiceStore store(dir);
  EXPECT_TRUE(store.list().empty());
  const auto& k = vs_test::shared_keys();
  EXPECT_TRUE(store.query(matching::encrypt_features(k.he.pub, mfcc::FeatureVector{}, rng)).empty());
  EXPECT_TRUE(store.fetch_blobs({}).empty());
}

TEST_F(StoreFixture, CreateTwiceFails) {
  EXPECT_EQ(code_of([&] { VoiceStore::create(dir, ringhe::HeParams::defaults()); }), Errc::storage_failure);
}

TEST_F(StoreFixture, PutListDistinctIds) {
  VoiceStore store(dir);
  const auto a = store.put(make_record("kitchen", 1.0, rng));
  const auto b = store.put(make_record("kitchen", 2.0, rng));
  EXPECT_NE(a, b);
  EXPECT_EQ(a.size(), 32u);
  const auto listed = store.list();
  ASSERT_EQ(listed.size(), 2u);
  EXPECT_TRUE(listed[0].record_id == a || listed[1].record_id == a);
}

TEST_F(StoreFixture, FilterByDeviceAndTime) {
  std::vector<Timestamp> times = {Timestamp(std::chrono::milliseconds(3000)),
                                  Timestamp(std::chrono::milliseconds(1000)),
                                  Timestamp(std::chrono::milliseconds(2000))};
  std::size_t next = 0;
  StoreOptions opts;
  opts.clock = [&] { return times[next++]; };
  VoiceStore store(dir, opts);
  const auto id0 = store.put(make_record("kitchen", 1.0, rng));
  const auto id1 = store.put(make_record("bedroom", 1.0, rng));
  const auto id2 = store.put(make_record("kitchen", 1.0, rng));

  const auto all = store.list();
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[0].record_id, id1);
  EXPECT_EQ(all[1].record_id, id2);
  EXPECT_EQ(all[2].record_id, id0);

  RecordFilter kitchen;
  kitchen.device_id = "kitchen";
  const auto k = store.list(kitchen);
  ASSERT_EQ(k.size(), 2u);
  EXPECT_EQ(k[0].record_id, id2);

  RecordFilter window;
  window.from = times[2];
  window.to = times[2];
  const auto w = store.list(window);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].record_id, id2);

  // Survives reopen with the same order and timestamps.
  VoiceStore reopened(dir);
  EXPECT_EQ(reopened.list(), all);
}

TEST_F(StoreFixture, QueryReportsEveryRecordInIdOrder) {
  VoiceStore store(dir);
  const auto& k = vs_test::shared_keys();
  const auto self = make_record("d", 1.5, rng);
  const auto self_features = self.features;
  const auto self_id = store.put(self);
  store.put(make_record("d", -2.0, rng));
  const auto results = store.query(self_features);
  ASSERT_EQ(results.size(), 2u);
  EXPECT_LT(results[0].record_id, results[1].record_id);
  for (const auto& r : results) {
    const double d = matching::decrypt_distance(k.he.secret, r.distance);
    if (r.record_id == self_id) {
      EXPECT_EQ(d, 0.0);
    } else {
      mfcc::FeatureVector a{}, b{};
      a.fill(1.5);
      b.fill(-2.0);
      EXPECT_EQ(d, double(matching::plaintext_distance(a, b, 16)) / 256.0);
    }
  }
}

TEST_F(StoreFixture, QueryIsReadOnly) {
  {
    VoiceStore store(dir);
    store.put(make_record("d", 1.0, rng));
  }
  const auto before = tree_hash(dir);
  VoiceStore store(dir);
  const auto& k = vs_test::shared_keys();
  store.query(matching::encrypt_features(k.he.pub, mfcc::FeatureVector{}, rng));
  store.list();
  EXPECT_EQ(tree_hash(dir), before);
}

TEST_F(StoreFixture, FetchBlobsPerIdErrors) {
  VoiceStore store(dir);
  const auto rec = make_record("d", 1.0, rng, 5000);
  const auto sealed = rec.blob;
  const auto id = store.put(rec);
  const std::vector<std::string> ids = {id, "0123456789abcdef0123456789abcdef", "../../etc/passwd"};
  const auto out = store.fetch_blobs(ids);
  ASSERT_EQ(out.size(), 3u);
  ASSERT_TRUE(out[0].blob.has_value());
  EXPECT_EQ(*out[0].blob, sealed);
  EXPECT_EQ(out[1].error, Errc::unknown_record);
  EXPECT_EQ(out[2].error, Errc::unknown_record);
}

TEST_F(StoreFixture, MalformedRecords) {
  VoiceStore store(dir);
  auto r = make_record("d", 1.0, rng);
  r.features.pop_back();
  EXPECT_EQ(code_of([&] { store.put(r); }), Errc::malformed_record);
  r = make_record("", 1.0, rng);
  EXPECT_EQ(code_of([&] { store.put(r); }), Errc::malformed_record);
  EXPECT_EQ(store.size(), 0u);
}

TEST_F(StoreFixture, ForeignParamsRejected) {
  VoiceStore store(dir);
  SeededRandom r2(3);
  auto small = ringhe::keygen(ringhe::HeContext::create(ringhe::HeParams::two_term_ring()), r2);
  const auto foreign = matching::encrypt_features(small.pub, mfcc::FeatureVector{}, r2);
  EXPECT_EQ(code_of([&] { store.query(foreign); }), Errc::param_mismatch);
}

TEST_F(StoreFixture, OrphansRemovedOnOpen) {
  fs::create_directories(dir / "records");
  write_file_atomic(dir / "records" / "ffffffffffffffffffffffffffffffff.json", std::string_view("{"));
  write_file_atomic(dir / "blobs" / "ffffffffffffffffffffffffffffffff.bin", std::string_view("x"));
  write_file_atomic(dir / "index.json.tmp.123", std::string_view("x"));
  VoiceStore store(dir);
  EXPECT_EQ(store.size(), 0u);
  EXPECT_FALSE(fs::exists(dir / "records" / "ffffffffffffffffffffffffffffffff.json"));
  EXPECT_FALSE(fs::exists(dir / "blobs" / "ffffffffffffffffffffffffffffffff.bin"));
  EXPECT_FALSE(fs::exists(dir / "index.json.tmp.123"));
}

TEST_F(StoreFixture, CrashAtEachStageLeavesZeroOrOneCopy) {
  const auto record = make_record("d", 1.0, rng);
  for (const std::string stage : {"blob", "record", "index"}) {
    vs_test::TempDir t2;
    const fs::path d2 = t2 / "store";
    VoiceStore::create(d2, ringhe::HeParams::defaults());
    const pid_t pid = fork();
    ASSERT_GE(pid, 0);
    if (pid == 0) {
      StoreOptions opts;
      opts.after_write = [&](std::string_view s) {
        if (s == stage) _exit(0);
      };
      VoiceStore store(d2, opts);
      store.put(record);
      _exit(3);
    }
    int status = 0;
    waitpid(pid, &status, 0);
    ASSERT_TRUE(WIFEXITED(status));
    ASSERT_EQ(WEXITSTATUS(status), 0) << stage;
    VoiceStore reopened(d2);
    EXPECT_EQ(reopened.size(), stage == "index" ? 1u : 0u) << stage;
    expect_store_consistent(d2);
  }
}

TEST_F(StoreFixture, RandomKillDuringPuts) {
  std::vector<NewRecord> records;
  for (int i = 0; i < 3; ++i) records.push_back(make_record("d", double(i), rng, 20000));
  std::mt19937_64 delays(5);
  for (int trial = 0; trial < 6; ++trial) {
    vs_test::TempDir t2;
    const fs::path d2 = t2 / "store";
    VoiceStore::create(d2, ringhe::HeParams::defaults());
    const pid_t pid = fork();
    ASSERT_GE(pid, 0);
    if (pid == 0) {
      VoiceStore store(d2);
      for (int i = 0;; ++i) store.put(records[static_cast<std::size_t>(i) % records.size()]);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20 + delays() % 400));
    kill(pid, SIGKILL);
    int status = 0;
    waitpid(pid, &status, 0);
    expect_store_consistent(d2);
  }
}

TEST_F(StoreFixture, ApiRoutesAndErrors) {
  VoiceStore store(dir);
  ServerApi api(store);
  const auto& k = vs_test::shared_keys();
  auto call = [&](std::string method, std::string path, std::string body = {},
                  std::map<std::string, std::string> q = {}) {
    return net::dispatch_safely(api.handler(), {std::move(method), std::move(path), std::move(q), std::move(body)});
  };

  auto resp = call("GET", "/v1/params");
  EXPECT_EQ(resp.status, 200);
  EXPECT_EQ(ringhe::params_from_json(json::parse(resp.body)), ringhe::HeParams::defaults());

  const auto rec = make_record("kitchen", 1.0, rng);
  json body{{"device_id", rec.device_id},
            {"meta", rec.meta},
            {"params", ringhe::params_to_json(k.context->params())},
            {"blob", sealed_blob_to_json(rec.blob)},
            {"features", features_to_json(rec.features)}};
  resp = call("POST", "/v1/records", body.dump());
  ASSERT_EQ(resp.status, 201) << resp.body;
  const std::string id = json::parse(resp.body).at("record_id");

  resp = call("GET", "/v1/records", {}, {{"device_id", "kitchen"}});
  EXPECT_EQ(json::parse(resp.body).at("records").size(), 1u);
  EXPECT_EQ(json::parse(resp.body).at("records")[0].at("record_id"), id);
  resp = call("GET", "/v1/records", {}, {{"device_id", "bedroom"}});
  EXPECT_TRUE(json::parse(resp.body).at("records").empty());
  EXPECT_EQ(resp.body.find("features"), std::string::npos);

  resp = call("POST", "/v1/blobs:fetch", json{{"ids", {id, "nope"}}}.dump());
  const auto blobs = json::parse(resp.body).at("blobs");
  EXPECT_EQ(sealed_blob_from_json(blobs[0]), rec.blob);
  EXPECT_EQ(blobs[1].at("error"), "unknown_record");

  resp = call("POST", "/v1/query", json{{"features", features_to_json(rec.features)}}.dump());
  ASSERT_EQ(resp.status, 200);
  const auto results = json::parse(resp.body).at("results");
  ASSERT_EQ(results.size(), 1u);
  const auto dist = ringhe::ciphertext_from_json(results[0].at("distance"), k.context);
  EXPECT_EQ(matching::decrypt_distance(k.he.secret, dist), 0.0);

  auto bad_params = ringhe::params_to_json(ringhe::HeParams::two_term_ring());
  resp = call("POST", "/v1/query", json{{"params", bad_params}, {"features", json::array()}}.dump());
  EXPECT_EQ(resp.status, 409);
  EXPECT_EQ(json::parse(resp.body).at("error").at("code"), "param_mismatch");

  resp = call("POST", "/v1/records", "{not json");
  EXPECT_EQ(resp.status, 400);
  resp = call("POST", "/v1/records", json{{"device_id", "x"}}.dump());
  EXPECT_EQ(json::parse(resp.body).at("error").at("code"), "malformed_record");
  resp = call("GET", "/v1/nothing");
  EXPECT_EQ(resp.status, 404);
  resp = call("GET", "/v1/records", {}, {{"from", "garbage"}});
  EXPECT_EQ(resp.status, 400);
}

TEST_F(StoreFixture, LogsCarryNoCiphertext) {
  VoiceStore store(dir);
  std::vector<std::string> lines;
  ServerApi api(store, [&](std::string_view l) { lines.emplace_back(l); });
  const auto& k = vs_test::shared_keys();
  const auto rec = make_record("kitchen", 1.0, rng);
  json body{{"device_id", "kitchen"},
            {"blob", sealed_blob_to_json(rec.blob)},
            {"features", features_to_json(rec.features)}};
  api.handle({"POST", "/v1/records", {}, body.dump()});
  api.handle({"POST", "/v1/query", {}, json{{"features", features_to_json(rec.features)}}.dump()});
  ASSERT_EQ(lines.size(), 2u);
  const std::string some_coeff = ringhe::to_decimal(rec.features[0].coefficients()[0][0]);
  for (const auto& l : lines) {
    EXPECT_LT(l.size(), 200u);
    EXPECT_EQ(l.find(some_coeff), std::string::npos);
    EXPECT_EQ(l.find(base64_encode(rec.blob.ciphertext).substr(0, 16)), std::string::npos);
  }
  (void)k;
}
