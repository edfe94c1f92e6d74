#include <gtest/gtest.h>

#include "test_util.hpp"
#include "voicesearch/caregiver/caregiver_client.hpp"
#include "voicesearch/caregiver/ui_api.hpp"
#include "voicesearch/common/bytes.hpp"
#include "voicesearch/common/error.hpp"
#include "voicesearch/common/files.hpp"
#include "voicesearch/device/device_client.hpp"
#include "voicesearch/matching/distance.hpp"
#include "voicesearch/server/api.hpp"

using namespace voicesearch;
using namespace voicesearch::caregiver;
using matching::MatchClass;
using matching::Thresholds;
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

Label lab(std::string word, std::string mood, std::string bg = "quiet") {
  return {std::move(word), std::move(mood), std::move(bg), ""};
}

// Server, one device and one caregiver wired through in-process transports.
struct Home : ::testing::Test {
  vs_test::TempDir tmp;
  SeededRandom rng{99};
  std::unique_ptr<server::VoiceStore> store;
  std::unique_ptr<server::ServerApi> api;
  std::unique_ptr<net::HandlerTransport> inner;
  std::unique_ptr<vs_test::RecordingTransport> transport;
  std::unique_ptr<device::DeviceClient> device;
  std::unique_ptr<LabelStore> labels;
  std::unique_ptr<CaregiverClient> care;

  void SetUp() override {
    server::VoiceStore::create(tmp / "store", ringhe::HeParams::defaults());
    store = std::make_unique<server::VoiceStore>(tmp / "store");
    api = std::make_unique<server::ServerApi>(*store);
    inner = std::make_unique<net::HandlerTransport>(api->handler());
    transport = std::make_unique<vs_test::RecordingTransport>(*inner);
    device::DeviceConfig dc;
    dc.device_id = "kitchen";
    dc.key_file = tmp / "keys.json";
    device = std::make_unique<device::DeviceClient>(dc, vs_test::shared_keys(), *inner, rng);
    labels = std::make_unique<LabelStore>(tmp / "care" / "labels.json");
    care = std::make_unique<CaregiverClient>(vs_test::shared_keys(), *transport, *labels, rng);
  }

  std::string add(const std::string& name, const audio::AudioClip& clip) {
    const fs::path p = tmp / name;
    write_file_atomic(p, audio::write_wav(clip));
    return device->ingest(p);
  }
};

}  // namespace

TEST(TrueClass, FromLabels) {
  EXPECT_EQ(true_class(lab("help", "calm"), lab("help", "calm", "noisy")), MatchClass::same_word_same_mood);
  EXPECT_EQ(true_class(lab("help", "calm"), lab("help", "excited")), MatchClass::same_word_different_mood);
  EXPECT_EQ(true_class(lab("help", "calm"), lab("water", "calm")), MatchClass::different_word);
}

TEST(TrainingSplit, MatchesSha256Oracle) {
  EXPECT_TRUE(in_training_split("a", "b"));
  EXPECT_TRUE(in_training_split("b", "a"));
  EXPECT_FALSE(in_training_split("r1", "r2"));
  EXPECT_TRUE(in_training_split("r2", "r3"));
}

TEST(Evaluate, HandComputedCounts) {
  const Label A = lab("w1", "m1", "quiet"), B = lab("w1", "m1", "noisy"), C = lab("w1", "m2", "quiet"),
              D = lab("w2", "m1", "quiet");
  const std::vector<LabeledPair> pairs = {
      {"A", "B", 1, A, B},  {"A", "C", 5, A, C},  {"A", "D", 20, A, D},
      {"B", "C", 12, B, C}, {"B", "D", 8, B, D},  {"C", "D", 30, C, D},
  };
  const auto r = evaluate_pairs(pairs, Thresholds{2, 10});
  EXPECT_FALSE(r.thresholds_learned);
  EXPECT_EQ(r.test_pairs, 6u);
  EXPECT_DOUBLE_EQ(r.three_class_accuracy, 4.0 / 6.0);
  ASSERT_EQ(r.rows.size(), 4u);

  EXPECT_EQ(r.rows[0].similarity_level, "same_mood");
  EXPECT_DOUBLE_EQ(*r.rows[0].values.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(*r.rows[0].values.sensitivity, 1.0);
  EXPECT_DOUBLE_EQ(*r.rows[0].values.specificity, 1.0);

  EXPECT_EQ(r.rows[1].similarity_level, "different_mood");
  EXPECT_DOUBLE_EQ(*r.rows[1].values.accuracy, 4.0 / 6.0);
  EXPECT_DOUBLE_EQ(*r.rows[1].values.sensitivity, 0.5);
  EXPECT_DOUBLE_EQ(*r.rows[1].values.specificity, 0.75);

  EXPECT_EQ(r.rows[2].similarity_level, "different_background");
  EXPECT_DOUBLE_EQ(*r.rows[2].values.accuracy, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(*r.rows[2].values.sensitivity, 0.0);
  EXPECT_DOUBLE_EQ(*r.rows[2].values.specificity, 0.5);

  EXPECT_EQ(r.rows[3].similarity_level, "same_word");
  EXPECT_DOUBLE_EQ(*r.rows[3].values.accuracy, 4.0 / 6.0);
  EXPECT_DOUBLE_EQ(*r.rows[3].values.sensitivity, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(*r.rows[3].values.specificity, 2.0 / 3.0);

  // Sweep is monotone and spans both extremes.
  ASSERT_FALSE(r.sweep.empty());
  EXPECT_EQ(r.sweep.front().sensitivity, 0.0);
  EXPECT_EQ(r.sweep.front().specificity, 1.0);
  EXPECT_EQ(r.sweep.back().sensitivity, 1.0);
  EXPECT_EQ(r.sweep.back().specificity, 0.0);
  for (std::size_t i = 1; i < r.sweep.size(); ++i) {
    EXPECT_GE(r.sweep[i].sensitivity, r.sweep[i - 1].sensitivity);
    EXPECT_LE(r.sweep[i].specificity, r.sweep[i - 1].specificity);
  }
}

TEST(Evaluate, DuplicatesAreSameMood) {
  const Label a = lab("help", "calm");
  const std::vector<LabeledPair> pairs = {{"x", "y", 0, a, a}, {"x", "z", 0, a, a}, {"y", "z", 0, a, a}};
  const auto r = evaluate_pairs(pairs, Thresholds{0, 0});
  EXPECT_EQ(r.three_class_accuracy, 1.0);
  EXPECT_FALSE(r.rows[0].values.specificity.has_value());
  EXPECT_EQ(*r.rows[0].values.sensitivity, 1.0);
}

TEST(Evaluate, SeparableClustersLearnPerfectly) {
  std::vector<std::pair<std::string, Label>> recs;
  for (const std::string w : {"help", "water", "happy"})
    for (const std::string m : {"calm", "excited"})
      for (int t = 0; t < 3; ++t) recs.emplace_back(w + m + std::to_string(t), lab(w, m));
  std::vector<LabeledPair> pairs;
  for (std::size_t i = 0; i < recs.size(); ++i)
    for (std::size_t j = i + 1; j < recs.size(); ++j) {
      const auto c = true_class(recs[i].second, recs[j].second);
      const double d = c == MatchClass::same_word_same_mood ? 1.0 + double(i % 3)
                       : c == MatchClass::same_word_different_mood ? 10.0 + double(j % 4)
                                                                   : 50.0 + double((i + j) % 7);
      pairs.push_back({recs[i].first, recs[j].first, d, recs[i].second, recs[j].second});
    }
  const auto r = evaluate_pairs(pairs);
  EXPECT_TRUE(r.thresholds_learned);
  EXPECT_GT(r.train_pairs, 0u);
  EXPECT_GT(r.test_pairs, 0u);
  EXPECT_EQ(r.train_pairs + r.test_pairs, pairs.size());
  EXPECT_EQ(r.three_class_accuracy, 1.0);
  for (const std::size_t i : {0u, 1u, 3u}) EXPECT_EQ(*r.rows[i].values.accuracy, 1.0) << r.rows[i].similarity_level;
}

TEST(Evaluate, EmptyIsInsufficient) {
  EXPECT_EQ(code_of([] { evaluate_pairs({}); }), Errc::insufficient_labels);
}

TEST(Reclassify, PureView) {
  QuerySession s{"s1", "upload", std::nullopt, {{"a", 0.5, std::nullopt}, {"b", 3.0, std::nullopt}, {"c", 9.0, std::nullopt}}};
  const auto v = reclassify(s, Thresholds{1, 5});
  EXPECT_EQ(v.results[0].match_class, MatchClass::same_word_same_mood);
  EXPECT_EQ(v.results[1].match_class, MatchClass::same_word_different_mood);
  EXPECT_EQ(v.results[2].match_class, MatchClass::different_word);
  EXPECT_FALSE(s.results[0].match_class.has_value());
  EXPECT_FALSE(s.thresholds.has_value());
}

TEST(LabelStoreTest, PersistsPrivately) {
  vs_test::TempDir tmp;
  {
    LabelStore s(tmp / "labels.json");
    s.set("r1", lab("help", "calm"));
    s.set("r1", lab("help", "excited"));
  }
  LabelStore again(tmp / "labels.json");
  EXPECT_EQ(again.get("r1"), lab("help", "excited"));
  EXPECT_FALSE(again.get("r2").has_value());
  EXPECT_EQ(fs::status(tmp / "labels.json").permissions() & fs::perms::all,
            fs::perms::owner_read | fs::perms::owner_write);
}

TEST(ThresholdsFile, RoundTrip) {
  vs_test::TempDir tmp;
  EXPECT_FALSE(load_thresholds(tmp / "t.json").has_value());
  save_thresholds(tmp / "t.json", Thresholds{1.25, 7.5});
  EXPECT_EQ(load_thresholds(tmp / "t.json"), (Thresholds{1.25, 7.5}));
}

TEST_F(Home, EmptyStore) {
  EXPECT_TRUE(care->list().empty());
  const auto s = care->run_query(QuerySource::wav_bytes(audio::write_wav(vs_test::sine(440, 0.5))), std::nullopt);
  EXPECT_TRUE(s.results.empty());
  EXPECT_EQ(code_of([&] { care->labeled_pairs(); }), Errc::insufficient_labels);
}

TEST_F(Home, SelfQueryIsZeroAndSameMood) {
  const auto a = add("a.wav", vs_test::sine(440, 0.5));
  const auto b = add("b.wav", vs_test::sine(880, 0.5));
  const auto s = care->run_query(QuerySource::record(a), Thresholds{0, 10});
  ASSERT_EQ(s.results.size(), 2u);
  EXPECT_EQ(s.results[0].record_id, a);
  EXPECT_EQ(s.results[0].distance, 0.0);
  EXPECT_EQ(s.results[0].match_class, MatchClass::same_word_same_mood);
  EXPECT_EQ(s.results[1].record_id, b);
  EXPECT_GT(s.results[1].distance, 0.0);
  EXPECT_EQ(s.session_id.size(), 16u);
}

TEST_F(Home, DistancesMatchPlaintextOracle) {
  std::vector<audio::AudioClip> clips = {vs_test::sine(300, 0.4), vs_test::sine(700, 0.6, 16000, 0.2),
                                         vs_test::sine(1500, 0.3, 8000, 0.8)};
  std::vector<std::string> ids;
  std::vector<mfcc::FeatureVector> plain;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    ids.push_back(add("c" + std::to_string(i) + ".wav", clips[i]));
    // The device analyses what it stored: 16-bit PCM.
    plain.push_back(mfcc::column_mean(mfcc::extract_features(audio::read_wav(audio::write_wav(clips[i])))));
  }
  const auto q = vs_test::sine(500, 0.5);
  const auto qv = mfcc::column_mean(mfcc::extract_features(q));
  const auto d = care->distances(qv);
  ASSERT_EQ(d.size(), 3u);
  std::map<std::string, double> by_id(d.begin(), d.end());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    EXPECT_EQ(by_id.at(ids[i]), double(matching::plaintext_distance(qv, plain[i], 16)) / 256.0);
  }
}

TEST_F(Home, TamperedBlobFailsAuthentication) {
  const auto a = add("a.wav", vs_test::sine(440, 0.5));
  const auto b = add("b.wav", vs_test::sine(660, 0.5));
  const fs::path blob = tmp / "store" / "blobs" / (a + ".bin");
  Bytes raw = read_file(blob);
  raw[raw.size() / 2] ^= 0x01;
  write_file_atomic(blob, raw);
  const std::vector<std::string> ids = {a, b, "00000000000000000000000000000000"};
  const auto out = care->fetch(ids);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].error, Errc::auth_failure);
  EXPECT_FALSE(out[0].wav.has_value());
  EXPECT_EQ(*out[1].wav, read_file(tmp / "b.wav"));
  EXPECT_EQ(out[2].error, Errc::unknown_record);
  EXPECT_EQ(code_of([&] { care->fetch_and_play(a); }), Errc::auth_failure);
}

TEST_F(Home, LabelUnknownRecordFails) {
  EXPECT_EQ(code_of([&] { care->label("nope", lab("help", "calm")); }), Errc::unknown_record);
  EXPECT_TRUE(labels->all().empty());
}

TEST_F(Home, LabelsNeverReachServer) {
  const auto a = add("a.wav", vs_test::sine(440, 0.5));
  const auto b = add("b.wav", vs_test::sine(880, 0.5));
  care->label(a, {"zebraword", "moodyzebra", "quiet", "secret note"});
  care->label(b, {"zebraword", "moodyzebra", "noisy", ""});
  const auto pairs = care->labeled_pairs();
  ASSERT_EQ(pairs.size(), 1u);
  for (const auto& r : transport->requests) {
    EXPECT_EQ(r.body.find("zebra"), std::string::npos);
    EXPECT_EQ(r.body.find("secret"), std::string::npos);
  }
}

TEST_F(Home, UiApi) {
  CaregiverUiApi ui(*care, tmp / "care" / "thresholds.json");
  auto call = [&](std::string method, std::string path, std::string body = {}) {
    return net::dispatch_safely(ui.handler(), {std::move(method), std::move(path), {}, std::move(body)});
  };

  auto resp = call("GET", "/ui/records");
  EXPECT_EQ(resp.status, 200);
  EXPECT_EQ(json::parse(resp.body), json::array());
  resp = call("GET", "/ui/sweep.csv");
  EXPECT_EQ(resp.body, "threshold,sensitivity,specificity\n");
  EXPECT_EQ(json::parse(call("GET", "/ui/thresholds").body), (json{{"tm", nullptr}, {"tw", nullptr}}));

  const auto a = add("a.wav", vs_test::sine(440, 0.5));
  const auto b = add("b.wav", vs_test::sine(880, 0.5));

  resp = call("POST", "/ui/records/" + a + "/label", json{{"word", "help"}, {"mood", "calm"}, {"background", "quiet"}}.dump());
  ASSERT_EQ(resp.status, 200) << resp.body;
  resp = call("POST", "/ui/records/" + b + "/label", json{{"word", "water"}, {"mood", "calm"}, {"background", "quiet"}}.dump());
  resp = call("POST", "/ui/records/nope/label", json{{"word", "x"}, {"mood", "y"}, {"background", "z"}}.dump());
  EXPECT_EQ(resp.status, 404);

  const json records = json::parse(call("GET", "/ui/records").body);
  ASSERT_EQ(records.size(), 2u);
  for (const auto& r : records) {
    EXPECT_TRUE(r.at("playable").get<bool>());
    if (r.at("record_id") == a) EXPECT_EQ(r.at("labels").at("word"), "help");
  }

  resp = call("GET", "/ui/records/" + a + "/audio");
  EXPECT_EQ(resp.content_type, "audio/wav");
  EXPECT_EQ(resp.body, to_string(read_file(tmp / "a.wav")));

  // No thresholds saved yet: distances but no classes.
  resp = call("POST", "/ui/query", json{{"record_id", a}}.dump());
  json session = json::parse(resp.body);
  ASSERT_EQ(session.at("results").size(), 2u);
  EXPECT_TRUE(session.at("results")[0].at("class").is_null());
  EXPECT_EQ(session.at("results")[0].at("distance"), 0.0);

  const auto before = transport->requests.size();
  resp = call("POST", "/ui/sessions/" + session.at("session_id").get<std::string>() + "/reclassify",
              json{{"tm", 0.0}, {"tw", 1.0}}.dump());
  EXPECT_EQ(transport->requests.size(), before);
  const json view = json::parse(resp.body);
  EXPECT_EQ(view.at("results")[0].at("class"), "same_word_same_mood");
  EXPECT_EQ(view.at("results")[1].at("class"), "different_word");
  EXPECT_EQ(call("POST", "/ui/sessions/zzz/reclassify", json{{"tm", 0}, {"tw", 1}}.dump()).status, 404);
  resp = call("POST", "/ui/sessions/x/reclassify", json{{"tm", 5}, {"tw", 1}}.dump());
  EXPECT_EQ(resp.status, 400);
  EXPECT_EQ(json::parse(resp.body).at("error").at("code"), "invalid_thresholds");

  resp = call("PUT", "/ui/thresholds", json{{"tm", 0.5}, {"tw", 2.0}}.dump());
  EXPECT_EQ(resp.status, 200);
  EXPECT_EQ(json::parse(call("GET", "/ui/thresholds").body), (json{{"tm", 0.5}, {"tw", 2.0}}));

  resp = call("POST", "/ui/query", json{{"wav_b64", base64_encode(read_file(tmp / "b.wav"))}}.dump());
  session = json::parse(resp.body);
  EXPECT_EQ(session.at("results")[0].at("record_id"), b);
  EXPECT_EQ(session.at("results")[0].at("class"), "same_word_same_mood");
  EXPECT_EQ(call("POST", "/ui/query", "{}").status, 400);

  resp = call("GET", "/ui/sweep.csv");
  EXPECT_EQ(resp.content_type, "text/csv");
  EXPECT_EQ(resp.body.rfind("threshold,sensitivity,specificity\n", 0), 0u);

  resp = call("POST", "/ui/fetch", json{{"ids", {a, "nope"}}}.dump());
  const json items = json::parse(resp.body).at("items");
  EXPECT_EQ(base64_decode(items[0].at("wav_b64").get<std::string>()), read_file(tmp / "a.wav"));
  EXPECT_EQ(items[1].at("error"), "unknown_record");
  EXPECT_EQ(call("GET", "/ui/elsewhere").status, 404);
}
