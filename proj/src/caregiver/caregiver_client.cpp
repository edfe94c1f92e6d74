#include "voicesearch/caregiver/caregiver_client.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "voicesearch/audio/wav.hpp"
#include "voicesearch/common/files.hpp"
#include "voicesearch/matching/distance.hpp"
#include "voicesearch/mfcc/config_json.hpp"
#include "voicesearch/ringhe/serialize.hpp"
#include "voicesearch/server/api.hpp"

namespace voicesearch::caregiver {

namespace fs = std::filesystem;
using nlohmann::json;

CaregiverConfig CaregiverConfig::load(const fs::path& path) {
  CaregiverConfig c;
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
  try {
    const json j = json::parse(read_text_file(path));
    c.server_url = j.value("server_url", c.server_url);
    c.key_file = resolve(j.at("key_file").get<std::string>());
    c.state_dir = resolve(j.value("state_dir", std::string(".")));
    if (j.contains("mfcc")) c.mfcc = mfcc::config_from_json(j.at("mfcc"));
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_config, path.string() + ": " + e.what());
  }
  return c;
}

std::optional<matching::Thresholds> load_thresholds(const fs::path& path) {
  if (!fs::exists(path)) return std::nullopt;
  try {
    const json j = json::parse(read_text_file(path));
    matching::Thresholds t{j.at("tm").get<double>(), j.at("tw").get<double>()};
    t.validate();
    return t;
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_thresholds, path.string() + ": " + e.what());
  }
}

void save_thresholds(const fs::path& path, const matching::Thresholds& t) {
  t.validate();
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file_atomic(path, json{{"tm", t.same_mood}, {"tw", t.same_word}}.dump(2), 0600);
}

QuerySource QuerySource::record(std::string id) {
  QuerySource s;
  s.description = "record:" + id;
  s.record_id = std::move(id);
  return s;
}

QuerySource QuerySource::wav_bytes(Bytes bytes, std::string description) {
  QuerySource s;
  s.wav = std::move(bytes);
  s.description = std::move(description);
  return s;
}

QuerySource QuerySource::wav_file(const fs::path& path) { return wav_bytes(read_file(path), "wav:" + path.string()); }

QuerySession reclassify(const QuerySession& session, const matching::Thresholds& t) {
  t.validate();
  QuerySession out = session;
  out.thresholds = t;
  for (auto& r : out.results) r.match_class = matching::classify(r.distance, t);
  return out;
}

CaregiverClient::CaregiverClient(const keys::KeyMaterial& keys, net::Transport& transport, LabelStore& labels,
                                 RandomSource& rng, mfcc::MfccConfig mfcc)
    : keys_(keys), transport_(transport), labels_(labels), rng_(rng), mfcc_(std::move(mfcc)) {
  mfcc_.validate();
}

std::vector<RecordView> CaregiverClient::list(const server::RecordFilter& filter) {
  net::HttpRequest req{"GET", "/v1/records", {}, {}};
  if (filter.device_id) req.query["device_id"] = *filter.device_id;
  if (filter.from) req.query["from"] = format_rfc3339(*filter.from);
  if (filter.to) req.query["to"] = format_rfc3339(*filter.to);
  const json resp = net::expect_json(transport_.send(req));
  std::vector<RecordView> out;
  for (const auto& r : resp.at("records")) {
    auto summary = server::summary_from_json(r);
    auto label = labels_.get(summary.record_id);
    out.push_back({std::move(summary), std::move(label)});
  }
  return out;
}

std::vector<FetchedAudio> CaregiverClient::fetch(std::span<const std::string> ids) {
  const json body{{"ids", std::vector<std::string>(ids.begin(), ids.end())}};
  const json resp = net::expect_json(transport_.send({"POST", "/v1/blobs:fetch", {}, body.dump()}));
  std::vector<FetchedAudio> out;
  for (const auto& item : resp.at("blobs")) {
    FetchedAudio a{item.at("record_id").get<std::string>(), std::nullopt, std::nullopt};
    if (item.contains("error")) {
      a.error = errc_from_string(item.at("error").get<std::string>()).value_or(Errc::unknown_record);
    } else {
      try {
        a.wav = blobcrypt::open(keys_.blob_key, server::sealed_blob_from_json(item));
      } catch (const Error& e) {
        a.error = e.code();
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

Bytes CaregiverClient::fetch_and_play(const std::string& record_id) {
  const std::string ids[] = {record_id};
  auto got = fetch(ids);
  if (got.size() != 1) throw Error(Errc::network, "server returned " + std::to_string(got.size()) + " blobs for one id");
  if (got[0].error) throw Error(*got[0].error, "record " + record_id + ": " + std::string(to_string(*got[0].error)));
  return std::move(*got[0].wav);
}

void CaregiverClient::label(const std::string& record_id, const Label& label) {
  const auto records = list();
  const bool known = std::any_of(records.begin(), records.end(),
                                 [&](const RecordView& r) { return r.summary.record_id == record_id; });
  if (!known) throw Error(Errc::unknown_record, "no record " + record_id + " on the server");
  labels_.set(record_id, label);
}

mfcc::FeatureVector CaregiverClient::features_for(const QuerySource& source) {
  Bytes wav;
  if (source.record_id) {
    wav = fetch_and_play(*source.record_id);
  } else if (source.wav) {
    wav = *source.wav;
  } else {
    throw Error(Errc::malformed_request, "query source names neither a record nor audio");
  }
  return mfcc::column_mean(mfcc::extract_features(audio::read_wav(wav), mfcc_));
}

std::vector<std::pair<std::string, double>> CaregiverClient::distances(const mfcc::FeatureVector& v) {
  const auto enc = matching::encrypt_features(keys_.he.pub, v, rng_);
  const json body{{"params", ringhe::params_to_json(keys_.context->params())},
                  {"features", server::features_to_json(enc)}};
  const json resp = net::expect_json(transport_.send({"POST", "/v1/query", {}, body.dump()}));
  std::vector<std::pair<std::string, double>> out;
  for (const auto& r : resp.at("results")) {
    const auto ct = ringhe::ciphertext_from_json(r.at("distance"), keys_.context);
    out.emplace_back(r.at("record_id").get<std::string>(), matching::decrypt_distance(keys_.he.secret, ct));
  }
  return out;
}

QuerySession CaregiverClient::run_query(const QuerySource& source,
                                        const std::optional<matching::Thresholds>& thresholds) {
  if (thresholds) thresholds->validate();
  const auto v = features_for(source);

  QuerySession session;
  std::array<std::uint8_t, 8> sid{};
  rng_.fill(sid);
  session.session_id = hex_encode(sid);
  session.source = source.description;
  session.thresholds = thresholds;
  for (auto& [id, d] : distances(v)) {
    ResultRow row{id, d, std::nullopt};
    if (thresholds) row.match_class = matching::classify(d, *thresholds);
    session.results.push_back(std::move(row));
  }
  std::sort(session.results.begin(), session.results.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.record_id < b.record_id;
  });
  return session;
}

std::vector<LabeledPair> CaregiverClient::labeled_pairs() {
  const auto labels = labels_.all();
  std::vector<std::string> ids;
  for (const auto& r : list()) {
    if (labels.count(r.summary.record_id) != 0) ids.push_back(r.summary.record_id);
  }
  std::sort(ids.begin(), ids.end());
  if (ids.size() < 2) throw Error(Errc::insufficient_labels, "need at least two labeled records on the server");

  std::vector<LabeledPair> out;
  for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
    const auto dist = distances(features_for(QuerySource::record(ids[i])));
    const std::map<std::string, double> by_id(dist.begin(), dist.end());
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      auto it = by_id.find(ids[j]);
      if (it == by_id.end()) throw Error(Errc::unknown_record, "server dropped record " + ids[j]);
      out.push_back({ids[i], ids[j], it->second, labels.at(ids[i]), labels.at(ids[j])});
    }
  }
  return out;
}

}  // namespace voicesearch::caregiver
