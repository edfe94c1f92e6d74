#include "voicesearch/server/store.hpp"

#include <algorithm>
#include <json.hpp>

#include "voicesearch/common/files.hpp"
#include "voicesearch/common/random.hpp"
#include "voicesearch/matching/distance.hpp"
#include "voicesearch/mfcc/mfcc.hpp"
#include "voicesearch/ringhe/serialize.hpp"

namespace voicesearch::server {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

bool valid_id(std::string_view id) {
  return id.size() == 32 && std::all_of(id.begin(), id.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

std::string new_record_id() {
  SystemRandom rng;
  std::array<std::uint8_t, 16> raw{};
  rng.fill(raw);
  return hex_encode(raw);
}

fs::path record_path(const fs::path& dir, const std::string& id) { return dir / "records" / (id + ".json"); }
fs::path blob_path(const fs::path& dir, const std::string& id) { return dir / "blobs" / (id + ".bin"); }

void check_record(const NewRecord& r, const ringhe::HeContext& ctx) {
  if (r.device_id.empty()) throw Error(Errc::malformed_record, "device_id is empty");
  if (r.features.size() != mfcc::kFeatureDim) {
    throw Error(Errc::malformed_record, "expected " + std::to_string(mfcc::kFeatureDim) + " feature ciphertexts, got " +
                                            std::to_string(r.features.size()));
  }
  for (const auto& ct : r.features) {
    if (ct.context()->params() != ctx.params()) throw Error(Errc::param_mismatch, "feature params differ from store");
  }
  if (r.blob.ciphertext.size() < blobcrypt::kTagBytes) throw Error(Errc::malformed_record, "sealed blob too short");
}

}  // namespace

json summary_to_json(const RecordSummary& s) {
  return json{{"record_id", s.record_id},
              {"device_id", s.device_id},
              {"created_at", format_rfc3339(s.created_at)},
              {"meta", s.meta}};
}

RecordSummary summary_from_json(const json& j) {
  RecordSummary s;
  s.record_id = j.at("record_id").get<std::string>();
  s.device_id = j.at("device_id").get<std::string>();
  s.created_at = parse_rfc3339(j.at("created_at").get<std::string>());
  s.meta = j.at("meta").get<Meta>();
  return s;
}

void VoiceStore::create(const fs::path& dir, const ringhe::HeParams& params) {
  params.validate();
  if (fs::exists(dir / "store.json")) throw Error(Errc::storage_failure, dir.string() + " already holds a store");
  fs::create_directories(dir / "records");
  fs::create_directories(dir / "blobs");
  write_file_atomic(dir / "store.json",
                    json{{"version", kFormatVersion}, {"params", ringhe::params_to_json(params)}}.dump(2));
  write_file_atomic(dir / "index.json", json{{"version", kFormatVersion}, {"records", json::array()}}.dump());
}

VoiceStore::VoiceStore(fs::path dir, StoreOptions options) : dir_(std::move(dir)), options_(std::move(options)) {
  if (!options_.clock) options_.clock = now_ms;
  try {
    const json store = json::parse(read_text_file(dir_ / "store.json"));
    ctx_ = ringhe::HeContext::create(ringhe::params_from_json(store.at("params")));
    const json index = json::parse(read_text_file(dir_ / "index.json"));
    for (const auto& r : index.at("records")) {
      auto s = summary_from_json(r);
      if (!valid_id(s.record_id)) throw Error(Errc::storage_failure, "bad record id in index");
      by_id_.emplace(s.record_id, records_.size());
      records_.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::storage_failure, "cannot load store " + dir_.string() + ": " + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::storage_failure) throw;
    throw Error(Errc::storage_failure, "cannot load store " + dir_.string() + ": " + e.what());
  }
  recover();
}

void VoiceStore::recover() {
  for (const auto& sub : {"records", "blobs"}) {
    const fs::path d = dir_ / sub;
    fs::create_directories(d);
    for (const auto& entry : fs::directory_iterator(d)) {
      const std::string id = entry.path().stem().string();
      const std::string ext = entry.path().extension().string();
      const bool known = (ext == ".json" || ext == ".bin") && by_id_.count(id) != 0;
      if (!known) fs::remove(entry.path());
    }
  }
  for (const auto& name : fs::directory_iterator(dir_)) {
    if (name.path().filename().string().find(".tmp.") != std::string::npos) fs::remove(name.path());
  }
  for (const auto& s : records_) {
    if (!fs::exists(record_path(dir_, s.record_id)) || !fs::exists(blob_path(dir_, s.record_id))) {
      throw Error(Errc::storage_failure, "indexed record " + s.record_id + " is missing its files");
    }
  }
}

void VoiceStore::write_index(const std::vector<RecordSummary>& records) const {
  json arr = json::array();
  for (const auto& s : records) arr.push_back(summary_to_json(s));
  write_file_atomic(dir_ / "index.json", json{{"version", kFormatVersion}, {"records", std::move(arr)}}.dump());
}

std::string VoiceStore::put(NewRecord record) {
  check_record(record, *ctx_);

  json features = json::array();
  for (const auto& ct : record.features) features.push_back(ringhe::ciphertext_to_json(ct));

  std::unique_lock lock(mu_);
  std::string id = new_record_id();
  while (by_id_.count(id) != 0) id = new_record_id();

  RecordSummary summary{id, record.device_id, options_.clock(), record.meta};
  json doc{{"version", kFormatVersion},
           {"record_id", id},
           {"device_id", summary.device_id},
           {"created_at", format_rfc3339(summary.created_at)},
           {"meta", summary.meta},
           {"blob", {{"nonce_b64", base64_encode(record.blob.nonce.bytes)}, {"key_id", record.blob.key_id}}},
           {"features", std::move(features)}};

  auto hook = [this](std::string_view stage) {
    if (options_.after_write) options_.after_write(stage);
  };
  try {
    write_file_atomic(blob_path(dir_, id), ByteView(record.blob.ciphertext));
    hook("blob");
    write_file_atomic(record_path(dir_, id), doc.dump());
    hook("record");
    auto next = records_;
    next.push_back(summary);
    write_index(next);
    hook("index");
  } catch (const Error& e) {
    std::error_code ec;
    fs::remove(blob_path(dir_, id), ec);
    fs::remove(record_path(dir_, id), ec);
    throw Error(Errc::storage_failure, e.what());
  }

  by_id_.emplace(id, records_.size());
  records_.push_back(std::move(summary));
  {
    std::lock_guard cache_lock(cache_mu_);
    cache_.emplace(id, std::make_shared<const std::vector<ringhe::Ciphertext>>(std::move(record.features)));
  }
  return id;
}

std::vector<RecordSummary> VoiceStore::list(const RecordFilter& filter) const {
  std::vector<RecordSummary> out;
  {
    std::shared_lock lock(mu_);
    for (const auto& s : records_) {
      if (filter.device_id && s.device_id != *filter.device_id) continue;
      if (filter.from && s.created_at < *filter.from) continue;
      if (filter.to && s.created_at > *filter.to) continue;
      out.push_back(s);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const RecordSummary& a, const RecordSummary& b) {
    if (a.created_at != b.created_at) return a.created_at < b.created_at;
    return a.record_id < b.record_id;
  });
  return out;
}

std::shared_ptr<const std::vector<ringhe::Ciphertext>> VoiceStore::features_of(const std::string& id) const {
  {
    std::lock_guard lock(cache_mu_);
    if (auto it = cache_.find(id); it != cache_.end()) return it->second;
  }
  std::vector<ringhe::Ciphertext> cts;
  try {
    const json doc = json::parse(read_text_file(record_path(dir_, id)));
    for (const auto& c : doc.at("features")) cts.push_back(ringhe::ciphertext_from_json(c, ctx_));
  } catch (const json::exception& e) {
    throw Error(Errc::storage_failure, "record " + id + " is unreadable: " + e.what());
  }
  auto ptr = std::make_shared<const std::vector<ringhe::Ciphertext>>(std::move(cts));
  std::lock_guard lock(cache_mu_);
  return cache_.emplace(id, ptr).first->second;
}

std::vector<DistanceResult> VoiceStore::query(std::span<const ringhe::Ciphertext> features) const {
  if (features.size() != mfcc::kFeatureDim) {
    throw Error(Errc::length_mismatch, "query needs " + std::to_string(mfcc::kFeatureDim) + " ciphertexts");
  }
  for (const auto& ct : features) {
    if (ct.context()->params() != ctx_->params()) throw Error(Errc::param_mismatch, "query params differ from store");
  }
  std::vector<std::string> ids;
  {
    std::shared_lock lock(mu_);
    for (const auto& [id, _] : by_id_) ids.push_back(id);
  }
  std::vector<DistanceResult> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const auto stored = features_of(id);
    out.push_back({id, matching::encrypted_distance(features, *stored)});
  }
  return out;
}

std::vector<BlobResult> VoiceStore::fetch_blobs(std::span<const std::string> ids) const {
  std::vector<BlobResult> out;
  std::shared_lock lock(mu_);
  for (const auto& id : ids) {
    BlobResult r{id, std::nullopt, std::nullopt};
    if (!valid_id(id) || by_id_.count(id) == 0) {
      r.error = Errc::unknown_record;
      out.push_back(std::move(r));
      continue;
    }
    try {
      const json doc = json::parse(read_text_file(record_path(dir_, id)));
      const Bytes nonce = base64_decode(doc.at("blob").at("nonce_b64").get<std::string>());
      if (nonce.size() != blobcrypt::kNonceBytes) throw Error(Errc::storage_failure, "bad stored nonce");
      blobcrypt::SealedBlob blob;
      std::copy(nonce.begin(), nonce.end(), blob.nonce.bytes.begin());
      blob.key_id = doc.at("blob").at("key_id").get<std::string>();
      blob.ciphertext = read_file(blob_path(dir_, id));
      r.blob = std::move(blob);
    } catch (const std::exception&) {
      r.error = Errc::storage_failure;
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::size_t VoiceStore::size() const {
  std::shared_lock lock(mu_);
  return records_.size();
}

}  // namespace voicesearch::server
