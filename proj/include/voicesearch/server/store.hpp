#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "voicesearch/blobcrypt/blobcrypt.hpp"
#include "voicesearch/common/error.hpp"
#include "voicesearch/common/timefmt.hpp"
#include "voicesearch/ringhe/he.hpp"

namespace voicesearch::server {

using Meta = std::map<std::string, std::string>;

struct NewRecord {
  std::string device_id;
  Meta meta;
  blobcrypt::SealedBlob blob;
  std::vector<ringhe::Ciphertext> features;
};

struct RecordSummary {
  std::string record_id;
  std::string device_id;
  Timestamp created_at;
  Meta meta;

  friend bool operator==(const RecordSummary&, const RecordSummary&) = default;
};

struct RecordFilter {
  std::optional<std::string> device_id;
  std::optional<Timestamp> from;  // inclusive
  std::optional<Timestamp> to;    // inclusive
};

struct DistanceResult {
  std::string record_id;
  ringhe::Ciphertext distance;
};

struct BlobResult {
  std::string record_id;
  std::optional<blobcrypt::SealedBlob> blob;
  std::optional<Errc> error;
};

struct StoreOptions {
  std::function<Timestamp()> clock = now_ms;
  // Called with "blob", "record" and "index" after each file of a put is
  // durable. Tests use it to simulate crashes between steps.
  std::function<void(std::string_view)> after_write;
};

// On-disk layout:
//   store.json          public HE parameters
//   index.json          committed record summaries, replaced atomically
//   records/<id>.json   metadata, blob nonce and the 36 feature ciphertexts
//   blobs/<id>.bin      sealed audio (ciphertext || tag)
// A put writes blob, record, then index. A record exists once index.json
// names it; files not named there are removed when the store is opened.
class VoiceStore {
 public:
  static void create(const std::filesystem::path& dir, const ringhe::HeParams& params);

  explicit VoiceStore(std::filesystem::path dir, StoreOptions options = {});

  const ringhe::ContextPtr& context() const { return ctx_; }
  const std::filesystem::path& dir() const { return dir_; }

  // Throws Error(malformed_record) for an invalid record and
  // Error(storage_failure) when the disk refuses.
  std::string put(NewRecord record);

  // Ordered by created_at, then record_id.
  std::vector<RecordSummary> list(const RecordFilter& filter = {}) const;

  // One result per stored record, ordered by record_id.
  std::vector<DistanceResult> query(std::span<const ringhe::Ciphertext> features) const;

  std::vector<BlobResult> fetch_blobs(std::span<const std::string> ids) const;

  std::size_t size() const;

 private:
  std::shared_ptr<const std::vector<ringhe::Ciphertext>> features_of(const std::string& id) const;
  void write_index(const std::vector<RecordSummary>& records) const;
  void recover();

  std::filesystem::path dir_;
  StoreOptions options_;
  ringhe::ContextPtr ctx_;

  mutable std::shared_mutex mu_;
  std::vector<RecordSummary> records_;  // insertion order
  std::map<std::string, std::size_t> by_id_;

  mutable std::mutex cache_mu_;
  mutable std::map<std::string, std::shared_ptr<const std::vector<ringhe::Ciphertext>>> cache_;
};

// JSON forms shared by the store and the HTTP layer.
nlohmann::json summary_to_json(const RecordSummary& s);
RecordSummary summary_from_json(const nlohmann::json& j);

}  // namespace voicesearch::server
