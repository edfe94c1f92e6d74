#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "voicesearch/blobcrypt/blobcrypt.hpp"
#include "voicesearch/net/http.hpp"
#include "voicesearch/server/store.hpp"

namespace voicesearch::server {

// Wire forms used by both the server and its clients.
nlohmann::json sealed_blob_to_json(const blobcrypt::SealedBlob& blob);
blobcrypt::SealedBlob sealed_blob_from_json(const nlohmann::json& j);
nlohmann::json features_to_json(std::span<const ringhe::Ciphertext> cts);
std::vector<ringhe::Ciphertext> features_from_json(const nlohmann::json& j, const ringhe::ContextPtr& ctx);

// Routes:
//   POST /v1/records        -> 201 {record_id}
//   GET  /v1/records        -> 200 {records: [...]}   (device_id, from, to)
//   POST /v1/query          -> 200 {results: [{record_id, distance}]}
//   POST /v1/blobs:fetch    -> 200 {blobs: [...]}
//   GET  /v1/params         -> 200 {p, q, n, sigma, S}
// Request bodies may carry "params"; a mismatch with the store is 409.
class ServerApi {
 public:
  using Logger = std::function<void(std::string_view)>;

  explicit ServerApi(VoiceStore& store, Logger log = {}) : store_(store), log_(std::move(log)) {}

  net::HttpResponse handle(const net::HttpRequest& req);
  net::Handler handler() {
    return [this](const net::HttpRequest& r) { return handle(r); };
  }

 private:
  net::HttpResponse put_record(const net::HttpRequest& req);
  net::HttpResponse list_records(const net::HttpRequest& req);
  net::HttpResponse query(const net::HttpRequest& req);
  net::HttpResponse fetch_blobs(const net::HttpRequest& req);
  void check_params(const nlohmann::json& body) const;
  void log(const std::string& line) const {
    if (log_) log_(line);
  }

  VoiceStore& store_;
  Logger log_;
};

}  // namespace voicesearch::server
