#include "voicesearch/server/api.hpp"

#include "voicesearch/ringhe/serialize.hpp"

namespace voicesearch::server {

using net::HttpRequest;
using net::HttpResponse;
using nlohmann::json;

json sealed_blob_to_json(const blobcrypt::SealedBlob& blob) {
  return json{{"nonce_b64", base64_encode(blob.nonce.bytes)},
              {"ct_b64", base64_encode(blob.ciphertext)},
              {"key_id", blob.key_id}};
}

blobcrypt::SealedBlob sealed_blob_from_json(const json& j) {
  blobcrypt::SealedBlob blob;
  try {
    const Bytes nonce = base64_decode(j.at("nonce_b64").get<std::string>());
    if (nonce.size() != blobcrypt::kNonceBytes) throw Error(Errc::malformed_record, "nonce must be 12 bytes");
    std::copy(nonce.begin(), nonce.end(), blob.nonce.bytes.begin());
    blob.ciphertext = base64_decode(j.at("ct_b64").get<std::string>());
    blob.key_id = j.value("key_id", std::string());
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_record, std::string("bad blob: ") + e.what());
  }
  return blob;
}

json features_to_json(std::span<const ringhe::Ciphertext> cts) {
  json arr = json::array();
  for (const auto& ct : cts) arr.push_back(ringhe::ciphertext_to_json(ct));
  return arr;
}

std::vector<ringhe::Ciphertext> features_from_json(const json& j, const ringhe::ContextPtr& ctx) {
  if (!j.is_array()) throw Error(Errc::malformed_record, "features must be an array");
  std::vector<ringhe::Ciphertext> out;
  out.reserve(j.size());
  for (const auto& c : j) out.push_back(ringhe::ciphertext_from_json(c, ctx));
  return out;
}

void ServerApi::check_params(const json& body) const {
  if (!body.contains("params")) return;
  if (ringhe::params_from_json(body.at("params")) != store_.context()->params()) {
    throw Error(Errc::param_mismatch, "HE parameters differ from the store's");
  }
}

HttpResponse ServerApi::handle(const HttpRequest& req) {
  if (req.path == "/v1/records") {
    if (req.method == "POST") return put_record(req);
    if (req.method == "GET") return list_records(req);
  } else if (req.path == "/v1/query" && req.method == "POST") {
    return query(req);
  } else if (req.path == "/v1/blobs:fetch" && req.method == "POST") {
    return fetch_blobs(req);
  } else if (req.path == "/v1/params" && req.method == "GET") {
    return net::json_response(200, ringhe::params_to_json(store_.context()->params()));
  }
  return net::error_response(Errc::not_found, req.method + " " + req.path);
}

HttpResponse ServerApi::put_record(const HttpRequest& req) {
  const json body = net::parse_body(req);
  check_params(body);
  NewRecord rec;
  try {
    rec.device_id = body.at("device_id").get<std::string>();
    rec.meta = body.value("meta", Meta{});
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_record, e.what());
  }
  if (!body.contains("blob") || !body.contains("features")) {
    throw Error(Errc::malformed_record, "record needs blob and features");
  }
  rec.blob = sealed_blob_from_json(body.at("blob"));
  rec.features = features_from_json(body.at("features"), store_.context());
  const std::size_t blob_bytes = rec.blob.ciphertext.size();
  const std::string id = store_.put(std::move(rec));
  log("put " + id + " blob_bytes=" + std::to_string(blob_bytes) + " body_bytes=" + std::to_string(req.body.size()));
  return net::json_response(201, json{{"record_id", id}});
}

HttpResponse ServerApi::list_records(const HttpRequest& req) {
  RecordFilter filter;
  if (auto it = req.query.find("device_id"); it != req.query.end() && !it->second.empty()) filter.device_id = it->second;
  if (auto it = req.query.find("from"); it != req.query.end() && !it->second.empty()) {
    filter.from = parse_rfc3339(it->second);
  }
  if (auto it = req.query.find("to"); it != req.query.end() && !it->second.empty()) filter.to = parse_rfc3339(it->second);
  json arr = json::array();
  for (const auto& s : store_.list(filter)) {
    arr.push_back(summary_to_json(s));
  }
  return net::json_response(200, json{{"records", std::move(arr)}});
}

HttpResponse ServerApi::query(const HttpRequest& req) {
  const json body = net::parse_body(req);
  check_params(body);
  if (!body.contains("features")) throw Error(Errc::malformed_request, "query needs features");
  const auto features = features_from_json(body.at("features"), store_.context());
  const auto results = store_.query(features);
  json arr = json::array();
  for (const auto& r : results) {
    arr.push_back(json{{"record_id", r.record_id}, {"distance", ringhe::ciphertext_to_json(r.distance)}});
  }
  log("query body_bytes=" + std::to_string(req.body.size()) + " results=" + std::to_string(results.size()));
  return net::json_response(200, json{{"results", std::move(arr)}});
}

HttpResponse ServerApi::fetch_blobs(const HttpRequest& req) {
  const json body = net::parse_body(req);
  std::vector<std::string> ids;
  try {
    ids = body.at("ids").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_request, std::string("ids: ") + e.what());
  }
  json arr = json::array();
  for (const auto& r : store_.fetch_blobs(ids)) {
    if (r.blob) {
      json item = sealed_blob_to_json(*r.blob);
      item["record_id"] = r.record_id;
      arr.push_back(std::move(item));
    } else {
      arr.push_back(json{{"record_id", r.record_id}, {"error", to_string(*r.error)}});
    }
  }
  log("fetch ids=" + std::to_string(ids.size()));
  return net::json_response(200, json{{"blobs", std::move(arr)}});
}

}  // namespace voicesearch::server
