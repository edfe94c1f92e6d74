#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <string>

#include <json.hpp>

#include "voicesearch/caregiver/caregiver_client.hpp"
#include "voicesearch/net/http.hpp"

namespace voicesearch::caregiver {

nlohmann::json session_to_json(const QuerySession& s);

// Localhost API for the browser console. Only decrypted artifacts leave
// through it: labels, distances, classes and WAV bytes.
//
//   GET  /ui/records                    [{record_id, created_at, device_id, meta, labels, playable}]
//   POST /ui/records/{id}/label         {word, mood, background, notes}
//   GET  /ui/records/{id}/audio         audio/wav
//   POST /ui/query                      {record_id} | {wav_b64} [, tm, tw]
//   GET  /ui/thresholds, PUT /ui/thresholds {tm, tw}
//   POST /ui/sessions/{id}/reclassify   {tm, tw}
//   GET  /ui/sweep.csv                  text/csv
//   POST /ui/fetch                      {ids}
class CaregiverUiApi {
 public:
  CaregiverUiApi(CaregiverClient& client, std::filesystem::path thresholds_file)
      : client_(client), thresholds_file_(std::move(thresholds_file)) {}

  net::HttpResponse handle(const net::HttpRequest& req);
  net::Handler handler() {
    return [this](const net::HttpRequest& r) { return handle(r); };
  }

 private:
  net::HttpResponse records();
  net::HttpResponse label(const std::string& id, const net::HttpRequest& req);
  net::HttpResponse audio(const std::string& id);
  net::HttpResponse query(const net::HttpRequest& req);
  net::HttpResponse get_thresholds();
  net::HttpResponse put_thresholds(const net::HttpRequest& req);
  net::HttpResponse reclassify_session(const std::string& id, const net::HttpRequest& req);
  net::HttpResponse sweep_csv();
  net::HttpResponse fetch(const net::HttpRequest& req);

  CaregiverClient& client_;
  std::filesystem::path thresholds_file_;
  std::mutex mu_;  // sessions and thresholds file
  std::map<std::string, QuerySession> sessions_;
};

}  // namespace voicesearch::caregiver
