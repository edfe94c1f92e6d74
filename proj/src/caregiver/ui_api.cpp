#include "voicesearch/caregiver/ui_api.hpp"

#include "voicesearch/common/bytes.hpp"

namespace voicesearch::caregiver {

using net::HttpRequest;
using net::HttpResponse;
using nlohmann::json;

namespace {

json thresholds_json(const std::optional<matching::Thresholds>& t) {
  if (!t) return json{{"tm", nullptr}, {"tw", nullptr}};
  return json{{"tm", t->same_mood}, {"tw", t->same_word}};
}

std::optional<matching::Thresholds> thresholds_from(const json& body, bool required) {
  const bool has = body.contains("tm") || body.contains("tw");
  if (!has) {
    if (required) throw Error(Errc::thresholds_required, "tm and tw are required");
    return std::nullopt;
  }
  try {
    matching::Thresholds t{body.at("tm").get<double>(), body.at("tw").get<double>()};
    t.validate();
    return t;
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_thresholds, std::string("tm/tw: ") + e.what());
  }
}

// "/ui/records/<id>/<action>" -> {id, action}
bool split_record_path(const std::string& path, const std::string& prefix, std::string& id, std::string& action) {
  if (path.rfind(prefix, 0) != 0) return false;
  const std::string rest = path.substr(prefix.size());
  const auto slash = rest.find('/');
  if (slash == std::string::npos || slash == 0) return false;
  id = rest.substr(0, slash);
  action = rest.substr(slash + 1);
  return true;
}

}  // namespace

json session_to_json(const QuerySession& s) {
  json rows = json::array();
  for (const auto& r : s.results) {
    rows.push_back(json{{"record_id", r.record_id},
                        {"distance", r.distance},
                        {"class", r.match_class ? json(std::string(matching::to_string(*r.match_class))) : json()}});
  }
  return json{{"session_id", s.session_id},
              {"source", s.source},
              {"thresholds", thresholds_json(s.thresholds)},
              {"results", std::move(rows)}};
}

HttpResponse CaregiverUiApi::handle(const HttpRequest& req) {
  std::string id, action;
  if (req.path == "/ui/records" && req.method == "GET") return records();
  if (split_record_path(req.path, "/ui/records/", id, action)) {
    if (action == "label" && req.method == "POST") return label(id, req);
    if (action == "audio" && req.method == "GET") return audio(id);
  }
  if (req.path == "/ui/query" && req.method == "POST") return query(req);
  if (req.path == "/ui/thresholds") {
    if (req.method == "GET") return get_thresholds();
    if (req.method == "PUT") return put_thresholds(req);
  }
  if (split_record_path(req.path, "/ui/sessions/", id, action) && action == "reclassify" && req.method == "POST") {
    return reclassify_session(id, req);
  }
  if (req.path == "/ui/sweep.csv" && req.method == "GET") return sweep_csv();
  if (req.path == "/ui/fetch" && req.method == "POST") return fetch(req);
  return net::error_response(Errc::not_found, req.method + " " + req.path);
}

HttpResponse CaregiverUiApi::records() {
  json arr = json::array();
  for (const auto& r : client_.list()) {
    arr.push_back(json{{"record_id", r.summary.record_id},
                       {"created_at", format_rfc3339(r.summary.created_at)},
                       {"device_id", r.summary.device_id},
                       {"meta", r.summary.meta},
                       {"labels", r.label ? label_to_json(*r.label) : json()},
                       {"playable", true}});
  }
  return net::json_response(200, arr);
}

HttpResponse CaregiverUiApi::label(const std::string& id, const HttpRequest& req) {
  const Label l = label_from_json(net::parse_body(req));
  client_.label(id, l);
  return net::json_response(200, json{{"record_id", id}, {"labels", label_to_json(l)}});
}

HttpResponse CaregiverUiApi::audio(const std::string& id) {
  const Bytes wav = client_.fetch_and_play(id);
  return {200, "audio/wav", to_string(wav)};
}

HttpResponse CaregiverUiApi::query(const HttpRequest& req) {
  const json body = net::parse_body(req);
  QuerySource source;
  if (body.contains("record_id")) {
    source = QuerySource::record(body.at("record_id").get<std::string>());
  } else if (body.contains("wav_b64")) {
    source = QuerySource::wav_bytes(base64_decode(body.at("wav_b64").get<std::string>()));
  } else {
    throw Error(Errc::malformed_request, "query needs record_id or wav_b64");
  }
  auto thresholds = thresholds_from(body, false);
  if (!thresholds) {
    std::lock_guard lock(mu_);
    thresholds = load_thresholds(thresholds_file_);
  }
  QuerySession session = client_.run_query(source, thresholds);
  json out = session_to_json(session);
  std::lock_guard lock(mu_);
  sessions_.emplace(session.session_id, std::move(session));
  return net::json_response(200, out);
}

HttpResponse CaregiverUiApi::get_thresholds() {
  std::lock_guard lock(mu_);
  return net::json_response(200, thresholds_json(load_thresholds(thresholds_file_)));
}

HttpResponse CaregiverUiApi::put_thresholds(const HttpRequest& req) {
  const auto t = thresholds_from(net::parse_body(req), true);
  std::lock_guard lock(mu_);
  save_thresholds(thresholds_file_, *t);
  return net::json_response(200, thresholds_json(t));
}

HttpResponse CaregiverUiApi::reclassify_session(const std::string& id, const HttpRequest& req) {
  const auto t = thresholds_from(net::parse_body(req), true);
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(Errc::not_found, "no session " + id);
  return net::json_response(200, session_to_json(reclassify(it->second, *t)));
}

HttpResponse CaregiverUiApi::sweep_csv() {
  std::vector<matching::SweepPoint> points;
  try {
    const auto pairs = client_.labeled_pairs();
    points = same_word_sweep(pairs);
  } catch (const Error& e) {
    if (e.code() != Errc::insufficient_labels) throw;
  }
  return {200, "text/csv", matching::sweep_csv(points)};
}

HttpResponse CaregiverUiApi::fetch(const HttpRequest& req) {
  const json body = net::parse_body(req);
  std::vector<std::string> ids;
  try {
    ids = body.at("ids").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_request, std::string("ids: ") + e.what());
  }
  json arr = json::array();
  for (const auto& a : client_.fetch(ids)) {
    if (a.wav) {
      arr.push_back(json{{"record_id", a.record_id}, {"wav_b64", base64_encode(*a.wav)}});
    } else {
      arr.push_back(json{{"record_id", a.record_id}, {"error", to_string(*a.error)}});
    }
  }
  return net::json_response(200, json{{"items", std::move(arr)}});
}

}  // namespace voicesearch::caregiver
