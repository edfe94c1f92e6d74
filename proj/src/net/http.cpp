#include "voicesearch/net/http.hpp"

#include <httplib.h>

namespace voicesearch::net {

using nlohmann::json;

HttpResponse json_response(int status, const json& body) { return {status, "application/json", body.dump()}; }

int http_status(Errc code) {
  switch (code) {
    case Errc::malformed_request:
    case Errc::malformed_record:
    case Errc::length_mismatch:
    case Errc::malformed_container:
    case Errc::unsupported_format:
    case Errc::empty_audio:
    case Errc::invalid_clip:
    case Errc::clip_too_short:
    case Errc::invalid_thresholds:
    case Errc::feature_envelope:
    case Errc::encoding_overflow:
      return 400;
    case Errc::unknown_record:
    case Errc::not_found:
      return 404;
    case Errc::param_mismatch:
    case Errc::thresholds_required:
    case Errc::insufficient_labels:
    case Errc::locked:
      return 409;
    case Errc::auth_failure:
      return 422;
    case Errc::network:
      return 502;
    default:
      return 500;
  }
}

HttpResponse error_response(Errc code, const std::string& message) {
  return json_response(http_status(code), json{{"error", {{"code", to_string(code)}, {"message", message}}}});
}

json parse_body(const HttpRequest& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_request, std::string("request body is not JSON: ") + e.what());
  }
}

json expect_json(const HttpResponse& resp) {
  if (resp.status >= 200 && resp.status < 300) {
    try {
      return resp.body.empty() ? json::object() : json::parse(resp.body);
    } catch (const json::exception& e) {
      throw Error(Errc::network, std::string("response is not JSON: ") + e.what());
    }
  }
  Errc code = Errc::network;
  std::string message = "HTTP " + std::to_string(resp.status);
  try {
    const json err = json::parse(resp.body).at("error");
    if (auto c = errc_from_string(err.at("code").get<std::string>())) code = *c;
    message = err.at("message").get<std::string>();
  } catch (const json::exception&) {
  }
  throw Error(code, message);
}

HttpResponse dispatch_safely(const Handler& handler, const HttpRequest& req) {
  try {
    return handler(req);
  } catch (const Error& e) {
    return error_response(e.code(), e.what());
  } catch (const json::exception& e) {
    return error_response(Errc::malformed_request, e.what());
  } catch (const std::exception& e) {
    return error_response(Errc::storage_failure, e.what());
  }
}

HttpTransport::HttpTransport(std::string base_url) : base_url_(std::move(base_url)) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

HttpResponse HttpTransport::send(const HttpRequest& req) {
  httplib::Client client(base_url_);
  client.set_connection_timeout(5);
  client.set_read_timeout(300);
  client.set_write_timeout(300);
  httplib::Params params(req.query.begin(), req.query.end());
  const std::string path = params.empty() ? req.path : httplib::append_query_params(req.path, params);

  httplib::Result res;
  if (req.method == "GET") {
    res = client.Get(path);
  } else if (req.method == "POST") {
    res = client.Post(path, req.body, "application/json");
  } else if (req.method == "PUT") {
    res = client.Put(path, req.body, "application/json");
  } else {
    throw Error(Errc::malformed_request, "unsupported method " + req.method);
  }
  if (!res) {
    throw Error(Errc::network, base_url_ + req.path + ": " + httplib::to_string(res.error()));
  }
  HttpResponse out;
  out.status = res->status;
  out.body = res->body;
  out.content_type = res->get_header_value("Content-Type");
  return out;
}

struct HttpService::Impl {
  httplib::Server server;
  std::thread thread;
};

HttpService::HttpService(Handler handler) : impl_(std::make_unique<Impl>()) {
  auto route = [handler](const httplib::Request& r, httplib::Response& w) {
    HttpRequest req;
    req.method = r.method;
    req.path = r.path;
    for (const auto& [k, v] : r.params) req.query.emplace(k, v);
    req.body = r.body;
    const HttpResponse resp = dispatch_safely(handler, req);
    w.status = resp.status;
    w.set_content(resp.body, resp.content_type);
  };
  impl_->server.Get(".*", route);
  impl_->server.Post(".*", route);
  impl_->server.Put(".*", route);
}

HttpService::~HttpService() { stop(); }

int HttpService::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound <= 0) throw Error(Errc::io, "cannot listen on " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpService::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

void HttpService::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace voicesearch::net
