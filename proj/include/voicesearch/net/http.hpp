#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <thread>

#include <json.hpp>

#include "voicesearch/common/error.hpp"

namespace voicesearch::net {

struct HttpRequest {
  std::string method;  // "GET", "POST", "PUT"
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

using Handler = std::function<HttpResponse(const HttpRequest&)>;

HttpResponse json_response(int status, const nlohmann::json& body);
// {"error": {"code": ..., "message": ...}} with the status mapped from code.
HttpResponse error_response(Errc code, const std::string& message);
int http_status(Errc code);

// Parses a JSON request body; Error(malformed_request) on failure.
nlohmann::json parse_body(const HttpRequest& req);

// Returns the parsed JSON body of a 2xx response; otherwise rethrows the
// server's error as Error with the same code.
nlohmann::json expect_json(const HttpResponse& resp);

// Runs a handler and converts thrown Errors into error responses.
HttpResponse dispatch_safely(const Handler& handler, const HttpRequest& req);

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse send(const HttpRequest& req) = 0;
};

// Talks to "http://host:port". Throws Error(network) when the server cannot
// be reached.
class HttpTransport final : public Transport {
 public:
  explicit HttpTransport(std::string base_url);
  HttpResponse send(const HttpRequest& req) override;

 private:
  std::string base_url_;
};

// Calls a handler in-process.
class HandlerTransport final : public Transport {
 public:
  explicit HandlerTransport(Handler handler) : handler_(std::move(handler)) {}
  HttpResponse send(const HttpRequest& req) override { return dispatch_safely(handler_, req); }

 private:
  Handler handler_;
};

// Serves a Handler over HTTP on a background thread.
class HttpService {
 public:
  explicit HttpService(Handler handler);
  ~HttpService();

  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  // port 0 picks a free port. Returns the bound port; throws Error(io) if
  // the address is in use.
  int start(const std::string& host, int port);
  void stop();
  // Blocks until stop() is called from another thread or a signal.
  void wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace voicesearch::net
