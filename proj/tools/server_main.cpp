#include <cstdio>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "signals.hpp"
#include "voicesearch/common/files.hpp"
#include "voicesearch/ringhe/serialize.hpp"
#include "voicesearch/server/api.hpp"
#include "voicesearch/server/store.hpp"

using namespace voicesearch;

int main(int argc, char** argv) {
  CLI::App app{"Encrypted voice record server. Holds no keys."};
  app.require_subcommand(1);

  std::string store_dir;
  std::string params_file;
  auto* init = app.add_subcommand("init", "Create an empty store");
  init->add_option("--store", store_dir, "Store directory")->required();
  init->add_option("--params", params_file, "Public HE parameters (JSON); defaults otherwise");

  std::string host = "127.0.0.1";
  int port = 8750;
  bool quiet = false;
  auto* serve = app.add_subcommand("serve", "Serve a store over HTTP");
  serve->add_option("--store", store_dir, "Store directory")->required();
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--port", port, "Listen port (0 picks one)");
  serve->add_flag("--quiet", quiet, "Do not log requests");

  CLI11_PARSE(app, argc, argv);

  try {
    if (init->parsed()) {
      ringhe::HeParams params = ringhe::HeParams::defaults();
      if (!params_file.empty()) {
        params = ringhe::params_from_json(nlohmann::json::parse(read_text_file(params_file)));
      }
      server::VoiceStore::create(store_dir, params);
      std::printf("created store %s\n", store_dir.c_str());
      return 0;
    }

    const sigset_t signals = tools::block_shutdown_signals();
    server::VoiceStore store(store_dir);
    server::ServerApi api(store, quiet ? server::ServerApi::Logger{} : [](std::string_view line) {
      std::fprintf(stderr, "%.*s\n", static_cast<int>(line.size()), line.data());
    });
    net::HttpService service(api.handler());
    const int bound = service.start(host, port);
    std::printf("listening on %s:%d (%zu records)\n", host.c_str(), bound, store.size());
    std::fflush(stdout);
    tools::wait_for_shutdown(signals, service);
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
