#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "voicesearch/audio/wav.hpp"
#include "voicesearch/device/device_client.hpp"
#include "voicesearch/keys/keyfile.hpp"
#include "voicesearch/mfcc/mfcc.hpp"

using namespace voicesearch;
using nlohmann::json;

int main(int argc, char** argv) {
  CLI::App app{"In-home device: encrypt and upload voice recordings"};
  app.require_subcommand(1);
  std::string config_path = "device.json";
  bool as_json = false;
  app.add_option("--config", config_path, "Device configuration");
  app.add_flag("--json", as_json, "Machine-readable output");

  std::string wav;
  std::vector<std::string> meta_kv;
  auto* ingest = app.add_subcommand("ingest", "Upload one WAV file");
  ingest->add_option("wav", wav, "WAV file")->required();
  ingest->add_option("--meta", meta_kv, "Extra key=value metadata (stored in clear)");

  std::string dir;
  auto* batch = app.add_subcommand("batch", "Upload every WAV file in a directory");
  batch->add_option("dir", dir, "Directory")->required();

  auto* features = app.add_subcommand("features", "Print the l x 36 feature matrix as CSV (local only)");
  features->add_option("wav", wav, "WAV file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (features->parsed()) {
      mfcc::MfccConfig cfg;
      if (std::filesystem::exists(config_path)) cfg = device::DeviceConfig::load(config_path).mfcc;
      std::cout << mfcc::feature_csv(mfcc::extract_features(audio::read_wav_file(wav), cfg));
      return 0;
    }

    const auto config = device::DeviceConfig::load(config_path);
    const auto keys = keys::load_key_file(config.key_file);
    net::HttpTransport transport(config.server_url);
    SystemRandom rng;
    device::DeviceClient client(config, keys, transport, rng);

    if (ingest->parsed()) {
      server::Meta meta;
      for (const auto& kv : meta_kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error(Errc::invalid_config, "--meta expects key=value");
        meta[kv.substr(0, eq)] = kv.substr(eq + 1);
      }
      const std::string id = client.ingest(wav, meta);
      if (as_json) {
        std::cout << json{{"file", wav}, {"record_id", id}}.dump() << '\n';
      } else {
        std::cout << id << '\n';
      }
      return 0;
    }

    const auto items = client.batch_ingest(dir);
    int failures = 0;
    json out = json::array();
    for (const auto& item : items) {
      if (item.error) ++failures;
      if (as_json) {
        json row{{"file", item.file.string()}};
        if (item.record_id) row["record_id"] = *item.record_id;
        if (item.error) row["error"] = *item.error;
        out.push_back(std::move(row));
      } else if (item.record_id) {
        std::cout << item.file.string() << '\t' << *item.record_id << '\n';
      } else {
        std::cout << item.file.string() << "\terror: " << *item.error << '\n';
      }
    }
    if (as_json) std::cout << out.dump(2) << '\n';
    return failures == 0 ? 0 : 2;
  } catch (const Error& e) {
    if (as_json) {
      std::cout << json{{"error", {{"code", to_string(e.code())}, {"message", e.what()}}}}.dump() << '\n';
    }
    std::fprintf(stderr, "error: %s: %s\n", std::string(to_string(e.code())).c_str(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
