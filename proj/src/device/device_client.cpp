#include "voicesearch/device/device_client.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include <openssl/sha.h>

#include "voicesearch/audio/wav.hpp"
#include "voicesearch/matching/distance.hpp"
#include "voicesearch/mfcc/config_json.hpp"
#include "voicesearch/ringhe/serialize.hpp"
#include "voicesearch/server/api.hpp"

namespace voicesearch::device {

namespace fs = std::filesystem;
using nlohmann::json;

DeviceConfig DeviceConfig::load(const fs::path& path) {
  DeviceConfig c;
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
  try {
    const json j = json::parse(read_text_file(path));
    c.server_url = j.value("server_url", c.server_url);
    c.key_file = resolve(j.at("key_file").get<std::string>());
    if (j.contains("state_file")) c.state_file = resolve(j.at("state_file").get<std::string>());
    c.device_id = j.at("device_id").get<std::string>();
    if (j.contains("mfcc")) c.mfcc = mfcc::config_from_json(j.at("mfcc"));
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_config, path.string() + ": " + e.what());
  }
  if (c.device_id.empty()) throw Error(Errc::invalid_config, "device_id is empty");
  return c;
}

fs::path DeviceConfig::resolved_state_file() const {
  if (!state_file.empty()) return state_file;
  fs::path p = key_file;
  p += ".nonce";
  return p;
}

NonceCounter::NonceCounter(fs::path path) : path_(std::move(path)) {
  if (!fs::exists(path_)) return;
  try {
    last_ = json::parse(read_text_file(path_)).at("last_nonce_counter").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw Error(Errc::key_file, "unreadable nonce state " + path_.string() + ": " + e.what());
  }
}

std::uint64_t NonceCounter::reserve() {
  if (last_ == UINT64_MAX) throw Error(Errc::nonce_reuse, "nonce counter exhausted");
  const std::uint64_t next = last_ + 1;
  write_file_atomic(path_, json{{"last_nonce_counter", next}}.dump(), 0600);
  last_ = next;
  return next;
}

std::uint32_t nonce_prefix(const std::string& device_id) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(device_id.data()), device_id.size(), digest);
  return (std::uint32_t{digest[0]} << 24) | (std::uint32_t{digest[1]} << 16) | (std::uint32_t{digest[2]} << 8) |
         std::uint32_t{digest[3]};
}

namespace {

fs::path lock_path(const fs::path& state) {
  fs::path p = state;
  p += ".lock";
  return p;
}

}  // namespace

DeviceClient::DeviceClient(DeviceConfig config, const keys::KeyMaterial& keys, net::Transport& transport,
                           RandomSource& rng)
    : config_(std::move(config)),
      keys_(keys),
      transport_(transport),
      rng_(rng),
      lock_(lock_path(config_.resolved_state_file())),
      counter_(config_.resolved_state_file()) {
  if (config_.device_id.empty()) throw Error(Errc::invalid_config, "device_id is empty");
  config_.mfcc.validate();
}

std::string DeviceClient::ingest(const fs::path& wav_path, const server::Meta& extra_meta) {
  const Bytes original = read_file(wav_path);
  const audio::AudioClip clip = audio::read_wav(original);
  const mfcc::FeatureVector v = mfcc::column_mean(mfcc::extract_features(clip, config_.mfcc));
  const auto features = matching::encrypt_features(keys_.he.pub, v, rng_);

  blobcrypt::NonceSequence nonces(nonce_prefix(config_.device_id), counter_.last_used());
  const blobcrypt::Nonce nonce = nonces.claim(counter_.reserve());
  const auto sealed = blobcrypt::seal(keys_.blob_key, original, nonce, keys_.key_id);

  server::Meta meta = extra_meta;
  const auto duration_ms =
      std::llround(1000.0 * static_cast<double>(clip.samples.size()) / static_cast<double>(clip.sample_rate));
  meta.emplace("duration_ms", std::to_string(duration_ms));

  const json body{{"device_id", config_.device_id},
                  {"meta", meta},
                  {"params", ringhe::params_to_json(keys_.context->params())},
                  {"blob", server::sealed_blob_to_json(sealed)},
                  {"features", server::features_to_json(features)}};
  const json resp = net::expect_json(transport_.send({"POST", "/v1/records", {}, body.dump()}));
  return resp.at("record_id").get<std::string>();
}

std::vector<BatchItem> DeviceClient::batch_ingest(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(Errc::io, dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (ext == ".wav") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<BatchItem> out;
  for (const auto& f : files) {
    BatchItem item{f, std::nullopt, std::nullopt};
    try {
      item.record_id = ingest(f);
    } catch (const Error& e) {
      item.error = std::string(to_string(e.code())) + ": " + e.what();
    }
    out.push_back(std::move(item));
  }
  return out;
}

}  // namespace voicesearch::device
