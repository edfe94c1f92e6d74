#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "voicesearch/common/files.hpp"
#include "voicesearch/common/random.hpp"
#include "voicesearch/keys/keyfile.hpp"
#include "voicesearch/mfcc/mfcc.hpp"
#include "voicesearch/net/http.hpp"
#include "voicesearch/server/store.hpp"

namespace voicesearch::device {

struct DeviceConfig {
  std::string server_url = "http://127.0.0.1:8750";
  std::filesystem::path key_file;
  // Holds the last nonce counter; defaults to "<key_file>.nonce".
  std::filesystem::path state_file;
  std::string device_id;
  mfcc::MfccConfig mfcc;

  // JSON: {"server_url", "key_file", "state_file", "device_id", "mfcc"}.
  // Relative paths resolve against the config file's directory.
  static DeviceConfig load(const std::filesystem::path& path);
  std::filesystem::path resolved_state_file() const;
};

// Nonce counter persisted in a small JSON document. reserve() makes the
// next value durable before returning it.
class NonceCounter {
 public:
  explicit NonceCounter(std::filesystem::path path);

  std::uint64_t last_used() const { return last_; }
  std::uint64_t reserve();

 private:
  std::filesystem::path path_;
  std::uint64_t last_ = 0;
};

// First four bytes of SHA-256(device_id), big-endian. Keeps the nonce
// spaces of devices sharing one blob key apart.
std::uint32_t nonce_prefix(const std::string& device_id);

struct BatchItem {
  std::filesystem::path file;
  std::optional<std::string> record_id;
  std::optional<std::string> error;
};

class DeviceClient {
 public:
  // Takes "<state_file>.lock"; a second client on the same state throws
  // Error(locked).
  DeviceClient(DeviceConfig config, const keys::KeyMaterial& keys, net::Transport& transport, RandomSource& rng);

  std::string ingest(const std::filesystem::path& wav_path, const server::Meta& extra_meta = {});

  // Every *.wav in the directory (not recursive), in name order.
  std::vector<BatchItem> batch_ingest(const std::filesystem::path& dir);

  std::uint64_t last_nonce_counter() const { return counter_.last_used(); }

 private:
  DeviceConfig config_;
  const keys::KeyMaterial& keys_;
  net::Transport& transport_;
  RandomSource& rng_;
  FileLock lock_;
  NonceCounter counter_;
};

}  // namespace voicesearch::device
