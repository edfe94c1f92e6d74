#pragma once

#include <filesystem>
#include <string>

#include "voicesearch/blobcrypt/blobcrypt.hpp"
#include "voicesearch/common/random.hpp"
#include "voicesearch/ringhe/he.hpp"

namespace voicesearch::keys {

// Everything the home device and the caregiver share out of band: the HE
// key pair (both halves are kept secret), the blob key and its identifier.
struct KeyMaterial {
  ringhe::ContextPtr context;
  ringhe::KeyPair he;
  blobcrypt::BlobKey blob_key;
  std::string key_id;
};

KeyMaterial generate_key_material(const ringhe::HeParams& params, RandomSource& rng);

// Written with mode 0600.
void save_key_file(const std::filesystem::path& path, const KeyMaterial& keys);

// Throws Error(key_file) if the file is unreadable, malformed, or readable
// by group or others.
KeyMaterial load_key_file(const std::filesystem::path& path);

}  // namespace voicesearch::keys
