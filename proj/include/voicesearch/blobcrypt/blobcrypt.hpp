#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "voicesearch/common/bytes.hpp"
#include "voicesearch/common/random.hpp"

namespace voicesearch::blobcrypt {

inline constexpr std::size_t kKeyBytes = 32;
inline constexpr std::size_t kNonceBytes = 12;
inline constexpr std::size_t kTagBytes = 16;

// AES-256 key; wiped on destruction.
class BlobKey {
 public:
  BlobKey() = default;
  explicit BlobKey(const std::array<std::uint8_t, kKeyBytes>& bytes) : bytes_(bytes) {}
  ~BlobKey();
  BlobKey(const BlobKey&) = default;
  BlobKey& operator=(const BlobKey&) = default;

  static BlobKey generate(RandomSource& rng);

  const std::array<std::uint8_t, kKeyBytes>& bytes() const { return bytes_; }

 private:
  std::array<std::uint8_t, kKeyBytes> bytes_{};
};

// 96-bit GCM nonce: 4-byte sender prefix followed by a 64-bit big-endian
// counter.
struct Nonce {
  std::array<std::uint8_t, kNonceBytes> bytes{};

  static Nonce from_counter(std::uint32_t prefix, std::uint64_t counter);
  std::uint32_t prefix() const;
  std::uint64_t counter() const;

  friend bool operator==(const Nonce&, const Nonce&) = default;
};

struct SealedBlob {
  Nonce nonce;
  Bytes ciphertext;  // ciphertext || 16-byte tag
  std::string key_id;

  friend bool operator==(const SealedBlob&, const SealedBlob&) = default;
};

// AES-256-GCM. The caller guarantees the nonce is fresh under this key;
// NonceSequence below does the bookkeeping.
SealedBlob seal(const BlobKey& key, ByteView plaintext, const Nonce& nonce, std::string key_id);

// Throws Error(auth_failure) if the tag does not verify; no plaintext is
// returned in that case.
Bytes open(const BlobKey& key, const SealedBlob& blob);

// Hands out strictly increasing nonces for one sender and rejects any
// counter at or below the last one used.
class NonceSequence {
 public:
  NonceSequence(std::uint32_t prefix, std::uint64_t last_used) : prefix_(prefix), last_(last_used) {}

  // Throws Error(nonce_reuse) when counter <= last used.
  Nonce claim(std::uint64_t counter);
  Nonce next() { return claim(last_ + 1); }

  std::uint64_t last_used() const { return last_; }

 private:
  std::uint32_t prefix_;
  std::uint64_t last_;
};

}  // namespace voicesearch::blobcrypt
