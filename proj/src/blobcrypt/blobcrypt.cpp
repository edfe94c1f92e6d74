#include "voicesearch/blobcrypt/blobcrypt.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>

#include <memory>
#include <string>

#include "voicesearch/common/error.hpp"

namespace voicesearch::blobcrypt {
namespace {

struct CtxDeleter {
  void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CtxDeleter>;

CipherCtx new_ctx() {
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx) throw Error(Errc::io, "EVP_CIPHER_CTX_new failed");
  return ctx;
}

}  // namespace

BlobKey::~BlobKey() { OPENSSL_cleanse(bytes_.data(), bytes_.size()); }

BlobKey BlobKey::generate(RandomSource& rng) {
  std::array<std::uint8_t, kKeyBytes> raw{};
  rng.fill(raw);
  BlobKey key(raw);
  OPENSSL_cleanse(raw.data(), raw.size());
  return key;
}

Nonce Nonce::from_counter(std::uint32_t prefix, std::uint64_t counter) {
  Nonce n;
  for (int i = 0; i < 4; ++i) n.bytes[i] = static_cast<std::uint8_t>(prefix >> (24 - 8 * i));
  for (int i = 0; i < 8; ++i) n.bytes[4 + i] = static_cast<std::uint8_t>(counter >> (56 - 8 * i));
  return n;
}

std::uint32_t Nonce::prefix() const {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | bytes[i];
  return v;
}

std::uint64_t Nonce::counter() const {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | bytes[4 + i];
  return v;
}

SealedBlob seal(const BlobKey& key, ByteView plaintext, const Nonce& nonce, std::string key_id) {
  auto ctx = new_ctx();
  if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kNonceBytes, nullptr) != 1 ||
      EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.bytes().data(), nonce.bytes.data()) != 1) {
    throw Error(Errc::io, "AES-GCM init failed");
  }
  SealedBlob out{nonce, Bytes(plaintext.size() + kTagBytes), std::move(key_id)};
  int len = 0;
  if (!plaintext.empty() &&
      EVP_EncryptUpdate(ctx.get(), out.ciphertext.data(), &len, plaintext.data(),
                        static_cast<int>(plaintext.size())) != 1) {
    throw Error(Errc::io, "AES-GCM encrypt failed");
  }
  int tail = 0;
  if (EVP_EncryptFinal_ex(ctx.get(), out.ciphertext.data() + len, &tail) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTagBytes,
                          out.ciphertext.data() + plaintext.size()) != 1) {
    throw Error(Errc::io, "AES-GCM finalize failed");
  }
  return out;
}

Bytes open(const BlobKey& key, const SealedBlob& blob) {
  if (blob.ciphertext.size() < kTagBytes) throw Error(Errc::auth_failure, "sealed blob shorter than its tag");
  const std::size_t body = blob.ciphertext.size() - kTagBytes;
  auto ctx = new_ctx();
  if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, kNonceBytes, nullptr) != 1 ||
      EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.bytes().data(), blob.nonce.bytes.data()) != 1) {
    throw Error(Errc::io, "AES-GCM init failed");
  }
  Bytes plain(body);
  int len = 0;
  if (body > 0 && EVP_DecryptUpdate(ctx.get(), plain.data(), &len, blob.ciphertext.data(),
                                    static_cast<int>(body)) != 1) {
    throw Error(Errc::auth_failure, "decryption failed");
  }
  Bytes tag(blob.ciphertext.begin() + static_cast<long>(body), blob.ciphertext.end());
  int tail = 0;
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kTagBytes, tag.data()) != 1 ||
      EVP_DecryptFinal_ex(ctx.get(), plain.data() + len, &tail) != 1) {
    OPENSSL_cleanse(plain.data(), plain.size());
    throw Error(Errc::auth_failure, "authentication tag mismatch");
  }
  return plain;
}

Nonce NonceSequence::claim(std::uint64_t counter) {
  if (counter <= last_) {
    throw Error(Errc::nonce_reuse, "counter " + std::to_string(counter) + " already used (last " +
                                       std::to_string(last_) + ")");
  }
  last_ = counter;
  return Nonce::from_counter(prefix_, counter);
}

}  // namespace voicesearch::blobcrypt
