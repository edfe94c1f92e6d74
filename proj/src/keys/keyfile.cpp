#include "voicesearch/keys/keyfile.hpp"

#include <sys/stat.h>

#include <cstring>
#include <json.hpp>

#include "voicesearch/common/error.hpp"
#include "voicesearch/common/files.hpp"
#include "voicesearch/ringhe/serialize.hpp"

namespace voicesearch::keys {

using nlohmann::json;

KeyMaterial generate_key_material(const ringhe::HeParams& params, RandomSource& rng) {
  auto ctx = ringhe::HeContext::create(params);
  auto pair = ringhe::keygen(ctx, rng);
  auto blob_key = blobcrypt::BlobKey::generate(rng);
  std::array<std::uint8_t, 4> id{};
  rng.fill(id);
  return KeyMaterial{std::move(ctx), std::move(pair), std::move(blob_key), hex_encode(id)};
}

void save_key_file(const std::filesystem::path& path, const KeyMaterial& keys) {
  const auto& bk = keys.blob_key.bytes();
  json doc{{"version", 1},
           {"key_id", keys.key_id},
           {"params", ringhe::params_to_json(keys.context->params())},
           {"secret", {{"s", ringhe::poly_to_json(keys.he.secret.poly())}}},
           {"public", {{"a", ringhe::poly_to_json(keys.he.pub.a())}, {"b", ringhe::poly_to_json(keys.he.pub.b())}}},
           {"blob_key_b64", base64_encode(bk)}};
  write_file_atomic(path, doc.dump(), 0600);
}

KeyMaterial load_key_file(const std::filesystem::path& path) {
  struct stat st {};
  if (::stat(path.c_str(), &st) != 0) throw Error(Errc::key_file, "cannot stat " + path.string());
  if ((st.st_mode & 077) != 0) {
    throw Error(Errc::key_file, path.string() + " is accessible by group or others; chmod 600 it");
  }
  try {
    const json doc = json::parse(read_text_file(path));
    auto ctx = ringhe::HeContext::create(ringhe::params_from_json(doc.at("params")));
    ringhe::SecretKey sk(ctx, ringhe::poly_from_json(doc.at("secret").at("s"), *ctx));
    ringhe::PublicKey pk(ctx, ringhe::poly_from_json(doc.at("public").at("a"), *ctx),
                         ringhe::poly_from_json(doc.at("public").at("b"), *ctx));
    const Bytes raw = base64_decode(doc.at("blob_key_b64").get<std::string>());
    if (raw.size() != blobcrypt::kKeyBytes) throw Error(Errc::key_file, "blob key must be 32 bytes");
    std::array<std::uint8_t, blobcrypt::kKeyBytes> kb{};
    std::memcpy(kb.data(), raw.data(), kb.size());
    return KeyMaterial{ctx, ringhe::KeyPair{std::move(sk), std::move(pk)}, blobcrypt::BlobKey(kb),
                       doc.at("key_id").get<std::string>()};
  } catch (const json::exception& e) {
    throw Error(Errc::key_file, std::string("malformed key file: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::key_file) throw;
    throw Error(Errc::key_file, e.what());
  }
}

}  // namespace voicesearch::keys
