#include "voicesearch/matching/distance.hpp"

#include <cmath>
#include <string>

#include "voicesearch/common/error.hpp"
#include "voicesearch/ringhe/codec.hpp"

namespace voicesearch::matching {

using ringhe::Ciphertext;

std::vector<Ciphertext> encrypt_features(const ringhe::PublicKey& pk, const mfcc::FeatureVector& v,
                                         RandomSource& rng) {
  const auto& ctx = *pk.context();
  std::vector<Ciphertext> out;
  out.reserve(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (!(std::fabs(v[j]) <= kFeatureEnvelope)) {
      throw Error(Errc::feature_envelope,
                  "feature " + std::to_string(j) + " = " + std::to_string(v[j]) + " exceeds the envelope");
    }
    out.push_back(ringhe::encrypt(pk, ringhe::encode_fixed(ctx, v[j]), rng));
  }
  return out;
}

Ciphertext encrypted_distance(std::span<const Ciphertext> query, std::span<const Ciphertext> record) {
  if (query.size() != mfcc::kFeatureDim || record.size() != mfcc::kFeatureDim) {
    throw Error(Errc::length_mismatch, "distance needs 36 ciphertexts on each side");
  }
  auto term = [&](std::size_t j) {
    const Ciphertext diff = ringhe::sub(query[j], record[j]);
    return ringhe::mul(diff, diff);
  };
  Ciphertext acc = term(0);
  for (std::size_t j = 1; j < mfcc::kFeatureDim; ++j) acc = ringhe::add(acc, term(j));
  return acc;
}

std::uint64_t plaintext_distance(std::span<const double> v, std::span<const double> w, std::int64_t scale) {
  if (v.size() != mfcc::kFeatureDim || w.size() != mfcc::kFeatureDim) {
    throw Error(Errc::length_mismatch, "distance needs two 36-dimensional vectors");
  }
  std::uint64_t total = 0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    const auto a = static_cast<std::int64_t>(std::llround(v[j] * static_cast<double>(scale)));
    const auto b = static_cast<std::int64_t>(std::llround(w[j] * static_cast<double>(scale)));
    const std::int64_t d = a - b;
    total += static_cast<std::uint64_t>(d * d);
  }
  return total;
}

double decrypt_distance(const ringhe::SecretKey& sk, const Ciphertext& ct) {
  const auto& ctx = *sk.context();
  return ringhe::decode_fixed(ctx, ringhe::decrypt(sk, ct), 2);
}

}  // namespace voicesearch::matching
