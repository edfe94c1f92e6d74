#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "voicesearch/common/random.hpp"
#include "voicesearch/mfcc/mfcc.hpp"
#include "voicesearch/ringhe/he.hpp"

namespace voicesearch::matching {

// Largest |feature| accepted for encryption. At S = 16 two encoded vectors
// differ by at most 3072 per coordinate, so a distance never exceeds
// 36 * 3072^2 ~ 3.4e8, inside the centred range of the default p (~5.4e8).
inline constexpr double kFeatureEnvelope = 96.0;

// One fresh ciphertext per coordinate of round(v_j * S). Throws
// Error(feature_envelope) if any |v_j| exceeds kFeatureEnvelope.
std::vector<ringhe::Ciphertext> encrypt_features(const ringhe::PublicKey& pk, const mfcc::FeatureVector& v,
                                                 RandomSource& rng);

// sum_j (query_j - record_j)^2 using only ciphertext sub, mul and add.
// Result has degree 2 and carries scale S^2. Throws Error(length_mismatch)
// unless both sides hold 36 ciphertexts.
ringhe::Ciphertext encrypted_distance(std::span<const ringhe::Ciphertext> query,
                                      std::span<const ringhe::Ciphertext> record);

// Plain integer evaluation over the fixed-point encodings:
// sum_j (round(v_j S) - round(w_j S))^2.
std::uint64_t plaintext_distance(std::span<const double> v, std::span<const double> w, std::int64_t scale);

// Decrypts a distance ciphertext and removes the S^2 scale.
double decrypt_distance(const ringhe::SecretKey& sk, const ringhe::Ciphertext& ct);

}  // namespace voicesearch::matching
