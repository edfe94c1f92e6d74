#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "voicesearch/common/random.hpp"
#include "voicesearch/ringhe/ring.hpp"

namespace voicesearch::ringhe {

// Public system parameters.
struct HeParams {
  std::uint64_t p = 0;  // plaintext modulus, prime, < 2^62
  u128 q = 0;           // ciphertext modulus, prime, q = 1 (mod 4), < 2^126
  std::size_t n = 0;    // ring degree, power of two >= 2
  double sigma = 0.0;   // discrete Gaussian width
  std::int64_t scale = 1;  // fixed-point scale S

  // p = first prime above 2^30, q = first prime above 2^100 that is 1 mod 2^16,
  // n = 1024, sigma = 3.2, S = 16.
  static HeParams defaults();
  // Same moduli over x^2 + 1.
  static HeParams two_term_ring();

  // Throws Error(invalid_params).
  void validate() const;

  friend bool operator==(const HeParams&, const HeParams&) = default;
};

// Validated parameters plus the precomputed ring. Shared, immutable.
class HeContext {
 public:
  static std::shared_ptr<const HeContext> create(const HeParams& params);

  const HeParams& params() const { return params_; }
  const Ring& ring() const { return ring_; }

 private:
  explicit HeContext(const HeParams& params);

  HeParams params_;
  Ring ring_;
};

using ContextPtr = std::shared_ptr<const HeContext>;

// Plaintext in R_p with centered coefficients in (-p/2, p/2].
struct PlaintextPoly {
  std::vector<std::int64_t> coeffs;

  friend bool operator==(const PlaintextPoly&, const PlaintextPoly&) = default;
};

// Degree-0 plaintext holding a single centered value.
PlaintextPoly scalar_plaintext(const HeContext& ctx, std::int64_t value);

// A list of alpha + 1 ring elements; decrypts as sum_k c_k s^k. Held in
// the ring's evaluation form so homomorphic products need no transforms;
// coefficients() gives the [0, q) coefficient form used on the wire.
class Ciphertext {
 public:
  static Ciphertext from_coefficients(ContextPtr ctx, std::vector<Poly> polys);
  static Ciphertext from_eval(ContextPtr ctx, std::vector<Poly> eval_polys);

  std::size_t degree() const { return eval_.size() - 1; }
  std::vector<Poly> coefficients() const;
  const std::vector<Poly>& eval_polys() const { return eval_; }
  const ContextPtr& context() const { return ctx_; }

  friend bool operator==(const Ciphertext& a, const Ciphertext& b) { return a.eval_ == b.eval_; }

 private:
  Ciphertext(ContextPtr ctx, std::vector<Poly> eval);

  ContextPtr ctx_;
  std::vector<Poly> eval_;
};

class SecretKey {
 public:
  SecretKey(ContextPtr ctx, Poly s);

  const ContextPtr& context() const { return ctx_; }
  const Poly& poly() const { return s_; }
  const Poly& eval() const { return s_eval_; }

 private:
  ContextPtr ctx_;
  Poly s_;
  Poly s_eval_;
};

class PublicKey {
 public:
  PublicKey(ContextPtr ctx, Poly a, Poly b);

  const ContextPtr& context() const { return ctx_; }
  const Poly& a() const { return a_; }
  const Poly& b() const { return b_; }
  const Poly& a_eval() const { return a_eval_; }
  const Poly& b_eval() const { return b_eval_; }

 private:
  ContextPtr ctx_;
  Poly a_, b_;
  Poly a_eval_, b_eval_;
};

struct KeyPair {
  SecretKey secret;
  PublicKey pub;
};

// s, e from the error distribution, b uniform, a = -(b s + p e).
KeyPair keygen(const ContextPtr& ctx, RandomSource& rng);

// (a u + p g + m, b u + p f) with fresh u, f, g. Throws
// Error(message_out_of_range) unless every coefficient is in (-p/2, p/2].
Ciphertext encrypt(const PublicKey& pk, const PlaintextPoly& m, RandomSource& rng);

// (sum_k c_k s^k mod q, centered) mod p, centered.
PlaintextPoly decrypt(const SecretKey& sk, const Ciphertext& ct);

// Componentwise after zero-padding to the larger degree. Throws
// Error(param_mismatch) for ciphertexts under different parameters.
Ciphertext add(const Ciphertext& x, const Ciphertext& y);
Ciphertext sub(const Ciphertext& x, const Ciphertext& y);
// Degree adds.
Ciphertext mul(const Ciphertext& x, const Ciphertext& y);

// Size of the decryption phase before the final mod p: decryption is exact
// while max_abs < q/2. headroom = (q/2) / max_abs.
struct NoiseReport {
  u128 max_abs = 0;
  double headroom = 0.0;
};

NoiseReport measure_noise(const SecretKey& sk, const Ciphertext& ct);

}  // namespace voicesearch::ringhe
