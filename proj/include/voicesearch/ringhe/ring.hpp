#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "voicesearch/common/random.hpp"
#include "voicesearch/ringhe/modulus.hpp"

namespace voicesearch::ringhe {

// Element of Z_q[x]/(x^n + 1): n coefficients in [0, q).
using Poly = std::vector<u128>;

// Negacyclic ring arithmetic. Uses a merged negacyclic NTT when q = 1 (mod 2n)
// and falls back to schoolbook multiplication otherwise.
class Ring {
 public:
  Ring(std::size_t n, u128 q);

  std::size_t degree() const { return n_; }
  const Modulus& modulus() const { return mod_; }
  bool has_ntt() const { return !psi_rev_.empty(); }

  Poly zero() const { return Poly(n_, 0); }
  Poly constant(u128 c) const;

  Poly add(const Poly& a, const Poly& b) const;
  Poly sub(const Poly& a, const Poly& b) const;
  void add_inplace(Poly& a, const Poly& b) const;
  Poly scale(const Poly& a, u128 c) const;

  // Coefficient-form product (NTT when available, schoolbook otherwise).
  Poly multiply(const Poly& a, const Poly& b) const;
  Poly schoolbook(const Poly& a, const Poly& b) const;

  // Evaluation form: the NTT image when available, the coefficients
  // otherwise. add/sub/scale act identically in both forms; products of
  // evaluation-form operands go through eval_mul.
  Poly to_eval(Poly p) const;
  Poly from_eval(Poly p) const;
  Poly eval_mul(const Poly& a, const Poly& b) const;

  // In-place transforms; forward leaves bit-reversed order.
  void forward(Poly& a) const;
  void inverse(Poly& a) const;
  Poly pointwise(const Poly& a, const Poly& b) const;

  Poly from_signed(std::span<const std::int64_t> v) const;
  Poly sample_uniform(RandomSource& rng) const;

 private:
  std::size_t n_;
  Modulus mod_;
  // Montgomery-form powers of psi (a primitive 2n-th root) in bit-reversed
  // order, their inverses, and n^{-1}.
  std::vector<u128> psi_rev_;
  std::vector<u128> psi_inv_rev_;
  u128 n_inv_mont_ = 0;
};

// Rounded continuous Gaussian, rejected beyond 6 sigma.
std::vector<std::int64_t> sample_gaussian(std::size_t n, double sigma, RandomSource& rng);

}  // namespace voicesearch::ringhe
