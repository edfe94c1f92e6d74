#include "voicesearch/ringhe/ring.hpp"

#include <cmath>
#include <random>

#include "voicesearch/common/error.hpp"

namespace voicesearch::ringhe {
namespace {

std::size_t bit_reverse(std::size_t x, int bits) {
  std::size_t r = 0;
  for (int i = 0; i < bits; ++i) {
    r = (r << 1) | (x & 1);
    x >>= 1;
  }
  return r;
}

}  // namespace

Ring::Ring(std::size_t n, u128 q) : n_(n), mod_(q) {
  if (n < 2 || (n & (n - 1)) != 0) throw Error(Errc::invalid_params, "ring degree must be a power of two >= 2");
  const u128 two_n = 2 * static_cast<u128>(n);
  if ((q - 1) % two_n != 0) return;

  // psi = g^((q-1)/2n) has order exactly 2n iff psi^n = -1.
  u128 psi = 0;
  for (u128 g = 2; g < 1000; ++g) {
    const u128 candidate = mod_.pow(g, (q - 1) / two_n);
    if (mod_.pow(candidate, n) == q - 1) {
      psi = candidate;
      break;
    }
  }
  if (psi == 0) return;

  int logn = 0;
  while ((std::size_t{1} << logn) < n) ++logn;
  const u128 psi_inv = mod_.inverse(psi);
  psi_rev_.resize(n);
  psi_inv_rev_.resize(n);
  u128 pw = 1, pw_inv = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = bit_reverse(i, logn);
    psi_rev_[r] = mod_.to_mont(pw);
    psi_inv_rev_[r] = mod_.to_mont(pw_inv);
    pw = mod_.mul(pw, psi);
    pw_inv = mod_.mul(pw_inv, psi_inv);
  }
  n_inv_mont_ = mod_.to_mont(mod_.inverse(static_cast<u128>(n)));
}

Poly Ring::constant(u128 c) const {
  Poly p(n_, 0);
  p[0] = c % mod_.value();
  return p;
}

Poly Ring::add(const Poly& a, const Poly& b) const {
  Poly r(n_);
  for (std::size_t i = 0; i < n_; ++i) r[i] = mod_.add(a[i], b[i]);
  return r;
}

Poly Ring::sub(const Poly& a, const Poly& b) const {
  Poly r(n_);
  for (std::size_t i = 0; i < n_; ++i) r[i] = mod_.sub(a[i], b[i]);
  return r;
}

void Ring::add_inplace(Poly& a, const Poly& b) const {
  for (std::size_t i = 0; i < n_; ++i) a[i] = mod_.add(a[i], b[i]);
}

Poly Ring::scale(const Poly& a, u128 c) const {
  const u128 cm = mod_.to_mont(c % mod_.value());
  Poly r(n_);
  for (std::size_t i = 0; i < n_; ++i) r[i] = mod_.mul_mont(a[i], cm);
  return r;
}

void Ring::forward(Poly& a) const {
  std::size_t t = n_;
  for (std::size_t m = 1; m < n_; m <<= 1) {
    t >>= 1;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j1 = 2 * i * t;
      const u128 w = psi_rev_[m + i];
      for (std::size_t j = j1; j < j1 + t; ++j) {
        const u128 u = a[j];
        const u128 v = mod_.mul_mont(a[j + t], w);
        a[j] = mod_.add(u, v);
        a[j + t] = mod_.sub(u, v);
      }
    }
  }
}

void Ring::inverse(Poly& a) const {
  std::size_t t = 1;
  for (std::size_t m = n_; m > 1; m >>= 1) {
    const std::size_t h = m >> 1;
    std::size_t j1 = 0;
    for (std::size_t i = 0; i < h; ++i) {
      const u128 w = psi_inv_rev_[h + i];
      for (std::size_t j = j1; j < j1 + t; ++j) {
        const u128 u = a[j];
        const u128 v = a[j + t];
        a[j] = mod_.add(u, v);
        a[j + t] = mod_.mul_mont(mod_.sub(u, v), w);
      }
      j1 += 2 * t;
    }
    t <<= 1;
  }
  for (auto& x : a) x = mod_.mul_mont(x, n_inv_mont_);
}

Poly Ring::pointwise(const Poly& a, const Poly& b) const {
  Poly r(n_);
  for (std::size_t i = 0; i < n_; ++i) r[i] = mod_.mul(a[i], b[i]);
  return r;
}

Poly Ring::schoolbook(const Poly& a, const Poly& b) const {
  Poly r(n_, 0);
  for (std::size_t i = 0; i < n_; ++i) {
    if (a[i] == 0) continue;
    const u128 am = mod_.to_mont(a[i]);
    for (std::size_t j = 0; j < n_; ++j) {
      const u128 prod = mod_.mul_mont(b[j], am);
      const std::size_t k = i + j;
      // x^n = -1
      if (k < n_) {
        r[k] = mod_.add(r[k], prod);
      } else {
        r[k - n_] = mod_.sub(r[k - n_], prod);
      }
    }
  }
  return r;
}

Poly Ring::multiply(const Poly& a, const Poly& b) const {
  if (!has_ntt()) return schoolbook(a, b);
  return from_eval(eval_mul(to_eval(a), to_eval(b)));
}

Poly Ring::to_eval(Poly p) const {
  if (has_ntt()) forward(p);
  return p;
}

Poly Ring::from_eval(Poly p) const {
  if (has_ntt()) inverse(p);
  return p;
}

Poly Ring::eval_mul(const Poly& a, const Poly& b) const {
  return has_ntt() ? pointwise(a, b) : schoolbook(a, b);
}

Poly Ring::from_signed(std::span<const std::int64_t> v) const {
  Poly p(n_);
  for (std::size_t i = 0; i < n_; ++i) p[i] = mod_.from_signed(v[i]);
  return p;
}

Poly Ring::sample_uniform(RandomSource& rng) const {
  const u128 q = mod_.value();
  const int bits = bit_length(q);
  const u128 mask = bits >= 128 ? ~u128{0} : ((u128{1} << bits) - 1);
  Poly p(n_);
  for (auto& c : p) {
    u128 x;
    do {
      x = ((static_cast<u128>(rng.next_u64()) << 64) | rng.next_u64()) & mask;
    } while (x >= q);
    c = x;
  }
  return p;
}

std::vector<std::int64_t> sample_gaussian(std::size_t n, double sigma, RandomSource& rng) {
  std::normal_distribution<double> dist(0.0, sigma);
  const double bound = 6.0 * sigma;
  std::vector<std::int64_t> out(n);
  for (auto& x : out) {
    double v;
    do {
      v = std::round(dist(rng));
    } while (std::fabs(v) > bound);
    x = static_cast<std::int64_t>(v);
  }
  return out;
}

}  // namespace voicesearch::ringhe
