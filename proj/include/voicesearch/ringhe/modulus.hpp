#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace voicesearch::ringhe {

using u128 = unsigned __int128;
using i128 = __int128;

std::string to_decimal(u128 v);
std::string to_decimal(i128 v);
// Throws Error(malformed_request) on anything but a plain decimal string
// that fits in 128 bits.
u128 parse_u128(std::string_view text);

int bit_length(u128 v);

struct U256 {
  u128 hi;
  u128 lo;
};

inline U256 mul_wide(u128 a, u128 b) {
  const auto a0 = static_cast<std::uint64_t>(a), a1 = static_cast<std::uint64_t>(a >> 64);
  const auto b0 = static_cast<std::uint64_t>(b), b1 = static_cast<std::uint64_t>(b >> 64);
  const u128 p00 = static_cast<u128>(a0) * b0;
  const u128 p01 = static_cast<u128>(a0) * b1;
  const u128 p10 = static_cast<u128>(a1) * b0;
  const u128 p11 = static_cast<u128>(a1) * b1;
  const u128 mid = (p00 >> 64) + static_cast<std::uint64_t>(p01) + static_cast<std::uint64_t>(p10);
  return {p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64),
          (mid << 64) | static_cast<std::uint64_t>(p00)};
}

// Arithmetic modulo an odd q < 2^127 with Montgomery reduction (R = 2^128).
// Plain-form operands are in [0, q).
class Modulus {
 public:
  explicit Modulus(u128 q);

  u128 value() const { return q_; }

  // Reductions are branch-free: operands are effectively random, so a
  // conditional subtract mispredicts half the time.
  u128 add(u128 a, u128 b) const { return reduce_once(a + b); }
  u128 sub(u128 a, u128 b) const {
    const u128 d = a - b;
    return d + (q_ & mask_if(a < b));
  }
  u128 neg(u128 a) const { return a == 0 ? 0 : q_ - a; }

  // (t.hi * 2^128 + t.lo) / 2^128 mod q, valid for t < q * 2^128.
  u128 redc(U256 t) const {
    const u128 m = t.lo * qinv_neg_;
    const U256 mq = mul_wide(m, q_);
    return reduce_once(t.hi + mq.hi + static_cast<u128>(t.lo != 0));
  }

  // a * b mod q where b_mont = b * R mod q.
  u128 mul_mont(u128 a, u128 b_mont) const { return redc(mul_wide(a, b_mont)); }
  u128 to_mont(u128 a) const { return redc(mul_wide(a, r2_)); }
  u128 from_mont(u128 a) const { return redc({0, a}); }
  u128 mul(u128 a, u128 b) const { return redc(mul_wide(redc(mul_wide(a, b)), r2_)); }

  u128 pow(u128 base, u128 exp) const;
  // q must be prime.
  u128 inverse(u128 a) const { return pow(a, q_ - 2); }

  // Maps a signed integer into [0, q).
  u128 from_signed(std::int64_t v) const {
    const u128 mag = v >= 0 ? static_cast<u128>(v) : static_cast<u128>(-static_cast<i128>(v));
    const u128 r = mag < q_ ? mag : mag % q_;
    return v >= 0 ? r : neg(r);
  }
  // Centered representative in (-q/2, q/2].
  i128 centered(u128 a) const {
    return a > q_ / 2 ? -static_cast<i128>(q_ - a) : static_cast<i128>(a);
  }

 private:
  static u128 mask_if(bool c) { return u128{0} - static_cast<u128>(c); }
  u128 reduce_once(u128 x) const { return x - (q_ & mask_if(x >= q_)); }

  u128 q_;
  u128 qinv_neg_;  // -q^{-1} mod 2^128
  u128 r2_;        // 2^256 mod q
};

// Miller-Rabin over the first 24 prime bases.
bool is_probable_prime(u128 n);

}  // namespace voicesearch::ringhe
