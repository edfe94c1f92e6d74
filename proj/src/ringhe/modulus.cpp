#include "voicesearch/ringhe/modulus.hpp"

#include <algorithm>
#include <array>

#include "voicesearch/common/error.hpp"

namespace voicesearch::ringhe {

std::string to_decimal(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v != 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

std::string to_decimal(i128 v) {
  if (v >= 0) return to_decimal(static_cast<u128>(v));
  return "-" + to_decimal(static_cast<u128>(-(v + 1)) + 1);
}

u128 parse_u128(std::string_view text) {
  if (text.empty() || text.size() > 39) {
    throw Error(Errc::malformed_request, "bad integer '" + std::string(text) + "'");
  }
  u128 v = 0;
  for (char c : text) {
    if (c < '0' || c > '9') throw Error(Errc::malformed_request, "bad integer '" + std::string(text) + "'");
    const u128 next = v * 10 + static_cast<u128>(c - '0');
    if (next / 10 != v) throw Error(Errc::malformed_request, "integer overflows 128 bits");
    v = next;
  }
  return v;
}

int bit_length(u128 v) {
  int n = 0;
  while (v != 0) {
    ++n;
    v >>= 1;
  }
  return n;
}

Modulus::Modulus(u128 q) : q_(q) {
  if (q < 3 || (q & 1) == 0 || bit_length(q) > 127) {
    throw Error(Errc::invalid_params, "modulus must be odd and below 2^127");
  }
  // Newton iteration for q^{-1} mod 2^128; each step doubles the correct bits.
  u128 inv = q;
  for (int i = 0; i < 7; ++i) inv *= 2 - q * inv;
  qinv_neg_ = -inv;
  // 2^128 mod q, then doubled 128 more times.
  u128 r = (-q) % q;
  for (int i = 0; i < 128; ++i) r = add(r, r);
  r2_ = r;
}

u128 Modulus::pow(u128 base, u128 exp) const {
  u128 result = to_mont(1);
  u128 b = to_mont(base % q_);
  while (exp != 0) {
    if (exp & 1) result = redc(mul_wide(result, b));
    b = redc(mul_wide(b, b));
    exp >>= 1;
  }
  return from_mont(result);
}

bool is_probable_prime(u128 n) {
  static constexpr std::array<std::uint32_t, 24> bases = {2,  3,  5,  7,  11, 13, 17, 19,
                                                          23, 29, 31, 37, 41, 43, 47, 53,
                                                          59, 61, 67, 71, 73, 79, 83, 89};
  if (n < 2) return false;
  for (auto b : bases) {
    if (n == b) return true;
    if (n % b == 0) return false;
  }
  if (bit_length(n) > 127) return false;
  const Modulus m(n);
  u128 d = n - 1;
  int r = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++r;
  }
  for (auto b : bases) {
    u128 x = m.pow(b, d);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < r; ++i) {
      x = m.mul(x, x);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

}  // namespace voicesearch::ringhe
