#include <gtest/gtest.h>

#include "test_util.hpp"
#include "voicesearch/common/error.hpp"
#include "voicesearch/ringhe/codec.hpp"
#include "voicesearch/ringhe/he.hpp"
#include "voicesearch/ringhe/modulus.hpp"
#include "voicesearch/ringhe/ring.hpp"
#include "voicesearch/ringhe/serialize.hpp"

using namespace voicesearch;
using namespace voicesearch::ringhe;

namespace {

const u128 kQ = HeParams::defaults().q;

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return Errc::io;
}

std::int64_t dec(const SecretKey& sk, const Ciphertext& ct) { return decrypt(sk, ct).coeffs[0]; }

Ciphertext enc(const PublicKey& pk, std::int64_t m, RandomSource& rng) {
  return encrypt(pk, scalar_plaintext(*pk.context(), m), rng);
}

std::int64_t centered_mod(i128 x, std::int64_t p) {
  i128 r = x % p;
  if (r < 0) r += p;
  if (r > p / 2) r -= p;
  return static_cast<std::int64_t>(r);
}

struct HeFixture : ::testing::Test {
  const keys::KeyMaterial& k = vs_test::shared_keys();
  const SecretKey& sk = k.he.secret;
  const PublicKey& pk = k.he.pub;
  std::int64_t p = static_cast<std::int64_t>(k.context->params().p);
  SeededRandom rng{99};
};

}  // namespace

TEST(Modulus, DecimalRoundtrip) {
  EXPECT_EQ(to_decimal(kQ), "1267650600228229401496704974849");
  EXPECT_EQ(parse_u128(to_decimal(kQ)), kQ);
  EXPECT_EQ(to_decimal(i128{-42}), "-42");
  EXPECT_EQ(code_of([] { parse_u128("12a"); }), Errc::malformed_request);
  EXPECT_EQ(code_of([] { parse_u128("999999999999999999999999999999999999999999"); }), Errc::malformed_request);
}

TEST(Modulus, AgainstPythonBigInts) {
  const Modulus m(kQ);
  EXPECT_EQ(to_decimal(m.inverse(3)), "422550200076076467165568324950");
  EXPECT_EQ(to_decimal(m.pow(123456789, 1000003)), "582773092230359771117803963418");
  EXPECT_EQ(m.mul(m.inverse(3), 3), 1u);
}

TEST(Modulus, MulMatchesWideDivision) {
  const Modulus m(kQ);
  SeededRandom rng(4);
  for (int i = 0; i < 2000; ++i) {
    const u128 a = ((u128{rng.next_u64()} << 64) | rng.next_u64()) % kQ;
    const u128 b = ((u128{rng.next_u64()} << 64) | rng.next_u64()) % kQ;
    // Shift-and-add reference: a * b = sum over bits of b of a * 2^i.
    u128 ref = 0, acc = a;
    for (u128 t = b; t != 0; t >>= 1) {
      if (t & 1) ref = (ref + acc) % kQ;
      acc = (acc + acc) % kQ;
    }
    ASSERT_EQ(m.mul(a, b), ref);
    ASSERT_EQ(m.add(a, b), (a + b) % kQ);
    ASSERT_EQ(m.sub(a, b), (a + kQ - b) % kQ);
  }
}

TEST(Modulus, PrimalityAndDefaults) {
  EXPECT_TRUE(is_probable_prime(kQ));
  EXPECT_TRUE(is_probable_prime(1073741827));
  EXPECT_FALSE(is_probable_prime(1073741825));
  EXPECT_FALSE(is_probable_prime(u128{561}));  // Carmichael
  // p is the first prime above 2^30.
  for (std::uint64_t c = (1ULL << 30) + 1; c < 1073741827; ++c) EXPECT_FALSE(is_probable_prime(c)) << c;
  EXPECT_EQ(kQ % 4, 1u);
  EXPECT_EQ(kQ % 2048, 1u);
}

TEST(Ring, NttMatchesPythonSchoolbook) {
  const Ring r(8, kQ);
  ASSERT_TRUE(r.has_ntt());
  Poly a(8), b(8);
  for (u128 i = 0; i < 8; ++i) {
    a[i] = i * i + 1;
    b[i] = 3 * i + 2;
  }
  const std::vector<std::string> small = {
      "1267650600228229401496704973465", "1267650600228229401496704973083", "1267650600228229401496704972797",
      "1267650600228229401496704972681", "1267650600228229401496704972821", "1267650600228229401496704973315",
      "1267650600228229401496704974273", "968"};
  auto prod = r.multiply(a, b);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(to_decimal(prod[i]), small[i]);

  for (u128 i = 0; i < 8; ++i) {
    a[i] = kQ - 1 - i;
    b[i] = kQ / (i + 2);
  }
  const std::vector<std::string> big = {
      "150407749788984361526791582315",  "778699654425912346633690198821", "350616058872649163826668002950",
      "1190183063547615382516350781934", "677589427979136906276214921081", "44267163817493725131630967380",
      "542775792716769652466247884080",  "900434354924020090745675359138"};
  prod = r.multiply(a, b);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(to_decimal(prod[i]), big[i]);
}

TEST(Ring, NttMatchesSchoolbookAtFullDegree) {
  const Ring r(1024, kQ);
  SeededRandom rng(8);
  const Poly a = r.sample_uniform(rng), b = r.sample_uniform(rng);
  EXPECT_EQ(r.multiply(a, b), r.schoolbook(a, b));
  Poly t = a;
  r.forward(t);
  r.inverse(t);
  EXPECT_EQ(t, a);
}

TEST(Ring, FallbackWithoutNtt) {
  // 13 = 1 (mod 4) but not 1 (mod 16): no 16th roots of unity.
  const Ring r(8, 13);
  EXPECT_FALSE(r.has_ntt());
  Poly x(8, 0), y(8, 0);
  x[7] = 1;
  y[1] = 1;
  const Poly prod = r.multiply(x, y);  // x^8 = -1
  EXPECT_EQ(prod[0], 12u);
}

TEST(Ring, GaussianIsBounded) {
  SeededRandom rng(2);
  const auto v = sample_gaussian(100000, 3.2, rng);
  double sum = 0, sq = 0;
  for (auto x : v) {
    ASSERT_LE(std::abs(x), 20);  // 6 sigma, rounded
    sum += double(x);
    sq += double(x) * double(x);
  }
  EXPECT_NEAR(sum / v.size(), 0.0, 0.05);
  EXPECT_NEAR(std::sqrt(sq / v.size()), 3.2, 0.05);
}

TEST(Params, Validation) {
  EXPECT_NO_THROW(HeParams::defaults().validate());
  EXPECT_NO_THROW(HeParams::two_term_ring().validate());
  auto bad = HeParams::defaults();
  bad.q = kQ + 2;  // composite
  EXPECT_EQ(code_of([&] { bad.validate(); }), Errc::invalid_params);
  bad = HeParams::defaults();
  bad.n = 1000;
  EXPECT_EQ(code_of([&] { bad.validate(); }), Errc::invalid_params);
  bad = HeParams::defaults();
  bad.p = 1073741825;
  EXPECT_EQ(code_of([&] { bad.validate(); }), Errc::invalid_params);
  bad = HeParams::defaults();
  bad.q = 7;  // 3 mod 4
  bad.p = 3;
  EXPECT_EQ(code_of([&] { bad.validate(); }), Errc::invalid_params);
}

TEST_F(HeFixture, KeygenIdentity) {
  const Ring& r = k.context->ring();
  const Poly lhs = r.add(pk.a(), r.multiply(pk.b(), sk.poly()));  // = -p e
  const Modulus& m = r.modulus();
  for (u128 c : lhs) {
    const i128 v = m.centered(c);
    ASSERT_EQ(v % p, 0);
    ASSERT_LE(v / p < 0 ? -(v / p) : v / p, 20);
  }
}

TEST_F(HeFixture, RoundtripExamples) {
  EXPECT_EQ(dec(sk, enc(pk, 0, rng)), 0);
  std::uniform_int_distribution<std::int64_t> u(-(p - 1) / 2, (p - 1) / 2);
  for (int i = 0; i < 500; ++i) {
    const auto m = u(rng);
    ASSERT_EQ(dec(sk, enc(pk, m, rng)), m);
  }
  EXPECT_EQ(dec(sk, enc(pk, (p - 1) / 2, rng)), (p - 1) / 2);
  EXPECT_EQ(dec(sk, enc(pk, -(p - 1) / 2, rng)), -(p - 1) / 2);
}

TEST_F(HeFixture, FreshCiphertextsDifferAndHaveDegreeOne) {
  const auto a = enc(pk, 7, rng), b = enc(pk, 7, rng);
  EXPECT_EQ(a.degree(), 1u);
  EXPECT_FALSE(a == b);
}

TEST_F(HeFixture, MessageOutOfRange) {
  EXPECT_EQ(code_of([&] { enc(pk, (p + 1) / 2, rng); }), Errc::message_out_of_range);
  EXPECT_EQ(code_of([&] { enc(pk, -(p + 1) / 2, rng); }), Errc::message_out_of_range);
}

TEST_F(HeFixture, ZeroCiphertextDecryptsToZero) {
  const auto zero = Ciphertext::from_coefficients(k.context, {Poly(1024, 0), Poly(1024, 0)});
  EXPECT_EQ(dec(sk, zero), 0);
}

TEST_F(HeFixture, ArithmeticExamples) {
  EXPECT_EQ(dec(sk, add(enc(pk, 3, rng), enc(pk, 4, rng))), 7);
  const auto ct = enc(pk, 123, rng);
  EXPECT_EQ(dec(sk, add(ct, enc(pk, 0, rng))), 123);
  EXPECT_EQ(dec(sk, sub(enc(pk, 5, rng), enc(pk, 9, rng))), -4);
  const auto prod = mul(enc(pk, 3, rng), enc(pk, 4, rng));
  EXPECT_EQ(prod.degree(), 2u);
  EXPECT_EQ(dec(sk, prod), 12);
  EXPECT_EQ(dec(sk, mul(enc(pk, 987, rng), enc(pk, 0, rng))), 0);
  // Mixed degrees zero-pad.
  EXPECT_EQ(dec(sk, add(prod, enc(pk, 1, rng))), 13);
  EXPECT_EQ(dec(sk, sub(enc(pk, 1, rng), prod)), -11);
}

TEST_F(HeFixture, SquaredDifferenceShape) {
  std::uniform_int_distribution<std::int64_t> u(-3000, 3000);
  for (int i = 0; i < 50; ++i) {
    const auto a = u(rng), b = u(rng);
    const auto d = sub(enc(pk, a, rng), enc(pk, b, rng));
    ASSERT_EQ(dec(sk, mul(d, d)), (a - b) * (a - b));
  }
}

TEST_F(HeFixture, ProductWrapsModP) {
  const std::int64_t a = p / 3, b = 5;
  EXPECT_EQ(dec(sk, mul(enc(pk, a, rng), enc(pk, b, rng))), centered_mod(i128{a} * b, p));
}

TEST_F(HeFixture, NoiseHeadroomForDistanceShape) {
  // 36 squared differences summed: the deepest circuit the system runs.
  Ciphertext acc = enc(pk, 0, rng);
  for (int j = 0; j < 36; ++j) {
    const auto d = sub(enc(pk, 1536, rng), enc(pk, -1536, rng));
    acc = add(acc, mul(d, d));
  }
  EXPECT_EQ(dec(sk, acc), 36LL * 3072 * 3072);
  const auto report = measure_noise(sk, acc);
  EXPECT_GE(report.headroom, 2.0);
}

TEST_F(HeFixture, ParamMismatch) {
  SeededRandom r2(1);
  auto small = keygen(HeContext::create(HeParams::two_term_ring()), r2);
  const auto a = enc(pk, 1, rng);
  const auto b = encrypt(small.pub, scalar_plaintext(*small.pub.context(), 1), rng);
  EXPECT_EQ(code_of([&] { add(a, b); }), Errc::param_mismatch);
  EXPECT_EQ(code_of([&] { mul(a, b); }), Errc::param_mismatch);
  EXPECT_EQ(code_of([&] { decrypt(small.secret, a); }), Errc::param_mismatch);
}

TEST(TwoTermRing, PaperSizedRingStillCorrect) {
  SeededRandom rng(17);
  auto pair = keygen(HeContext::create(HeParams::two_term_ring()), rng);
  const auto& pk = pair.pub;
  for (int i = 0; i < 200; ++i) {
    const std::int64_t a = std::int64_t(rng.next_u64() % 2001) - 1000;
    const std::int64_t b = std::int64_t(rng.next_u64() % 2001) - 1000;
    const auto d = sub(enc(pk, a, rng), enc(pk, b, rng));
    ASSERT_EQ(dec(pair.secret, mul(d, d)), (a - b) * (a - b));
  }
}

TEST_F(HeFixture, Serialization) {
  const auto ct = mul(enc(pk, 6, rng), enc(pk, 7, rng));
  const auto j = ciphertext_to_json(ct);
  EXPECT_EQ(j.at("deg"), 2);
  const auto back = ciphertext_from_json(j, k.context);
  EXPECT_TRUE(back == ct);
  EXPECT_EQ(dec(sk, back), 42);

  auto bad = j;
  bad["polys"][0][0] = to_decimal(kQ);  // out of range
  EXPECT_EQ(code_of([&] { ciphertext_from_json(bad, k.context); }), Errc::malformed_record);
  bad = j;
  bad["deg"] = 1;
  EXPECT_EQ(code_of([&] { ciphertext_from_json(bad, k.context); }), Errc::malformed_record);
  bad = j;
  bad["polys"][1].erase(0);
  EXPECT_EQ(code_of([&] { ciphertext_from_json(bad, k.context); }), Errc::malformed_record);

  EXPECT_EQ(params_from_json(params_to_json(HeParams::defaults())), HeParams::defaults());
}

TEST_F(HeFixture, FixedPointCodec) {
  const auto& ctx = *k.context;
  EXPECT_EQ(encode_fixed(ctx, 0.0).coeffs[0], 0);
  EXPECT_EQ(encode_fixed(ctx, 6.960).coeffs[0], 111);
  EXPECT_EQ(decode_fixed(ctx, encode_fixed(ctx, 6.960)), 6.9375);
  EXPECT_LE(std::abs(decode_fixed(ctx, encode_fixed(ctx, 6.960)) - 6.960), 1.0 / 32.0);
  EXPECT_EQ(encode_fixed(ctx, -0.252).coeffs[0], -4);
  EXPECT_EQ(decode_fixed(ctx, scalar_plaintext(ctx, 512), 2), 2.0);
  EXPECT_EQ(code_of([&] { encode_fixed(ctx, 1e9); }), Errc::encoding_overflow);
}
