#include "voicesearch/ringhe/he.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "voicesearch/common/error.hpp"

namespace voicesearch::ringhe {
namespace {

void require_same(const ContextPtr& a, const ContextPtr& b) {
  if (a != b && a->params() != b->params()) {
    throw Error(Errc::param_mismatch, "operands use different HE parameters");
  }
}

// Lifts a value mod q to its centered representative and reduces it into
// the centered range mod p.
std::int64_t reduce_to_plaintext(const Modulus& mq, std::uint64_t p, u128 v) {
  const i128 centered = mq.centered(v);
  i128 r = centered % static_cast<i128>(p);
  if (r < 0) r += p;
  if (r > static_cast<i128>(p / 2)) r -= p;
  return static_cast<std::int64_t>(r);
}

Ciphertext combine(const Ciphertext& x, const Ciphertext& y, bool subtract) {
  require_same(x.context(), y.context());
  const Ring& ring = x.context()->ring();
  const auto& xs = x.eval_polys();
  const auto& ys = y.eval_polys();
  const std::size_t len = std::max(xs.size(), ys.size());
  std::vector<Poly> out;
  out.reserve(len);
  for (std::size_t k = 0; k < len; ++k) {
    const Poly a = k < xs.size() ? xs[k] : ring.zero();
    if (k >= ys.size()) {
      out.push_back(a);
    } else {
      out.push_back(subtract ? ring.sub(a, ys[k]) : ring.add(a, ys[k]));
    }
  }
  return Ciphertext::from_eval(x.context(), std::move(out));
}

// sum_k c_k s^k in coefficient form.
Poly decryption_phase(const SecretKey& sk, const Ciphertext& ct) {
  const Ring& ring = sk.context()->ring();
  const auto& c = ct.eval_polys();
  Poly acc = c.back();
  for (std::size_t k = c.size() - 1; k-- > 0;) acc = ring.add(ring.eval_mul(acc, sk.eval()), c[k]);
  return ring.from_eval(std::move(acc));
}

}  // namespace

HeParams HeParams::defaults() {
  HeParams p;
  p.p = 1073741827ULL;
  // 2^100 + 27 * 2^16 + 1
  p.q = (u128{1} << 100) + (u128{27} << 16) + 1;
  p.n = 1024;
  p.sigma = 3.2;
  p.scale = 16;
  return p;
}

HeParams HeParams::two_term_ring() {
  HeParams p = defaults();
  p.n = 2;
  return p;
}

void HeParams::validate() const {
  auto bad = [](const std::string& why) { return Error(Errc::invalid_params, why); };
  if (p < 3 || p >= (std::uint64_t{1} << 62) || !is_probable_prime(p)) {
    throw bad("p must be an odd prime below 2^62");
  }
  if (bit_length(q) > 126 || !is_probable_prime(q)) throw bad("q must be a prime below 2^126");
  if (static_cast<u128>(p) > q) throw bad("need p <= q");
  if (q % 4 != 1) throw bad("need q = 1 (mod 4)");
  if (n < 2 || (n & (n - 1)) != 0) throw bad("n must be a power of two >= 2");
  if (!(sigma > 0.0)) throw bad("sigma must be positive");
  if (scale < 1) throw bad("scale must be >= 1");
}

HeContext::HeContext(const HeParams& params) : params_(params), ring_(params.n, params.q) {}

std::shared_ptr<const HeContext> HeContext::create(const HeParams& params) {
  params.validate();
  return std::shared_ptr<const HeContext>(new HeContext(params));
}

PlaintextPoly scalar_plaintext(const HeContext& ctx, std::int64_t value) {
  PlaintextPoly m{std::vector<std::int64_t>(ctx.params().n, 0)};
  m.coeffs[0] = value;
  return m;
}

Ciphertext::Ciphertext(ContextPtr ctx, std::vector<Poly> eval) : ctx_(std::move(ctx)), eval_(std::move(eval)) {}

Ciphertext Ciphertext::from_coefficients(ContextPtr ctx, std::vector<Poly> polys) {
  if (!ctx) throw Error(Errc::invalid_params, "ciphertext without context");
  if (polys.empty()) throw Error(Errc::malformed_record, "ciphertext needs at least one polynomial");
  const u128 q = ctx->params().q;
  for (auto& poly : polys) {
    if (poly.size() != ctx->params().n) {
      throw Error(Errc::malformed_record, "polynomial has wrong coefficient count");
    }
    for (u128 c : poly) {
      if (c >= q) throw Error(Errc::malformed_record, "coefficient outside [0, q)");
    }
    poly = ctx->ring().to_eval(std::move(poly));
  }
  return Ciphertext(std::move(ctx), std::move(polys));
}

Ciphertext Ciphertext::from_eval(ContextPtr ctx, std::vector<Poly> eval_polys) {
  if (!ctx) throw Error(Errc::invalid_params, "ciphertext without context");
  if (eval_polys.empty()) throw Error(Errc::malformed_record, "ciphertext needs at least one polynomial");
  return Ciphertext(std::move(ctx), std::move(eval_polys));
}

std::vector<Poly> Ciphertext::coefficients() const {
  std::vector<Poly> out;
  out.reserve(eval_.size());
  for (const auto& p : eval_) out.push_back(ctx_->ring().from_eval(p));
  return out;
}

SecretKey::SecretKey(ContextPtr ctx, Poly s)
    : ctx_(std::move(ctx)), s_(std::move(s)), s_eval_(ctx_->ring().to_eval(s_)) {}

PublicKey::PublicKey(ContextPtr ctx, Poly a, Poly b)
    : ctx_(std::move(ctx)),
      a_(std::move(a)),
      b_(std::move(b)),
      a_eval_(ctx_->ring().to_eval(a_)),
      b_eval_(ctx_->ring().to_eval(b_)) {}

KeyPair keygen(const ContextPtr& ctx, RandomSource& rng) {
  const HeParams& params = ctx->params();
  const Ring& ring = ctx->ring();
  const Poly s = ring.from_signed(sample_gaussian(params.n, params.sigma, rng));
  const Poly e = ring.from_signed(sample_gaussian(params.n, params.sigma, rng));
  const Poly b = ring.sample_uniform(rng);
  const Poly bs = ring.multiply(b, s);
  const Poly a = ring.sub(ring.zero(), ring.add(bs, ring.scale(e, params.p)));
  return KeyPair{SecretKey(ctx, s), PublicKey(ctx, a, b)};
}

Ciphertext encrypt(const PublicKey& pk, const PlaintextPoly& m, RandomSource& rng) {
  const ContextPtr& ctx = pk.context();
  const HeParams& params = ctx->params();
  const Ring& ring = ctx->ring();
  if (m.coeffs.size() != params.n) {
    throw Error(Errc::message_out_of_range, "plaintext has wrong coefficient count");
  }
  // p is odd, so (-p/2, p/2] is [-(p-1)/2, (p-1)/2].
  const auto half = static_cast<std::int64_t>(params.p / 2);
  for (auto c : m.coeffs) {
    if (c < -half || c > half) {
      throw Error(Errc::message_out_of_range, "coefficient " + std::to_string(c) + " outside (-p/2, p/2]");
    }
  }

  const Poly u = ring.to_eval(ring.from_signed(sample_gaussian(params.n, params.sigma, rng)));
  const Poly f = ring.from_signed(sample_gaussian(params.n, params.sigma, rng));
  const Poly g = ring.from_signed(sample_gaussian(params.n, params.sigma, rng));

  Poly c0 = ring.eval_mul(pk.a_eval(), u);
  ring.add_inplace(c0, ring.to_eval(ring.add(ring.scale(g, params.p), ring.from_signed(m.coeffs))));
  Poly c1 = ring.eval_mul(pk.b_eval(), u);
  ring.add_inplace(c1, ring.to_eval(ring.scale(f, params.p)));
  return Ciphertext::from_eval(ctx, {std::move(c0), std::move(c1)});
}

PlaintextPoly decrypt(const SecretKey& sk, const Ciphertext& ct) {
  require_same(sk.context(), ct.context());
  const HeParams& params = sk.context()->params();
  const Ring& ring = sk.context()->ring();
  const Poly phase = decryption_phase(sk, ct);
  PlaintextPoly m{std::vector<std::int64_t>(params.n)};
  for (std::size_t i = 0; i < params.n; ++i) {
    m.coeffs[i] = reduce_to_plaintext(ring.modulus(), params.p, phase[i]);
  }
  return m;
}

Ciphertext add(const Ciphertext& x, const Ciphertext& y) { return combine(x, y, false); }

Ciphertext sub(const Ciphertext& x, const Ciphertext& y) { return combine(x, y, true); }

Ciphertext mul(const Ciphertext& x, const Ciphertext& y) {
  require_same(x.context(), y.context());
  const Ring& ring = x.context()->ring();
  const auto& xs = x.eval_polys();
  const auto& ys = y.eval_polys();
  std::vector<Poly> out(xs.size() + ys.size() - 1, ring.zero());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ys.size(); ++j) ring.add_inplace(out[i + j], ring.eval_mul(xs[i], ys[j]));
  }
  return Ciphertext::from_eval(x.context(), std::move(out));
}

NoiseReport measure_noise(const SecretKey& sk, const Ciphertext& ct) {
  require_same(sk.context(), ct.context());
  const Ring& ring = sk.context()->ring();
  const Poly phase = decryption_phase(sk, ct);
  NoiseReport report;
  for (u128 c : phase) {
    const i128 v = ring.modulus().centered(c);
    const u128 mag = v < 0 ? static_cast<u128>(-v) : static_cast<u128>(v);
    report.max_abs = std::max(report.max_abs, mag);
  }
  const double half_q = static_cast<double>(sk.context()->params().q / 2);
  report.headroom = report.max_abs == 0 ? INFINITY : half_q / static_cast<double>(report.max_abs);
  return report;
}

}  // namespace voicesearch::ringhe
