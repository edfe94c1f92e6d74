#include "voicesearch/ringhe/codec.hpp"

#include <cmath>
#include <string>

#include "voicesearch/common/error.hpp"

namespace voicesearch::ringhe {

PlaintextPoly encode_fixed(const HeContext& ctx, double x) {
  const auto& params = ctx.params();
  const double scaled = std::round(x * static_cast<double>(params.scale));
  const double half = static_cast<double>(params.p / 2);
  if (!std::isfinite(scaled) || std::fabs(scaled) > half) {
    throw Error(Errc::encoding_overflow, "value " + std::to_string(x) + " does not fit the plaintext space");
  }
  return scalar_plaintext(ctx, static_cast<std::int64_t>(scaled));
}

double decode_fixed(const HeContext& ctx, const PlaintextPoly& m, int scale_power) {
  double divisor = 1.0;
  for (int i = 0; i < scale_power; ++i) divisor *= static_cast<double>(ctx.params().scale);
  return static_cast<double>(m.coeffs.at(0)) / divisor;
}

}  // namespace voicesearch::ringhe
