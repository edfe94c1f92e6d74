#pragma once

#include <cstdint>

#include "voicesearch/ringhe/he.hpp"

namespace voicesearch::ringhe {

// Degree-0 plaintext round(x * S). Throws Error(encoding_overflow) when the
// rounded value leaves (-p/2, p/2].
PlaintextPoly encode_fixed(const HeContext& ctx, double x);

// Constant coefficient divided by S^scale_power. A product of two encoded
// values carries S^2.
double decode_fixed(const HeContext& ctx, const PlaintextPoly& m, int scale_power = 1);

}  // namespace voicesearch::ringhe
