#pragma once

#include <json.hpp>

#include "voicesearch/ringhe/he.hpp"

namespace voicesearch::ringhe {

// Coefficients travel as decimal strings in [0, q).
nlohmann::json poly_to_json(const Poly& p);
Poly poly_from_json(const nlohmann::json& j, const HeContext& ctx);

// {"deg": d, "polys": [[coeff, ...] x (d + 1)]}
nlohmann::json ciphertext_to_json(const Ciphertext& ct);
// Throws Error(malformed_record) on shape or range violations.
Ciphertext ciphertext_from_json(const nlohmann::json& j, const ContextPtr& ctx);

// {"p": "<dec>", "q": "<dec>", "n": int, "sigma": real, "S": int}
nlohmann::json params_to_json(const HeParams& params);
HeParams params_from_json(const nlohmann::json& j);

}  // namespace voicesearch::ringhe
