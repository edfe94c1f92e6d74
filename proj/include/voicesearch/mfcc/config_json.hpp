#pragma once

#include <json.hpp>

#include "voicesearch/mfcc/mfcc.hpp"

namespace voicesearch::mfcc {

// Missing keys keep their defaults; unknown keys are rejected with
// Error(invalid_config).
MfccConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const MfccConfig& c);

}  // namespace voicesearch::mfcc
