#include "voicesearch/common/error.hpp"

namespace voicesearch {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::malformed_container: return "malformed_container";
    case Errc::unsupported_format: return "unsupported_format";
    case Errc::empty_audio: return "empty_audio";
    case Errc::invalid_clip: return "invalid_clip";
    case Errc::negative_frequency: return "negative_frequency";
    case Errc::clip_too_short: return "clip_too_short";
    case Errc::invalid_band: return "invalid_band";
    case Errc::invalid_config: return "invalid_config";
    case Errc::invalid_params: return "invalid_params";
    case Errc::message_out_of_range: return "message_out_of_range";
    case Errc::param_mismatch: return "param_mismatch";
    case Errc::encoding_overflow: return "encoding_overflow";
    case Errc::nonce_reuse: return "nonce_reuse";
    case Errc::auth_failure: return "auth_failure";
    case Errc::length_mismatch: return "length_mismatch";
    case Errc::insufficient_labels: return "insufficient_labels";
    case Errc::degenerate_denominator: return "degenerate_denominator";
    case Errc::invalid_thresholds: return "invalid_thresholds";
    case Errc::thresholds_required: return "thresholds_required";
    case Errc::feature_envelope: return "feature_envelope";
    case Errc::storage_failure: return "storage_failure";
    case Errc::malformed_record: return "malformed_record";
    case Errc::malformed_request: return "malformed_request";
    case Errc::unknown_record: return "unknown_record";
    case Errc::not_found: return "not_found";
    case Errc::network: return "network";
    case Errc::io: return "io";
    case Errc::key_file: return "key_file";
    case Errc::locked: return "locked";
  }
  return "unknown";
}

std::optional<Errc> errc_from_string(std::string_view name) noexcept {
  for (int i = 0; i <= static_cast<int>(Errc::locked); ++i) {
    const auto code = static_cast<Errc>(i);
    if (to_string(code) == name) return code;
  }
  return std::nullopt;
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace voicesearch
