#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace voicesearch {

// Error codes shared by every module. The string form (to_string) is what
// travels over the wire in {"error": {"code": ...}} bodies.
enum class Errc {
  // audio
  malformed_container,
  unsupported_format,
  empty_audio,
  invalid_clip,
  // mfcc
  negative_frequency,
  clip_too_short,
  invalid_band,
  invalid_config,
  // ringhe
  invalid_params,
  message_out_of_range,
  param_mismatch,
  encoding_overflow,
  // blobcrypt
  nonce_reuse,
  auth_failure,
  // matching
  length_mismatch,
  insufficient_labels,
  degenerate_denominator,
  invalid_thresholds,
  thresholds_required,
  feature_envelope,
  // server / protocol
  storage_failure,
  malformed_record,
  malformed_request,
  unknown_record,
  not_found,
  network,
  // local state
  io,
  key_file,
  locked,
};

std::string_view to_string(Errc code) noexcept;
std::optional<Errc> errc_from_string(std::string_view name) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace voicesearch
