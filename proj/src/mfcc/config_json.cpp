#include "voicesearch/mfcc/config_json.hpp"

#include "voicesearch/common/error.hpp"

namespace voicesearch::mfcc {

using nlohmann::json;

MfccConfig config_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::invalid_config, "mfcc config must be an object");
  MfccConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "pre_emphasis") c.pre_emphasis = value.get<double>();
      else if (key == "frame_len_ms") c.frame_len_ms = value.get<double>();
      else if (key == "hop_ms") c.hop_ms = value.get<double>();
      else if (key == "num_filters") c.num_filters = value.get<int>();
      else if (key == "num_ceps") c.num_ceps = value.get<int>();
      else if (key == "mel_alpha") c.mel_alpha = value.get<double>();
      else if (key == "low_freq_hz") c.low_freq_hz = value.get<double>();
      else if (key == "high_freq_hz") c.high_freq_hz = value.get<double>();
      else throw Error(Errc::invalid_config, "unknown mfcc option " + key);
    }
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_config, e.what());
  }
  c.validate();
  return c;
}

json config_to_json(const MfccConfig& c) {
  json j{{"pre_emphasis", c.pre_emphasis}, {"frame_len_ms", c.frame_len_ms}, {"hop_ms", c.hop_ms},
         {"num_filters", c.num_filters},   {"num_ceps", c.num_ceps},         {"mel_alpha", c.mel_alpha},
         {"low_freq_hz", c.low_freq_hz}};
  if (c.high_freq_hz) j["high_freq_hz"] = *c.high_freq_hz;
  return j;
}

}  // namespace voicesearch::mfcc
