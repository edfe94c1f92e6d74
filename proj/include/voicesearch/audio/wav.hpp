#pragma once

#include <filesystem>
#include <vector>

#include "voicesearch/common/bytes.hpp"

namespace voicesearch::audio {

// Mono signal with samples in [-1.0, 1.0).
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

// Throws Error(invalid_clip) when the clip violates its invariants.
void validate(const AudioClip& clip);

// Decodes a RIFF/WAVE file holding 16-bit PCM with one or two channels.
// Stereo is downmixed by averaging each frame's channels.
AudioClip read_wav(ByteView bytes);
AudioClip read_wav_file(const std::filesystem::path& path);

// Encodes a clip as 16-bit PCM mono with the canonical 44-byte header.
Bytes write_wav(const AudioClip& clip);

}  // namespace voicesearch::audio
