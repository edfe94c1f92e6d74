#include "voicesearch/audio/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <optional>
#include <string>

#include "voicesearch/common/error.hpp"
#include "voicesearch/common/files.hpp"

namespace voicesearch::audio {
namespace {

constexpr double kPcmScale = 32768.0;

std::uint16_t le16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_tag(Bytes& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

bool tag_is(const std::uint8_t* p, const char* tag) { return std::memcmp(p, tag, 4) == 0; }

struct FormatChunk {
  std::uint16_t audio_format;
  std::uint16_t channels;
  std::uint32_t sample_rate;
  std::uint16_t block_align;
  std::uint16_t bits_per_sample;
};

}  // namespace

void validate(const AudioClip& clip) {
  if (clip.sample_rate <= 0) throw Error(Errc::invalid_clip, "sample rate must be positive");
  if (clip.samples.empty()) throw Error(Errc::invalid_clip, "clip has no samples");
  for (double s : clip.samples) {
    if (!(s >= -1.0 && s < 1.0)) throw Error(Errc::invalid_clip, "sample outside [-1, 1)");
  }
}

AudioClip read_wav(ByteView bytes) {
  if (bytes.size() < 12 || !tag_is(bytes.data(), "RIFF") || !tag_is(bytes.data() + 8, "WAVE")) {
    throw Error(Errc::malformed_container, "missing RIFF/WAVE header");
  }

  std::optional<FormatChunk> fmt;
  std::optional<ByteView> data;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* hdr = bytes.data() + pos;
    const std::uint32_t size = le32(hdr + 4);
    const std::size_t body = pos + 8;
    if (size > bytes.size() - body) {
      throw Error(Errc::malformed_container, "chunk extends past end of file");
    }
    if (tag_is(hdr, "fmt ")) {
      if (size < 16) throw Error(Errc::malformed_container, "fmt chunk too short");
      const std::uint8_t* f = bytes.data() + body;
      fmt = FormatChunk{le16(f), le16(f + 2), le32(f + 4), le16(f + 12), le16(f + 14)};
    } else if (tag_is(hdr, "data")) {
      data = bytes.subspan(body, size);
    }
    // Chunks are padded to even length.
    pos = body + size + (size & 1u);
  }
  if (!fmt) throw Error(Errc::malformed_container, "no fmt chunk");
  if (!data) throw Error(Errc::malformed_container, "no data chunk");

  if (fmt->audio_format != 1) {
    throw Error(Errc::unsupported_format,
                "audio format " + std::to_string(fmt->audio_format) + " is not PCM");
  }
  if (fmt->bits_per_sample != 16) {
    throw Error(Errc::unsupported_format,
                std::to_string(fmt->bits_per_sample) + "-bit samples are not supported");
  }
  if (fmt->channels < 1 || fmt->channels > 2) {
    throw Error(Errc::unsupported_format, std::to_string(fmt->channels) + " channels");
  }
  if (fmt->sample_rate == 0) throw Error(Errc::malformed_container, "sample rate is zero");
  const std::size_t frame_bytes = 2u * fmt->channels;
  if (fmt->block_align != frame_bytes) {
    throw Error(Errc::malformed_container, "block_align does not match channel layout");
  }

  const std::size_t frames = data->size() / frame_bytes;
  if (frames == 0) throw Error(Errc::empty_audio, "data chunk holds no samples");

  AudioClip clip;
  clip.sample_rate = static_cast<int>(fmt->sample_rate);
  clip.samples.resize(frames);
  const std::uint8_t* p = data->data();
  for (std::size_t i = 0; i < frames; ++i, p += frame_bytes) {
    const double left = static_cast<std::int16_t>(le16(p)) / kPcmScale;
    if (fmt->channels == 1) {
      clip.samples[i] = left;
    } else {
      const double right = static_cast<std::int16_t>(le16(p + 2)) / kPcmScale;
      clip.samples[i] = 0.5 * (left + right);
    }
  }
  return clip;
}

AudioClip read_wav_file(const std::filesystem::path& path) { return read_wav(read_file(path)); }

Bytes write_wav(const AudioClip& clip) {
  validate(clip);
  const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
  Bytes out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put32(out, 16);
  put16(out, 1);  // PCM
  put16(out, 1);  // mono
  put32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put32(out, static_cast<std::uint32_t>(clip.sample_rate) * 2);
  put16(out, 2);
  put16(out, 16);
  put_tag(out, "data");
  put32(out, data_bytes);
  for (double s : clip.samples) {
    const long q = std::lround(s * kPcmScale);
    put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L))));
  }
  return out;
}

}  // namespace voicesearch::audio
