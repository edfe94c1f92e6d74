#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "voicesearch/audio/wav.hpp"

namespace voicesearch::synth {

// amplitude * sin(2 pi f t) plus white Gaussian noise of the given standard
// deviation. Deterministic for a given seed.
audio::AudioClip tone(double freq_hz, double seconds, int sample_rate, double amplitude, double noise_std,
                      std::uint64_t seed);

// A vowel target: first two formants and the time spent on it.
struct Segment {
  double f1_hz;
  double f2_hz;
  double seconds;
};

struct WordSpec {
  std::string name;
  std::vector<Segment> segments;
};

struct MoodSpec {
  std::string name;
  double f0_hz;           // mean pitch
  double f0_slope;        // relative pitch change over the word
  double vibrato_depth;   // relative
  double vibrato_hz;
  double loudness;        // peak amplitude before noise
  double tempo;           // >1 speaks faster
};

// Harmonic source shaped by formant resonances, gliding between segments.
// `seed` drives the per-take variation (pitch and timing jitter, noise).
audio::AudioClip utterance(const WordSpec& word, const MoodSpec& mood, double noise_std, std::uint64_t seed,
                           int sample_rate = 16000);

std::vector<WordSpec> desk_words();
std::vector<MoodSpec> desk_moods();

struct CorpusEntry {
  std::filesystem::path file;
  std::string word;
  std::string mood;
  std::string background;
  int take;
};

// Writes every word x mood x take as "<word>_<mood>_<background>_t<k>.wav"
// plus labels.csv (file,word,mood,background). Backgrounds alternate
// between "quiet" and "noisy" by take.
std::vector<CorpusEntry> write_desk_corpus(const std::filesystem::path& dir, int takes, std::uint64_t seed);

}  // namespace voicesearch::synth
