#include "voicesearch/synth/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "voicesearch/common/error.hpp"
#include "voicesearch/common/files.hpp"

namespace voicesearch::synth {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double formant_gain(double f, double center, double bandwidth) {
  const double x = (f - center) / bandwidth;
  return std::exp(-0.5 * x * x);
}

}  // namespace

audio::AudioClip tone(double freq_hz, double seconds, int sample_rate, double amplitude, double noise_std,
                      std::uint64_t seed) {
  if (sample_rate <= 0 || seconds <= 0.0) throw Error(Errc::invalid_clip, "tone needs a positive rate and length");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const auto n = static_cast<std::size_t>(std::llround(seconds * sample_rate));
  audio::AudioClip clip{std::vector<double>(n), sample_rate};
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    clip.samples[i] = amplitude * std::sin(kTwoPi * freq_hz * t) + noise_std * noise(rng);
  }
  return clip;
}

audio::AudioClip utterance(const WordSpec& word, const MoodSpec& mood, double noise_std, std::uint64_t seed,
                           int sample_rate) {
  if (word.segments.empty()) throw Error(Errc::invalid_clip, "word has no segments");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double pitch_jitter = 1.0 + 0.02 * gauss(rng);
  const double time_jitter = 1.0 + 0.04 * gauss(rng);

  std::vector<double> bounds{0.0};
  for (const auto& s : word.segments) bounds.push_back(bounds.back() + s.seconds * time_jitter / mood.tempo);
  const double voiced = bounds.back();
  const double lead = 0.1;
  const double total = voiced + 2.0 * lead;
  const auto n = static_cast<std::size_t>(std::llround(total * sample_rate));

  audio::AudioClip clip{std::vector<double>(n, 0.0), sample_rate};
  const double nyquist = sample_rate / 2.0;
  double phase = 0.0;
  double peak = 0.0;
  std::vector<double> voice(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate - lead;
    if (t < 0.0 || t >= voiced) continue;
    std::size_t seg = 0;
    while (seg + 1 < word.segments.size() && t >= bounds[seg + 1]) ++seg;
    // Glide toward the next target over the last 30% of each segment.
    const double local = (t - bounds[seg]) / (bounds[seg + 1] - bounds[seg]);
    double f1 = word.segments[seg].f1_hz;
    double f2 = word.segments[seg].f2_hz;
    if (seg + 1 < word.segments.size() && local > 0.7) {
      const double w = (local - 0.7) / 0.3;
      f1 += w * (word.segments[seg + 1].f1_hz - f1);
      f2 += w * (word.segments[seg + 1].f2_hz - f2);
    }
    const double progress = t / voiced;
    const double f0 = mood.f0_hz * pitch_jitter * (1.0 + mood.f0_slope * (progress - 0.5)) *
                      (1.0 + mood.vibrato_depth * std::sin(kTwoPi * mood.vibrato_hz * t));
    phase += kTwoPi * f0 / sample_rate;
    double s = 0.0;
    for (int k = 1; k * f0 < nyquist * 0.9; ++k) {
      const double fk = k * f0;
      const double g = formant_gain(fk, f1, 90.0) + 0.7 * formant_gain(fk, f2, 120.0) + 0.02;
      s += g / std::sqrt(static_cast<double>(k)) * std::sin(k * phase);
    }
    const double envelope = std::sin(std::numbers::pi * progress);
    voice[i] = envelope * s;
    peak = std::max(peak, std::abs(voice[i]));
  }
  const double gain = peak > 0.0 ? mood.loudness / peak : 0.0;
  for (std::size_t i = 0; i < n; ++i) clip.samples[i] = gain * voice[i] + noise_std * gauss(rng);
  return clip;
}

std::vector<WordSpec> desk_words() {
  return {
      {"happy", {{660, 1700, 0.16}, {350, 2300, 0.14}}},
      {"water", {{600, 900, 0.18}, {500, 1400, 0.16}}},
      {"help", {{530, 1850, 0.22}, {450, 1100, 0.08}}},
  };
}

std::vector<MoodSpec> desk_moods() {
  return {
      {"calm", 115.0, -0.05, 0.0, 0.0, 0.45, 1.0},
      {"excited", 190.0, 0.25, 0.04, 6.0, 0.8, 1.25},
  };
}

std::vector<CorpusEntry> write_desk_corpus(const std::filesystem::path& dir, int takes, std::uint64_t seed) {
  if (takes < 1) throw Error(Errc::invalid_config, "takes must be positive");
  std::filesystem::create_directories(dir);
  std::vector<CorpusEntry> out;
  std::ostringstream csv;
  csv << "file,word,mood,background\n";
  std::uint64_t take_seed = seed;
  for (const auto& w : desk_words()) {
    for (const auto& m : desk_moods()) {
      for (int k = 1; k <= takes; ++k) {
        const std::string background = (k % 2 == 1) ? "quiet" : "noisy";
        const double noise = background == "quiet" ? 0.003 : 0.03;
        const auto clip = utterance(w, m, noise, ++take_seed);
        const std::string name = w.name + "_" + m.name + "_" + background + "_t" + std::to_string(k) + ".wav";
        write_file_atomic(dir / name, ByteView(audio::write_wav(clip)));
        out.push_back({dir / name, w.name, m.name, background, k});
        csv << name << ',' << w.name << ',' << m.name << ',' << background << '\n';
      }
    }
  }
  write_file_atomic(dir / "labels.csv", csv.str());
  return out;
}

}  // namespace voicesearch::synth
