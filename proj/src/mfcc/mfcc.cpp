#include "voicesearch/mfcc/mfcc.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "voicesearch/common/error.hpp"

namespace voicesearch::mfcc {
namespace {

constexpr double kPowerFloor = 1e-10;

// fftw planning is not thread-safe; plans are created once per size under a
// lock and then executed through the new-array interface, which is.
class R2cPlanCache {
 public:
  static R2cPlanCache& instance() {
    static R2cPlanCache cache;
    return cache;
  }

  fftw_plan plan(std::size_t nfft) {
    std::lock_guard lock(mu_);
    auto it = plans_.find(nfft);
    if (it != plans_.end()) return it->second;
    double* in = fftw_alloc_real(nfft);
    fftw_complex* out = fftw_alloc_complex(nfft / 2 + 1);
    fftw_plan p = fftw_plan_dft_r2c_1d(static_cast<int>(nfft), in, out, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(nfft, p);
    return p;
  }

 private:
  R2cPlanCache() = default;
  ~R2cPlanCache() {
    for (auto& [n, p] : plans_) fftw_destroy_plan(p);
  }

  std::mutex mu_;
  std::map<std::size_t, fftw_plan> plans_;
};

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

// |X_k|^2 / nfft for k = 0..nfft/2, frame zero-padded to nfft.
std::vector<double> power_spectrum(std::span<const double> frame, std::size_t nfft) {
  fftw_plan plan = R2cPlanCache::instance().plan(nfft);
  std::unique_ptr<double, FftwDeleter> in(fftw_alloc_real(nfft));
  std::unique_ptr<fftw_complex, FftwDeleter> out(fftw_alloc_complex(nfft / 2 + 1));
  for (std::size_t i = 0; i < nfft; ++i) in.get()[i] = i < frame.size() ? frame[i] : 0.0;
  fftw_execute_dft_r2c(plan, in.get(), out.get());
  std::vector<double> power(nfft / 2 + 1);
  for (std::size_t k = 0; k < power.size(); ++k) {
    const double re = out.get()[k][0];
    const double im = out.get()[k][1];
    power[k] = (re * re + im * im) / static_cast<double>(nfft);
  }
  return power;
}

double nyquist_high(int sample_rate, const MfccConfig& config) {
  return config.high_freq_hz.value_or(sample_rate / 2.0);
}

}  // namespace

void MfccConfig::validate() const {
  if (!(pre_emphasis >= 0.0 && pre_emphasis < 1.0)) {
    throw Error(Errc::invalid_config, "pre_emphasis must be in [0, 1)");
  }
  if (!(frame_len_ms > 0.0) || !(hop_ms > 0.0) || hop_ms > frame_len_ms) {
    throw Error(Errc::invalid_config, "need 0 < hop_ms <= frame_len_ms");
  }
  if (num_filters < 1 || num_ceps < 1 || num_ceps > num_filters) {
    throw Error(Errc::invalid_config, "need 1 <= num_ceps <= num_filters");
  }
  if (!(mel_alpha > 0.0)) throw Error(Errc::invalid_config, "mel_alpha must be positive");
}

double hz_to_mel(double hz, double alpha) {
  if (hz < 0.0) throw Error(Errc::negative_frequency, "frequency " + std::to_string(hz));
  return alpha * std::log10(1.0 + hz / 700.0);
}

double mel_to_hz(double mel, double alpha) { return 700.0 * (std::pow(10.0, mel / alpha) - 1.0); }

std::vector<double> pre_emphasize(std::span<const double> signal, double coeff) {
  std::vector<double> out(signal.size());
  if (signal.empty()) return out;
  out[0] = signal[0];
  for (std::size_t t = 1; t < signal.size(); ++t) out[t] = signal[t] - coeff * signal[t - 1];
  return out;
}

std::size_t FrameLayout::frame_count(std::size_t signal_len) const {
  if (signal_len < frame_samples) return 0;
  return 1 + (signal_len - frame_samples) / hop_samples;
}

FrameLayout frame_layout(int sample_rate, const MfccConfig& config) {
  config.validate();
  if (sample_rate <= 0) throw Error(Errc::invalid_config, "sample rate must be positive");
  const auto frame = static_cast<std::size_t>(std::lround(config.frame_len_ms * sample_rate / 1000.0));
  const auto hop = static_cast<std::size_t>(std::lround(config.hop_ms * sample_rate / 1000.0));
  if (frame == 0 || hop == 0) {
    throw Error(Errc::invalid_config, "frame or hop rounds to zero samples at this rate");
  }
  std::size_t nfft = 1;
  while (nfft < frame) nfft <<= 1;
  return {frame, hop, nfft};
}

Matrix frame_signal(std::span<const double> signal, int sample_rate, const MfccConfig& config) {
  const FrameLayout layout = frame_layout(sample_rate, config);
  const std::size_t count = layout.frame_count(signal.size());
  if (count == 0) {
    throw Error(Errc::clip_too_short, std::to_string(signal.size()) + " samples, need " +
                                          std::to_string(layout.frame_samples));
  }
  const std::size_t len = layout.frame_samples;
  std::vector<double> window(len, 1.0);
  if (len > 1) {
    for (std::size_t i = 0; i < len; ++i) {
      window[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                         static_cast<double>(len - 1));
    }
  }
  Matrix frames(count, len);
  for (std::size_t f = 0; f < count; ++f) {
    const std::size_t start = f * layout.hop_samples;
    auto row = frames.row(f);
    for (std::size_t i = 0; i < len; ++i) row[i] = signal[start + i] * window[i];
  }
  return frames;
}

FilterBank mel_filterbank(int sample_rate, std::size_t nfft, const MfccConfig& config) {
  config.validate();
  const double low = config.low_freq_hz;
  const double high = nyquist_high(sample_rate, config);
  if (!(low >= 0.0 && low < high && high <= sample_rate / 2.0)) {
    throw Error(Errc::invalid_band, "need 0 <= low < high <= rate/2");
  }
  if (nfft == 0 || (nfft & (nfft - 1)) != 0) {
    throw Error(Errc::invalid_config, "nfft must be a power of two");
  }

  const auto K = static_cast<std::size_t>(config.num_filters);
  const double mel_lo = hz_to_mel(low, config.mel_alpha);
  const double mel_hi = hz_to_mel(high, config.mel_alpha);
  std::vector<std::size_t> edges(K + 2);
  for (std::size_t i = 0; i < K + 2; ++i) {
    const double mel = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(K + 1);
    const double hz = mel_to_hz(mel, config.mel_alpha);
    edges[i] = static_cast<std::size_t>(std::floor(static_cast<double>(nfft + 1) * hz / sample_rate));
  }

  const std::size_t bins = nfft / 2 + 1;
  Matrix weights(K, bins);
  for (std::size_t k = 0; k < K; ++k) {
    const std::size_t left = edges[k];
    const std::size_t center = edges[k + 1];
    const std::size_t right = edges[k + 2];
    if (!(left < center && center < right) || right >= bins) {
      throw Error(Errc::invalid_band, "filter " + std::to_string(k) +
                                          " collapses at this FFT resolution; use fewer filters");
    }
    for (std::size_t b = left; b < center; ++b) {
      weights(k, b) = static_cast<double>(b - left) / static_cast<double>(center - left);
    }
    for (std::size_t b = center; b <= right; ++b) {
      weights(k, b) = static_cast<double>(right - b) / static_cast<double>(right - center);
    }
  }
  return {std::move(weights), std::move(edges)};
}

std::vector<double> cepstral_coeffs(std::span<const double> log_energies, std::size_t num_ceps) {
  const std::size_t K = log_energies.size();
  std::vector<double> c(num_ceps, 0.0);
  for (std::size_t n = 1; n <= num_ceps; ++n) {
    double acc = 0.0;
    for (std::size_t k = 1; k <= K; ++k) {
      acc += log_energies[k - 1] *
             std::cos(static_cast<double>(n) * (static_cast<double>(k) - 0.5) * std::numbers::pi /
                      static_cast<double>(K));
    }
    c[n - 1] = acc;
  }
  return c;
}

Matrix delta(const Matrix& m) {
  const std::size_t l = m.rows();
  Matrix d(l, m.cols());
  if (l == 0) return d;
  auto at = [&](long i) {
    const long clamped = std::clamp(i, 0L, static_cast<long>(l) - 1);
    return m.row(static_cast<std::size_t>(clamped));
  };
  for (std::size_t i = 0; i < l; ++i) {
    const long r = static_cast<long>(i);
    auto m2 = at(r - 2), m1 = at(r - 1), p1 = at(r + 1), p2 = at(r + 2);
    auto out = d.row(i);
    for (std::size_t c = 0; c < m.cols(); ++c) {
      out[c] = -2.0 * m2[c] - m1[c] + p1[c] + 2.0 * p2[c];
    }
  }
  return d;
}

Matrix log_filterbank_energies(const audio::AudioClip& clip, const MfccConfig& config) {
  const FrameLayout layout = frame_layout(clip.sample_rate, config);
  const auto emphasized = pre_emphasize(clip.samples, config.pre_emphasis);
  const Matrix frames = frame_signal(emphasized, clip.sample_rate, config);
  const FilterBank bank = mel_filterbank(clip.sample_rate, layout.nfft, config);
  const std::size_t K = bank.weights.rows();

  Matrix energies(frames.rows(), K);
  for (std::size_t f = 0; f < frames.rows(); ++f) {
    const auto power = power_spectrum(frames.row(f), layout.nfft);
    for (std::size_t k = 0; k < K; ++k) {
      const auto w = bank.weights.row(k);
      double s = 0.0;
      for (std::size_t b = bank.edges[k]; b <= bank.edges[k + 2]; ++b) s += w[b] * power[b];
      energies(f, k) = std::log(std::max(s, kPowerFloor));
    }
  }
  return energies;
}

FeatureMatrix extract_features(const audio::AudioClip& clip, const MfccConfig& config) {
  const Matrix energies = log_filterbank_energies(clip, config);
  const auto C = static_cast<std::size_t>(config.num_ceps);
  Matrix base(energies.rows(), C);
  for (std::size_t f = 0; f < energies.rows(); ++f) {
    const auto c = cepstral_coeffs(energies.row(f), C);
    std::copy(c.begin(), c.end(), base.row(f).begin());
  }
  const Matrix d1 = delta(base);
  const Matrix d2 = delta(d1);

  FeatureMatrix features(base.rows(), 3 * C);
  for (std::size_t f = 0; f < base.rows(); ++f) {
    auto out = features.row(f);
    std::copy(base.row(f).begin(), base.row(f).end(), out.begin());
    std::copy(d1.row(f).begin(), d1.row(f).end(), out.begin() + static_cast<long>(C));
    std::copy(d2.row(f).begin(), d2.row(f).end(), out.begin() + static_cast<long>(2 * C));
  }
  return features;
}

FeatureVector column_mean(const FeatureMatrix& features) {
  if (features.cols() != kFeatureDim || features.rows() == 0) {
    throw Error(Errc::length_mismatch, "feature matrix must be l x 36 with l >= 1");
  }
  FeatureVector mean{};
  for (std::size_t r = 0; r < features.rows(); ++r) {
    const auto row = features.row(r);
    for (std::size_t j = 0; j < kFeatureDim; ++j) mean[j] += row[j];
  }
  for (double& v : mean) v /= static_cast<double>(features.rows());
  return mean;
}

std::string feature_csv(const FeatureMatrix& features) {
  std::string out;
  char buf[32];
  for (std::size_t r = 0; r < features.rows(); ++r) {
    const auto row = features.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::snprintf(buf, sizeof buf, c == 0 ? "%.6f" : ",%.6f", row[c]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace voicesearch::mfcc
