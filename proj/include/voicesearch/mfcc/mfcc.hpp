#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voicesearch/audio/wav.hpp"

namespace voicesearch::mfcc {

inline constexpr std::size_t kFeatureDim = 36;

struct MfccConfig {
  double pre_emphasis = 0.97;
  double frame_len_ms = 25.0;
  double hop_ms = 10.0;
  int num_filters = 26;
  int num_ceps = 12;
  double mel_alpha = 2595.0;
  double low_freq_hz = 0.0;
  // Unset means Nyquist (sample_rate / 2).
  std::optional<double> high_freq_hz;

  // Checks the rate-independent invariants; Error(invalid_config).
  void validate() const;
};

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// l x 36 matrix laid out as [cepstra | delta | delta-delta].
using FeatureMatrix = Matrix;

// Column mean of a FeatureMatrix.
using FeatureVector = std::array<double, kFeatureDim>;

double hz_to_mel(double hz, double alpha);
double mel_to_hz(double mel, double alpha);

std::vector<double> pre_emphasize(std::span<const double> signal, double coeff);

// Sample counts derived from a config at a given rate.
struct FrameLayout {
  std::size_t frame_samples;
  std::size_t hop_samples;
  std::size_t nfft;  // smallest power of two >= frame_samples

  std::size_t frame_count(std::size_t signal_len) const;
};

FrameLayout frame_layout(int sample_rate, const MfccConfig& config);

// Hamming-windowed frames; one row per frame.
Matrix frame_signal(std::span<const double> signal, int sample_rate, const MfccConfig& config);

// Triangular filters over the one-sided power spectrum.
struct FilterBank {
  Matrix weights;                  // K x (nfft/2 + 1)
  std::vector<std::size_t> edges;  // K + 2 FFT bin indices; filter k peaks at edges[k + 1]
};

FilterBank mel_filterbank(int sample_rate, std::size_t nfft, const MfccConfig& config);

// c_n = sum_k log_energy[k] * cos(n (k + 1/2) pi / K), n = 1..num_ceps.
std::vector<double> cepstral_coeffs(std::span<const double> log_energies, std::size_t num_ceps);

// d[i] = -2 m[i-2] - m[i-1] + m[i+1] + 2 m[i+2], rows clamped at the edges.
Matrix delta(const Matrix& m);

// Per-frame log filterbank energies (l x K): the stage before the cepstrum.
Matrix log_filterbank_energies(const audio::AudioClip& clip, const MfccConfig& config);

FeatureMatrix extract_features(const audio::AudioClip& clip, const MfccConfig& config = {});

// Throws Error(length_mismatch) unless the matrix has 36 columns and >= 1 row.
FeatureVector column_mean(const FeatureMatrix& features);

// One row per frame, 6 decimal places, comma separated.
std::string feature_csv(const FeatureMatrix& features);

}  // namespace voicesearch::mfcc
