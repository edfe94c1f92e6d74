#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>

namespace voicesearch {

// Source of random bits handed explicitly to every operation that needs
// randomness. Satisfies UniformRandomBitGenerator so it plugs into <random>
// distributions. Instances are not thread-safe; give each thread its own.
class RandomSource {
 public:
  using result_type = std::uint64_t;

  virtual ~RandomSource() = default;

  virtual void fill(std::span<std::uint8_t> out) = 0;
  virtual std::uint64_t next_u64() = 0;

  result_type operator()() { return next_u64(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
};

// Operating-system CSPRNG (OpenSSL RAND_bytes), buffered.
class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<std::uint8_t> out) override;
  std::uint64_t next_u64() override;

 private:
  void refill();

  std::array<std::uint8_t, 4096> buffer_{};
  std::size_t pos_ = buffer_.size();
};

// Deterministic generator for tests and reproducible corpora. Not for keys.
class SeededRandom final : public RandomSource {
 public:
  explicit SeededRandom(std::uint64_t seed) : engine_(seed) {}

  void fill(std::span<std::uint8_t> out) override;
  std::uint64_t next_u64() override { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace voicesearch
