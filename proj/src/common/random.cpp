#include "voicesearch/common/random.hpp"

#include <openssl/rand.h>

#include <cstring>

#include "voicesearch/common/error.hpp"

namespace voicesearch {

void SystemRandom::refill() {
  if (RAND_bytes(buffer_.data(), static_cast<int>(buffer_.size())) != 1) {
    throw Error(Errc::io, "RAND_bytes failed");
  }
  pos_ = 0;
}

void SystemRandom::fill(std::span<std::uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    if (pos_ == buffer_.size()) refill();
    const std::size_t take = std::min(out.size() - done, buffer_.size() - pos_);
    std::memcpy(out.data() + done, buffer_.data() + pos_, take);
    // Consumed bytes are wiped so they cannot be handed out twice.
    std::memset(buffer_.data() + pos_, 0, take);
    pos_ += take;
    done += take;
  }
}

std::uint64_t SystemRandom::next_u64() {
  std::uint64_t v = 0;
  std::array<std::uint8_t, 8> raw{};
  fill(raw);
  std::memcpy(&v, raw.data(), sizeof v);
  return v;
}

void SeededRandom::fill(std::span<std::uint8_t> out) {
  std::size_t i = 0;
  while (i < out.size()) {
    std::uint64_t v = engine_();
    for (int b = 0; b < 8 && i < out.size(); ++b, ++i) {
      out[i] = static_cast<std::uint8_t>(v >> (8 * b));
    }
  }
}

}  // namespace voicesearch
