#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace dshrink {

// Philox4x32-10 counter-based generator. Any (seed, stream) pair opens an
// independent sequence without touching shared state, so parallel workers
// produce the same draws regardless of scheduling.
namespace philox {

constexpr std::uint32_t kMult0 = 0xD2511F53u;
constexpr std::uint32_t kMult1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                          std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t prod0 = std::uint64_t(kMult0) * ctr[0];
    const std::uint64_t prod1 = std::uint64_t(kMult1) * ctr[2];
    ctr = {std::uint32_t(prod1 >> 32) ^ ctr[1] ^ key[0],
           std::uint32_t(prod1),
           std::uint32_t(prod0 >> 32) ^ ctr[3] ^ key[1],
           std::uint32_t(prod0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

}  // namespace philox

// SplitMix64 finalizer, used to spread structured ids over the stream space.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Collapses (id, id, id) tuples into a stream id. Mixing after every xor keeps
// (a,b,0) and (a,0,b) from colliding.
inline std::uint64_t derive_stream(std::uint64_t a, std::uint64_t b = 0,
                                   std::uint64_t c = 0) {
  return mix64(mix64(mix64(a) ^ b) ^ c);
}

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)},
        stream_hi_{std::uint32_t(stream), std::uint32_t(stream >> 32)} {}

  std::uint32_t next_u32() {
    if (index_ == 4) refill();
    return buffer_[index_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t lo = next_u32();
    return lo | (std::uint64_t(next_u32()) << 32);
  }

  // Uniform on the open interval (0,1); never returns an endpoint.
  double uniform() {
    return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * 3.141592653589793238462643383279502884 * uniform();
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

  // Unbiased draw from {0, ..., n-1}.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t bound = (~std::uint64_t(0) / n) * n;
    std::uint64_t draw;
    do {
      draw = next_u64();
    } while (draw >= bound);
    return draw % n;
  }

 private:
  void refill() {
    const std::array<std::uint32_t, 4> ctr = {
        std::uint32_t(block_), std::uint32_t(block_ >> 32),
        stream_hi_[0], stream_hi_[1]};
    buffer_ = philox::block(ctr, key_);
    ++block_;
    index_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 2> stream_hi_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int index_ = 4;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace dshrink
