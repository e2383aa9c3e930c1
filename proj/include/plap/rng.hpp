#pragma once

#include <array>
#include <cmath>
#include <cstdint>

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011). Stateless
// per block: the output is a pure function of (key, counter), so streams
// keyed by (seed, path, stream) can be sampled in any order on any number of
// threads and still reproduce bitwise.

namespace plap {

inline std::array<uint32_t, 4> philox4x32_10(std::array<uint32_t, 4> ctr,
                                             std::array<uint32_t, 2> key) {
  constexpr uint32_t kMulA = 0xD2511F53u, kMulB = 0xCD9E8D57u;
  constexpr uint32_t kWeylA = 0x9E3779B9u, kWeylB = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const uint64_t prod0 = static_cast<uint64_t>(kMulA) * ctr[0];
    const uint64_t prod1 = static_cast<uint64_t>(kMulB) * ctr[2];
    const uint32_t lo0 = static_cast<uint32_t>(prod0), hi0 = static_cast<uint32_t>(prod0 >> 32);
    const uint32_t lo1 = static_cast<uint32_t>(prod1), hi1 = static_cast<uint32_t>(prod1 >> 32);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeylA;
    key[1] += kWeylB;
  }
  return ctr;
}

class CounterRng {
 public:
  CounterRng(uint64_t seed, uint64_t path, uint32_t stream)
      : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)},
        base_{static_cast<uint32_t>(path), static_cast<uint32_t>(path >> 32), stream} {}

  uint32_t next_u32() {
    if (have_ == 0) refill();
    return block_[--have_];
  }

  uint64_t next_u64() {
    const uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  // Uniform on (0, 1), never exactly 0 or 1.
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; pairs are consumed deterministically.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double a = 6.283185307179586476925286766559 * uniform();
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

 private:
  // Block identity is (counter, stream, path); the seed is the key, so the
  // whole draw is injective in (seed, path, stream, counter).
  void refill() {
    block_ = philox4x32_10({static_cast<uint32_t>(counter_), base_[2], base_[0], base_[1]}, key_);
    ++counter_;
    have_ = 4;
  }

  std::array<uint32_t, 2> key_;
  std::array<uint32_t, 3> base_;  // path lo, path hi, stream
  uint64_t counter_ = 0;
  std::array<uint32_t, 4> block_{};
  int have_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace plap
