#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace quasifree {

/// Philox4x32-10 counter-based block (Salmon et al., SC'11). The whole
/// random state is (counter, key), so substreams are just counter prefixes.
inline std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> ctr,
                                          std::array<uint32_t, 2> key) {
  constexpr uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
  constexpr uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const uint64_t p0 = static_cast<uint64_t>(m0) * ctr[0];
    const uint64_t p1 = static_cast<uint64_t>(m1) * ctr[2];
    const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
    const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += w0;
    key[1] += w1;
  }
  return ctr;
}

/// One independent stream of a (seed, stream) pair. Streams never overlap:
/// the stream id occupies the high counter words and the block index the low
/// ones, so path -> substream partitioning is independent of worker count.
class PhiloxStream {
 public:
  PhiloxStream(uint64_t seed, uint64_t stream)
      : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)},
        stream_(stream) {}

  uint64_t next_u64() {
    if (buf_pos_ >= 2) refill();
    return buf_[buf_pos_++];
  }

  /// Uniform on (0, 1]; never returns 0 so logs are safe.
  double uniform() {
    const uint64_t x = next_u64();
    return 1.0 - static_cast<double>(x >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (second value cached).
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * M_PI * u2;
    cached_ = r * std::sin(th);
    have_cached_ = true;
    return r * std::cos(th);
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

 private:
  void refill() {
    const std::array<uint32_t, 4> ctr = {
        static_cast<uint32_t>(block_), static_cast<uint32_t>(block_ >> 32),
        static_cast<uint32_t>(stream_), static_cast<uint32_t>(stream_ >> 32)};
    const auto out = philox4x32(ctr, key_);
    buf_[0] = (static_cast<uint64_t>(out[1]) << 32) | out[0];
    buf_[1] = (static_cast<uint64_t>(out[3]) << 32) | out[2];
    buf_pos_ = 0;
    ++block_;
  }

  std::array<uint32_t, 2> key_;
  uint64_t stream_ = 0;
  uint64_t block_ = 0;
  uint64_t buf_[2] = {0, 0};
  int buf_pos_ = 2;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace quasifree
