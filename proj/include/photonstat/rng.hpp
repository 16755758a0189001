#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace photonstat {

/// Philox4x32-10 counter-based generator. A (seed, stream) pair selects an
/// independent sequence, so work split across threads by stream id gives
/// results independent of the thread count.
class Philox {
 public:
  using result_type = std::uint64_t;

  Philox(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (pos_ == 2) refill();
    return buffer_[pos_++];
  }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() noexcept { return ((*this)() >> 11) * 0x1.0p-53 + 0x1.0p-54; }

  /// Standard normal (Box–Muller, second variate cached).
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 6.283185307179586 * u2;
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
  }

  double exponential(double mean) noexcept { return -mean * std::log(uniform()); }

 private:
  void refill() noexcept {
    std::array<std::uint32_t, 4> c{static_cast<std::uint32_t>(counter_),
                                   static_cast<std::uint32_t>(counter_ >> 32),
                                   static_cast<std::uint32_t>(stream_),
                                   static_cast<std::uint32_t>(stream_ >> 32)};
    std::array<std::uint32_t, 2> k = key_;
    for (int r = 0; r < 10; ++r) {
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
      c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
      k[0] += 0x9E3779B9u;
      k[1] += 0xBB67AE85u;
    }
    buffer_[0] = (std::uint64_t{c[1]} << 32) | c[0];
    buffer_[1] = (std::uint64_t{c[3]} << 32) | c[2];
    ++counter_;
    pos_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int pos_ = 2;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Stream ids for the different consumers of one seed. Upper 8 bits tag the
/// purpose; the rest index the pulse, pair chunk or path.
namespace streams {
inline constexpr std::uint64_t tag(std::uint64_t purpose, std::uint64_t index) {
  return (purpose << 56) | (index & ((std::uint64_t{1} << 56) - 1));
}
inline constexpr std::uint64_t kHbt = 1;
inline constexpr std::uint64_t kPairs = 2;
inline constexpr std::uint64_t kJitter = 3;
inline constexpr std::uint64_t kStarts = 4;
inline constexpr std::uint64_t kPhase = 5;
inline constexpr std::uint64_t kCounts = 6;
inline constexpr std::uint64_t kNoise = 7;
}  // namespace streams

}  // namespace photonstat
