#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace smalldev {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Stateless: output is a pure function of
/// (counter, key).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter apply(Counter ctr, Key key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kW0;
      key[1] += kW1;
    }
    return ctr;
  }
};

/// Random stream addressed by (seed, stream, index). Two streams with any
/// differing coordinate share no state; draws within a stream are indexed
/// by an internal block counter.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint32_t stream, std::uint64_t index)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        index_(index),
        stream_(stream) {}

  /// Uniform on the open interval (0,1) with 53 random bits.
  double uniform() {
    if (pos_ == 2) refill();
    const std::uint64_t hi = buf_[2 * pos_], lo = buf_[2 * pos_ + 1];
    ++pos_;
    const std::uint64_t bits = ((hi << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal by Box-Muller; caches the second variate.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform(), u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    constexpr double kTwoPi = 6.283185307179586476925;
    spare_ = r * std::sin(kTwoPi * u2);
    has_spare_ = true;
    return r * std::cos(kTwoPi * u2);
  }

 private:
  void refill() {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32),
                                  stream_, block_++};
    buf_ = Philox4x32::apply(ctr, key_);
    pos_ = 0;
  }

  Philox4x32::Key key_;
  std::uint64_t index_;
  std::uint32_t stream_;
  std::uint32_t block_ = 0;
  Philox4x32::Counter buf_{};
  int pos_ = 2;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Stream identifiers, so the samplers and engines never alias.
namespace streams {
inline constexpr std::uint32_t kCirculant = 1;
inline constexpr std::uint32_t kCholesky = 2;
inline constexpr std::uint32_t kAtoms = 3;
inline constexpr std::uint32_t kQmcShift = 4;
inline constexpr std::uint32_t kConditionalMc = 5;
inline constexpr std::uint32_t kPmq = 6;
inline constexpr std::uint32_t kTests = 7;
}  // namespace streams

/// Derives a child seed; used when one experiment seed fans out into
/// several independent runs.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace smalldev
