#pragma once

#include <array>
#include <cstdint>

namespace octest {

/// Philox4x32-10 counter-based generator.
///
/// Streams are addressed by (seed, stream): the seed forms the Philox key
/// and the stream id occupies the high 64 bits of the 128-bit counter, so
/// any number of independent substreams can be derived without coordination.
/// Output is reproducible across platforms for a fixed (seed, stream).
class Philox4x32 {
 public:
  explicit Philox4x32(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  std::uint32_t next_u32() {
    if (index_ == 4) refill();
    return block_[index_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform double in [0,1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  void refill();

  std::array<std::uint32_t, 4> block_{};
  std::array<std::uint32_t, 2> key_;
  std::uint64_t counter_ = 0;
  std::uint64_t stream_;
  int index_ = 4;
};

/// Binomial(n, p) draw by inversion. The search is anchored at the mode and
/// walks outward, so the expected cost is O(sqrt(n p (1-p))) and the mode
/// probability never underflows. Consumes exactly one uniform.
std::uint64_t sample_binomial(Philox4x32& rng, std::uint64_t n, double p);

/// Multinomial draw over the four table cells by sequential binomial
/// conditioning in cell order (x01, x11, x00, x10). Consumes exactly three
/// uniforms.
std::array<std::uint64_t, 4> sample_multinomial4(
    Philox4x32& rng, std::uint64_t n, const std::array<double, 4>& p);

}  // namespace octest
