#include "octest/rng.hpp"

#include <algorithm>
#include <cmath>

namespace octest {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& ctr,
                         const std::array<std::uint32_t, 2>& key) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

}  // namespace

void Philox4x32::refill() {
  std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(counter_),
      static_cast<std::uint32_t>(counter_ >> 32),
      static_cast<std::uint32_t>(stream_),
      static_cast<std::uint32_t>(stream_ >> 32)};
  std::array<std::uint32_t, 2> key = key_;
  for (int round = 0; round < 10; ++round) {
    philox_round(ctr, key);
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  block_ = ctr;
  ++counter_;
  index_ = 0;
}

std::uint64_t sample_binomial(Philox4x32& rng, std::uint64_t n, double p) {
  const double u = rng.next_double();
  if (n == 0 || p <= 0) return 0;
  if (p >= 1) return n;

  const double dn = static_cast<double>(n);
  const double odds = p / (1 - p);
  std::uint64_t mode =
      static_cast<std::uint64_t>(std::floor((dn + 1) * p));
  mode = std::min(mode, n);

  const double dm = static_cast<double>(mode);
  const double log_pm = std::lgamma(dn + 1) - std::lgamma(dm + 1) -
                        std::lgamma(dn - dm + 1) + dm * std::log(p) +
                        (dn - dm) * std::log1p(-p);
  const double pm = std::exp(log_pm);

  // Inversion over the outcome enumeration mode, mode+1, mode-1, mode+2, ...
  // The probabilities partition [0,1), so the marginal law is exact.
  double cum = pm;
  if (u < cum) return mode;
  std::uint64_t lo = mode;
  std::uint64_t hi = mode;
  double p_lo = pm;
  double p_hi = pm;
  while (lo > 0 || hi < n) {
    if (hi < n) {
      p_hi *= (dn - static_cast<double>(hi)) /
              (static_cast<double>(hi) + 1) * odds;
      ++hi;
      cum += p_hi;
      if (u < cum) return hi;
    }
    if (lo > 0) {
      p_lo *= static_cast<double>(lo) /
              (dn - static_cast<double>(lo) + 1) / odds;
      --lo;
      cum += p_lo;
      if (u < cum) return lo;
    }
  }
  // Mass lost to rounding: fall back to the mode.
  return mode;
}

std::array<std::uint64_t, 4> sample_multinomial4(
    Philox4x32& rng, std::uint64_t n, const std::array<double, 4>& p) {
  std::array<std::uint64_t, 4> x{};
  std::uint64_t remaining = n;
  double mass = 1.0;
  for (int i = 0; i < 3; ++i) {
    const double ratio =
        mass > 0 ? std::clamp(p[i] / mass, 0.0, 1.0) : 0.0;
    x[i] = sample_binomial(rng, remaining, ratio);
    remaining -= x[i];
    mass -= p[i];
  }
  x[3] = remaining;
  return x;
}

}  // namespace octest
