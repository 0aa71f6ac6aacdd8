#include "idt/randkit.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "idt/errors.hpp"

namespace idt {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

using Block = std::array<std::uint32_t, 4>;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo,
                    std::uint32_t& hi) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(p);
  hi = static_cast<std::uint32_t>(p >> 32);
}

Block philox4x32_10(Block ctr, std::uint32_t k0, std::uint32_t k1) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kPhiloxM0, ctr[0], lo0, hi0);
    mulhilo(kPhiloxM1, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
    k0 += kPhiloxW0;
    k1 += kPhiloxW1;
  }
  return ctr;
}

constexpr double kTwoPow52Inv = 1.0 / 4503599627370496.0;

}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

void RngState::refill() noexcept {
  const Block ctr{static_cast<std::uint32_t>(block_),
                  static_cast<std::uint32_t>(block_ >> 32),
                  static_cast<std::uint32_t>(stream_),
                  static_cast<std::uint32_t>(stream_ >> 32)};
  const Block out = philox4x32_10(ctr, static_cast<std::uint32_t>(seed_),
                                  static_cast<std::uint32_t>(seed_ >> 32));
  buf_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  buf_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  ++block_;
  avail_ = 2;
}

std::uint64_t RngState::next_u64() noexcept {
  if (avail_ == 0) refill();
  return buf_[2 - avail_--];
}

RngState RngState::split(std::uint64_t k) const noexcept {
  const std::uint64_t key = mix64(mix64(seed_ ^ 0x5851F42D4C957F2Dull) ^
                                  mix64(stream_ + 0x14057B7EF767814Full) ^
                                  mix64(k * 0xD1342543DE82EF95ull + 1));
  return RngState(key, 0);
}

StableParams::StableParams(double index, double skew)
    : index_(index), skew_(skew) {
  if (!(index > 0.0 && index <= 2.0)) {
    throw DomainError("stable index must lie in (0, 2], got " +
                      std::to_string(index));
  }
  if (!(skew >= -1.0 && skew <= 1.0)) {
    throw DomainError("stable skew must lie in [-1, 1], got " +
                      std::to_string(skew));
  }
  if (index == 1.0 && skew != 0.0) {
    throw DomainError(
        "strictly 1-stable laws are restricted to the symmetric Cauchy case "
        "(skew = 0)");
  }
}

double next_uniform(RngState& rng) noexcept {
  // 52-bit lattice shifted by half a step: k + 0.5 stays exact, so the
  // result is never 0 and at most 1 - 2^-53.
  return (static_cast<double>(rng.next_u64() >> 12) + 0.5) * kTwoPow52Inv;
}

double sample_normal(RngState& rng) noexcept {
  // Marsaglia polar method; the second variate is discarded so the state
  // stays a pure counter position.
  for (;;) {
    const double u = 2.0 * next_uniform(rng) - 1.0;
    const double v = 2.0 * next_uniform(rng) - 1.0;
    const double s = u * u + v * v;
    if (s < 1.0 && s > 0.0) {
      return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
}

double sample_exponential(RngState& rng) noexcept {
  return -std::log(next_uniform(rng));
}

double sample_stable(RngState& rng, const StableParams& p) {
  constexpr double pi = std::numbers::pi;
  const double alpha = p.index();
  const double beta = p.skew();
  const double v = pi * (next_uniform(rng) - 0.5);

  if (alpha == 1.0) {
    return std::tan(v);
  }

  const double w = sample_exponential(rng);
  const double zeta = -beta * std::tan(pi * alpha / 2.0);
  const double xi = std::atan(-zeta) / alpha;
  const double scale = std::pow(1.0 + zeta * zeta, 1.0 / (2.0 * alpha));
  const double shifted = alpha * (v + xi);
  return scale * std::sin(shifted) / std::pow(std::cos(v), 1.0 / alpha) *
         std::pow(std::cos(v - shifted) / w, (1.0 - alpha) / alpha);
}

double sample_gamma(RngState& rng, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) ||
      !std::isfinite(rate)) {
    throw DomainError("gamma shape and rate must be positive and finite");
  }
  if (shape < 1.0) {
    const double boosted = sample_gamma(rng, shape + 1.0, rate);
    return boosted * std::exp(std::log(next_uniform(rng)) / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = sample_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = next_uniform(rng);
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return d * v / rate;
    }
  }
}

std::uint64_t sample_poisson(RngState& rng, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw DomainError("poisson mean must be nonnegative and finite");
  }
  if (mean == 0.0) return 0;
  if (mean < 10.0) {
    // Sequential inversion.
    const double u = next_uniform(rng);
    double p = std::exp(-mean);
    double cdf = p;
    std::uint64_t k = 0;
    while (u > cdf && p > 0.0) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }
  // Hormann's PTRS transformed rejection.
  const double smu = std::sqrt(mean);
  const double b = 0.931 + 2.53 * smu;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mean = std::log(mean);
  for (;;) {
    const double u = next_uniform(rng) - 0.5;
    const double v = next_uniform(rng);
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + k * log_mean - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

}  // namespace idt
