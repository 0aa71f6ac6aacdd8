#pragma once

// Deterministic counter-based random numbers and the elementary samplers
// every path generator draws from.

#include <array>
#include <cstdint>

namespace idt {

/// Philox4x32-10 keyed by `seed`, with `stream` occupying the upper half of
/// the 128-bit counter. The state is a plain value: copy it to fork, never
/// share it mutably between threads.
class RngState {
 public:
  explicit RngState(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  std::uint64_t position() const noexcept { return block_ * 2 - avail_; }

  std::uint64_t next_u64() noexcept;

  /// Independent child generator with a key derived from (seed, stream, k),
  /// starting at stream 0.
  RngState split(std::uint64_t k) const noexcept;

  friend bool operator==(const RngState&, const RngState&) = default;

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buf_{};
  std::uint32_t avail_ = 0;
};

/// SplitMix64 finalizer; used for key derivation.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Parameters of a strictly stable law in the 1-parametrization with unit
/// scale and zero shift: E exp(iθX) = exp(-|θ|^α (1 - iβ sign(θ) tan(πα/2)))
/// for α != 1, and exp(-|θ|) for α = 1 (where only β = 0 is accepted).
class StableParams {
 public:
  StableParams(double index, double skew = 0.0);

  double index() const noexcept { return index_; }
  double skew() const noexcept { return skew_; }

 private:
  double index_;
  double skew_;
};

/// Uniform draw strictly inside (0, 1).
double next_uniform(RngState& rng) noexcept;

double sample_normal(RngState& rng) noexcept;

double sample_exponential(RngState& rng) noexcept;

/// Chambers-Mallows-Stuck.
double sample_stable(RngState& rng, const StableParams& p);

/// Marsaglia-Tsang; shape < 1 goes through the shape + 1 boost.
double sample_gamma(RngState& rng, double shape, double rate);

std::uint64_t sample_poisson(RngState& rng, double mean);

}  // namespace idt
