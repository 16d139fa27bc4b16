#pragma once

#include <cstdint>
#include <limits>

namespace callroute {

// SplitMix64 finalizer; a bijection on 64-bit words with full avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// SplitMix64 generator: 64 bits of state, satisfies
// UniformRandomBitGenerator so it can drive std::shuffle.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit constexpr RngStream(std::uint64_t state) noexcept : state_(state) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  constexpr result_type operator()() noexcept {
    state_ += kGamma;
    return mix64(state_);
  }

  // Unit-uniform in [0, 1) with 53 bits of resolution.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t state() const noexcept { return state_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t state_;
};

// Stateless derivation: the stream for (seed, id) never depends on any
// other stream having been drawn from. Injective in stream_id.
RngStream derive_stream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept;

// Seed drawn from std::random_device, for unseeded runs.
std::uint64_t entropy_seed();

// Inverse CDF: -mean * ln(1 - u). Infinite mean yields +infinity.
double exponential_quantile(double u, double mean);

// Throws InvalidConfig on a non-positive or NaN mean.
double sample_exponential(RngStream& rng, double mean);

}  // namespace callroute
