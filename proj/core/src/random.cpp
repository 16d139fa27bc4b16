#include "callroute/random.hpp"

#include <cmath>
#include <random>
#include <string>

#include "callroute/errors.hpp"

namespace callroute {

RngStream derive_stream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept {
  // odd multiplier keeps the id -> state map injective before the bijective mix
  return RngStream(mix64(mix64(master_seed) + stream_id * 0xd1342543de82ef95ULL));
}

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
}

double exponential_quantile(double u, double mean) {
  if (std::isnan(mean) || mean <= 0.0) {
    throw InvalidConfig("mean", "exponential mean must be positive, got " + std::to_string(mean));
  }
  if (std::isinf(mean)) return mean;
  return -mean * std::log1p(-u);
}

double sample_exponential(RngStream& rng, double mean) {
  return exponential_quantile(rng.uniform(), mean);
}

}  // namespace callroute
