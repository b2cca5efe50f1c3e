#include "eotcoloc/random.hpp"

#include <algorithm>

#include "eotcoloc/error.hpp"

namespace eotcoloc {

namespace {

std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed) ^ index);
}

std::size_t RngStream::categorical(std::span<const double> cumulative) noexcept {
  const double u = uniform() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  const auto k = static_cast<std::size_t>(it - cumulative.begin());
  // u * total can round up to the total itself.
  return std::min(k, cumulative.size() - 1);
}

std::vector<double> cumulative_weights(std::span<const double> weights) {
  if (weights.empty()) throw ValidationError("categorical weights are empty");
  std::vector<double> cum(weights.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!(weights[k] >= 0.0)) throw ValidationError("categorical weights must be non-negative");
    acc += weights[k];
    cum[k] = acc;
  }
  if (!(acc > 0.0)) throw ValidationError("categorical weights have zero total");
  return cum;
}

std::vector<std::uint64_t> multinomial_counts(std::span<const double> weights, std::uint64_t draws, RngStream& rng) {
  const auto cum = cumulative_weights(weights);
  std::vector<std::uint64_t> counts(weights.size(), 0);
  for (std::uint64_t k = 0; k < draws; ++k) {
    ++counts[rng.categorical(cum)];
  }
  return counts;
}

}  // namespace eotcoloc
