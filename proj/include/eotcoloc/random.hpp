#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace eotcoloc {

/// splitmix64(splitmix64(seed) XOR index): the seed of the index-th
/// independent stream under a master seed. Hashing the seed first keeps the
/// stream families of nearby master seeds apart.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Seeded random stream. Uniforms are built from raw 64-bit engine output,
/// so they do not depend on the standard library's distribution code.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  static RngStream derived(std::uint64_t seed, std::uint64_t index) { return RngStream(derive_seed(seed, index)); }

  /// Uniform on [0, 1).
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform on (0, 1].
  double uniform_positive() noexcept { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }
  double normal() { return normal_(engine_); }

  /// Index k with probability proportional to weights[k]; `cumulative` holds
  /// the running sums of the weights.
  std::size_t categorical(std::span<const double> cumulative) noexcept;

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Counts of `draws` i.i.d. categorical draws over `weights` (need not be normalized).
std::vector<std::uint64_t> multinomial_counts(std::span<const double> weights, std::uint64_t draws, RngStream& rng);

std::vector<double> cumulative_weights(std::span<const double> weights);

}  // namespace eotcoloc
