#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "eotcoloc/coloc.hpp"
#include "eotcoloc/measure.hpp"
#include "eotcoloc/random.hpp"
#include "eotcoloc/sinkhorn.hpp"

namespace eotcoloc {

struct BootstrapConfig {
  std::size_t replicates = 1000;
  double alpha = 0.05;
  // Draws per resampled measure; 0 means the number of source (target) atoms.
  std::size_t resample_m = 0;
  std::size_t resample_n = 0;
  std::uint64_t seed = 0;
  bool warm_start = true;
  // Threads used for replicates. Results do not depend on it.
  std::size_t workers = 1;

  void validate() const;
};

struct BandResult {
  double alpha = 0.0;
  std::size_t replicates = 0;
  ColocCurve center;
  double q_star = 0.0;      // in units of the sqrt(mn / (m + n)) scaled statistic
  double rate = 0.0;        // sqrt(mn / (m + n)) with the resample sizes
  double half_width = 0.0;  // q_star / rate
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> replicate_sups;  // rate * sup-distance, in replicate order
};

/// Empirical measure of `size` i.i.d. draws from `measure`: same atoms (and
/// ids), multinomial counts divided by size, zero counts dropped.
DiscreteMeasure resample(const DiscreteMeasure& measure, std::size_t size, RngStream& rng);

/// The ceil(B (1 - alpha))-th smallest value. Throws when B (1 - alpha) < 1.
double upper_quantile(std::span<const double> values, double alpha);

/// Band center -/+ q_star / rate clamped to [0, 1], from precomputed replicate sups.
BandResult assemble_band(ColocCurve center, std::vector<double> replicate_sups, double alpha, double rate);

/// n-out-of-n bootstrap band for the colocalization curve on `grid`.
///
/// Replicate b resamples the source and then the target from the stream
/// RngStream::derived(seed, b), so the first B sups do not change when more
/// replicates are requested, and the output is the same for any worker count.
/// A replicate that fails to converge aborts the run with a ConvergenceError
/// carrying its index (the lowest failing index when several fail).
BandResult bootstrap_band(const DiscreteMeasure& src, const DiscreteMeasure& tgt, const CostSpec& cost_spec,
                          const SolverConfig& solver_cfg, const ThresholdGrid& grid, const BootstrapConfig& boot_cfg);

/// Same, on default_grid(center cost, resolution).
BandResult bootstrap_band(const DiscreteMeasure& src, const DiscreteMeasure& tgt, const CostSpec& cost_spec,
                          const SolverConfig& solver_cfg, std::size_t resolution, const BootstrapConfig& boot_cfg);

/// Matched empirical quantiles at probabilities (k - 0.5) / K, K the shorter length.
std::vector<std::pair<double, double>> qq_data(std::span<const double> boot, std::span<const double> mc);

struct CoverageResult {
  std::size_t repetitions = 0;
  std::size_t covered = 0;
  double coverage = 0.0;
};

/// Repetition r draws subsamples of resample_m / resample_n points from src and
/// tgt (stream derived(master_seed, 2r)), builds a band on them with seed
/// derive_seed(master_seed, 2r + 1), and checks that `truth` lies inside it
/// everywhere (up to 1e-9). The band's rate uses the subsample sizes.
CoverageResult coverage_experiment(const ColocCurve& truth, const DiscreteMeasure& src, const DiscreteMeasure& tgt,
                                   const CostSpec& cost_spec, const SolverConfig& solver_cfg,
                                   const BootstrapConfig& boot_cfg, std::size_t repetitions,
                                   std::uint64_t master_seed);

}  // namespace eotcoloc
