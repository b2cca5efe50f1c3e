#pragma once

#include <cstddef>
#include <vector>

#include "eotcoloc/measure.hpp"
#include "eotcoloc/sinkhorn.hpp"
#include "eotcoloc/types.hpp"

namespace eotcoloc {

/// Strictly increasing, finite, non-negative thresholds (cost units).
class ThresholdGrid {
 public:
  ThresholdGrid() = default;
  explicit ThresholdGrid(std::vector<double> thresholds);

  const std::vector<double>& thresholds() const noexcept { return thresholds_; }
  std::size_t size() const noexcept { return thresholds_.size(); }
  double operator[](std::size_t k) const { return thresholds_[k]; }
  double back() const { return thresholds_.back(); }

  friend bool operator==(const ThresholdGrid&, const ThresholdGrid&) = default;

 private:
  std::vector<double> thresholds_;
};

/// t -> mass of the plan on {c <= t}, sampled on a grid.
struct ColocCurve {
  ThresholdGrid grid;
  std::vector<double> values;

  /// Non-decreasing, inside [0, 1] up to 1e-12, last value 1 within 1e-9.
  void validate() const;
};

enum class CurveMethod { kAuto, kBucketed, kSorted };

/// Entries beyond which kAuto switches from bucketed sums to a sorted CDF.
inline constexpr std::size_t kBucketedCurveLimit = 10'000'000;

/// values[k] = sum of plan(i, j) over c(i, j) <= grid[k].
///
/// The grid must reach the largest cost so the curve ends at one; thresholds
/// above it are allowed (a bootstrap replicate never has a larger maximum than
/// the sample its grid was built for).
ColocCurve coloc_curve(const Matrix& plan, const CostMatrix& cost, const ThresholdGrid& grid,
                       CurveMethod method = CurveMethod::kAuto);

inline ColocCurve coloc_curve(const EotSolution& solution, const CostMatrix& cost, const ThresholdGrid& grid,
                              CurveMethod method = CurveMethod::kAuto) {
  return coloc_curve(solution.plan, cost, grid, method);
}

/// Sorted distinct costs when there are at most `resolution` of them,
/// otherwise `resolution` equispaced points from 0 to max_cost.
ThresholdGrid default_grid(const CostMatrix& cost, std::size_t resolution = 200);

/// sum_ij kernel(i, j) plan(i, j).
double eval_kernel_functional(const EotSolution& solution, const Matrix& kernel);

/// max_k |a.values[k] - b.values[k]|; the grids must be identical.
double sup_distance(const ColocCurve& a, const ColocCurve& b);

}  // namespace eotcoloc
