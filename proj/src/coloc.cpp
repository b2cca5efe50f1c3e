#include "eotcoloc/coloc.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>
#include <utility>

#include "eotcoloc/error.hpp"

namespace eotcoloc {

ThresholdGrid::ThresholdGrid(std::vector<double> thresholds) : thresholds_(std::move(thresholds)) {
  if (thresholds_.empty()) throw ValidationError("threshold grid is empty");
  for (std::size_t k = 0; k < thresholds_.size(); ++k) {
    if (!std::isfinite(thresholds_[k])) throw ValidationError("threshold grid has a non-finite entry");
    if (k > 0 && !(thresholds_[k] > thresholds_[k - 1])) {
      throw ValidationError("threshold grid must be strictly increasing (entry " + std::to_string(k) + ")");
    }
  }
  if (thresholds_.front() < 0.0) throw ValidationError("thresholds must be non-negative");
}

void ColocCurve::validate() const {
  if (values.size() != grid.size()) throw ValidationError("curve has a different length than its grid");
  if (values.empty()) throw ValidationError("curve is empty");
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!(values[k] >= -1e-12 && values[k] <= 1.0 + 1e-12)) {
      throw ValidationError("curve value outside [0, 1] at index " + std::to_string(k));
    }
    if (k > 0 && values[k] < values[k - 1]) {
      throw ValidationError("curve decreases at index " + std::to_string(k));
    }
  }
  if (std::abs(values.back() - 1.0) > 1e-9) throw ValidationError("curve does not end at one");
}

namespace {

std::vector<double> bucketed(const Matrix& plan, const Matrix& c, const std::vector<double>& t) {
  std::vector<double> bucket(t.size(), 0.0);
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      const auto k = std::lower_bound(t.begin(), t.end(), c(i, j)) - t.begin();
      bucket[static_cast<std::size_t>(k)] += plan(i, j);
    }
  }
  double run = 0.0;
  for (double& b : bucket) {
    run += b;
    b = run;
  }
  return bucket;
}

std::vector<double> sorted(const Matrix& plan, const Matrix& c, const std::vector<double>& t) {
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(static_cast<std::size_t>(c.size()));
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) pairs.emplace_back(c(i, j), plan(i, j));
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> out(t.size(), 0.0);
  double run = 0.0;
  std::size_t p = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    while (p < pairs.size() && pairs[p].first <= t[k]) run += pairs[p++].second;
    out[k] = run;
  }
  return out;
}

}  // namespace

ColocCurve coloc_curve(const Matrix& plan, const CostMatrix& cost, const ThresholdGrid& grid, CurveMethod method) {
  if (plan.rows() != static_cast<Eigen::Index>(cost.rows()) || plan.cols() != static_cast<Eigen::Index>(cost.cols())) {
    throw ValidationError("plan and cost matrix dimensions differ");
  }
  if (grid.size() == 0) throw ValidationError("threshold grid is empty");
  if (grid.back() < cost.max_cost()) {
    throw ValidationError("threshold grid ends at " + std::to_string(grid.back()) + ", below the largest cost " +
                          std::to_string(cost.max_cost()));
  }
  if (method == CurveMethod::kAuto) {
    method = static_cast<std::size_t>(plan.size()) <= kBucketedCurveLimit ? CurveMethod::kBucketed
                                                                            : CurveMethod::kSorted;
  }
  ColocCurve curve;
  curve.grid = grid;
  curve.values = method == CurveMethod::kBucketed ? bucketed(plan, cost.entries(), grid.thresholds())
                                                  : sorted(plan, cost.entries(), grid.thresholds());
  return curve;
}

ThresholdGrid default_grid(const CostMatrix& cost, std::size_t resolution) {
  if (resolution < 2) throw ValidationError("grid resolution must be at least 2");
  std::unordered_set<double> distinct;
  const Matrix& c = cost.entries();
  bool few = true;
  for (Eigen::Index k = 0; k < c.size() && few; ++k) {
    distinct.insert(c.data()[k]);
    few = distinct.size() <= resolution;
  }
  if (few) {
    std::vector<double> t(distinct.begin(), distinct.end());
    std::sort(t.begin(), t.end());
    return ThresholdGrid(std::move(t));
  }
  const double top = cost.max_cost();
  std::vector<double> t(resolution);
  for (std::size_t k = 0; k + 1 < resolution; ++k) {
    t[k] = top * static_cast<double>(k) / static_cast<double>(resolution - 1);
  }
  t.back() = top;
  return ThresholdGrid(std::move(t));
}

double eval_kernel_functional(const EotSolution& solution, const Matrix& kernel) {
  const Matrix& plan = solution.plan;
  if (kernel.rows() != plan.rows() || kernel.cols() != plan.cols()) {
    throw ValidationError("kernel is " + std::to_string(kernel.rows()) + "x" + std::to_string(kernel.cols()) +
                          " but the plan is " + std::to_string(plan.rows()) + "x" + std::to_string(plan.cols()));
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < plan.rows(); ++i) {
    for (Eigen::Index j = 0; j < plan.cols(); ++j) {
      const double k = kernel(i, j);
      if (!std::isfinite(k)) {
        throw ValidationError("kernel entry (" + std::to_string(i) + ", " + std::to_string(j) + ") is not finite");
      }
      total += k * plan(i, j);
    }
  }
  return total;
}

double sup_distance(const ColocCurve& a, const ColocCurve& b) {
  if (!(a.grid == b.grid)) throw ValidationError("curves are on different threshold grids");
  if (a.values.size() != a.grid.size() || b.values.size() != b.grid.size()) {
    throw ValidationError("curve length does not match its grid");
  }
  double d = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) d = std::max(d, std::abs(a.values[k] - b.values[k]));
  return d;
}

}  // namespace eotcoloc
