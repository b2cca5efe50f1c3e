#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eotcoloc/types.hpp"

namespace eotcoloc {

/// Finitely supported probability measure on R^d.
///
/// Atoms carry an id: the index of the atom in the root support it was built
/// from. make_measure assigns the input position, and resampling keeps the
/// parent's ids, so a resampled measure can be matched back to its origin
/// (explicit cost rows/columns, warm-start potentials).
class DiscreteMeasure {
 public:
  /// Checks every invariant; weights must already lie on the simplex.
  DiscreteMeasure(Matrix points, Vector weights, std::vector<std::size_t> ids = {},
                  std::string label = {});

  std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.size()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(points_.cols()); }

  const Matrix& points() const noexcept { return points_; }
  const Vector& weights() const noexcept { return weights_; }
  const std::vector<std::size_t>& ids() const noexcept { return ids_; }
  const std::string& label() const noexcept { return label_; }

  /// Measure on a subset of this support. `positions` index into this measure,
  /// `weights` must be positive and sum to one.
  DiscreteMeasure restrict_to(std::span<const std::size_t> positions, Vector weights) const;

 private:
  Matrix points_;
  Vector weights_;
  std::vector<std::size_t> ids_;
  std::string label_;
};

/// Builds a measure from raw atoms. Weights default to uniform, are normalized
/// to sum one and zero-weight atoms are dropped (input order kept otherwise).
DiscreteMeasure make_measure(const Matrix& points,
                             std::optional<std::span<const double>> weights = std::nullopt,
                             std::string label = {});

DiscreteMeasure make_measure(const std::vector<std::vector<double>>& points,
                             std::optional<std::span<const double>> weights = std::nullopt,
                             std::string label = {});

enum class CostKind { kEuclidean, kSphereGeodesic, kGridEuclidean, kExplicitMatrix };

/// Declares the ground cost.
///
/// kGridEuclidean expects 2-d points on the pixel-center lattice
/// ((j + 0.5) * pitch, (i + 0.5) * pitch) and evaluates pitch * |offset| from
/// integer pixel offsets, so equal offsets give bitwise-equal costs.
/// kExplicitMatrix indexes `matrix` by atom id (row = source id, column = target id).
struct CostSpec {
  CostKind kind = CostKind::kEuclidean;
  double pitch = 1.0;
  Matrix matrix;

  static CostSpec euclidean() { return {}; }
  static CostSpec sphere_geodesic() { return {CostKind::kSphereGeodesic, 1.0, {}}; }
  static CostSpec grid_euclidean(double pitch = 1.0) { return {CostKind::kGridEuclidean, pitch, {}}; }
  static CostSpec explicit_matrix(Matrix m) { return {CostKind::kExplicitMatrix, 1.0, std::move(m)}; }

  void validate() const;
};

std::string to_string(CostKind kind);
CostKind parse_cost_kind(const std::string& name);

/// Realized m x n ground cost, entries finite and non-negative.
class CostMatrix {
 public:
  explicit CostMatrix(Matrix entries);

  const Matrix& entries() const noexcept { return entries_; }
  double max_cost() const noexcept { return max_cost_; }
  std::size_t rows() const noexcept { return static_cast<std::size_t>(entries_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(entries_.cols()); }
  double operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }

 private:
  Matrix entries_;
  double max_cost_ = 0.0;
};

CostMatrix realize_cost(const DiscreteMeasure& src, const DiscreteMeasure& tgt, const CostSpec& spec);

/// Neumaier-compensated sum.
double compensated_sum(std::span<const double> values);

}  // namespace eotcoloc
