#include "eotcoloc/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eotcoloc/error.hpp"

namespace eotcoloc {
namespace {

constexpr double kWeightSumTol = 1e-12;
constexpr double kUnitNormTol = 1e-9;
constexpr double kLatticeTol = 1e-6;

std::span<const double> as_span(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

void require_unit_sphere(const DiscreteMeasure& m, const char* which) {
  for (Eigen::Index i = 0; i < m.points().rows(); ++i) {
    const double norm = m.points().row(i).norm();
    if (std::abs(norm - 1.0) > kUnitNormTol) {
      throw ValidationError(std::string("sphere-geodesic cost: ") + which + " atom " + std::to_string(i) +
                            " is off the unit sphere (norm " + std::to_string(norm) + ")");
    }
  }
}

// Integer pixel coordinates of lattice points ((k + 0.5) * pitch).
Eigen::Matrix<long, Eigen::Dynamic, 2, Eigen::RowMajor> lattice_coords(const DiscreteMeasure& m, double pitch,
                                                                       const char* which) {
  if (m.dim() != 2) {
    throw ValidationError(std::string("grid-euclidean cost needs 2-d points; ") + which + " has dimension " +
                          std::to_string(m.dim()));
  }
  Eigen::Matrix<long, Eigen::Dynamic, 2, Eigen::RowMajor> out(m.points().rows(), 2);
  for (Eigen::Index i = 0; i < m.points().rows(); ++i) {
    for (Eigen::Index k = 0; k < 2; ++k) {
      const double scaled = m.points()(i, k) / pitch - 0.5;
      const double rounded = std::round(scaled);
      if (std::abs(scaled - rounded) > kLatticeTol) {
        throw ValidationError(std::string("grid-euclidean cost: ") + which + " atom " + std::to_string(i) +
                              " is not a pixel center for pitch " + std::to_string(pitch));
      }
      out(i, k) = static_cast<long>(rounded);
    }
  }
  return out;
}

}  // namespace

double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double carry = 0.0;
  for (const double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  return sum + carry;
}

DiscreteMeasure::DiscreteMeasure(Matrix points, Vector weights, std::vector<std::size_t> ids, std::string label)
    : points_(std::move(points)), weights_(std::move(weights)), ids_(std::move(ids)), label_(std::move(label)) {
  if (weights_.size() == 0) {
    throw ValidationError("measure needs at least one atom");
  }
  if (points_.rows() != weights_.size()) {
    throw ValidationError("measure has " + std::to_string(points_.rows()) + " points but " +
                          std::to_string(weights_.size()) + " weights");
  }
  if (points_.cols() == 0) {
    throw ValidationError("measure points must have dimension >= 1");
  }
  if (!points_.allFinite()) {
    throw ValidationError("measure points must be finite");
  }
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (!std::isfinite(weights_[i]) || weights_[i] <= 0.0) {
      throw ValidationError("measure weight " + std::to_string(i) + " must be finite and positive");
    }
  }
  const double total = compensated_sum(as_span(weights_));
  if (std::abs(total - 1.0) > kWeightSumTol) {
    throw ValidationError("measure weights sum to " + std::to_string(total) + ", not 1");
  }
  if (ids_.empty()) {
    ids_.resize(size());
    std::iota(ids_.begin(), ids_.end(), std::size_t{0});
  } else if (ids_.size() != size()) {
    throw ValidationError("measure ids must match the number of atoms");
  }
}

DiscreteMeasure DiscreteMeasure::restrict_to(std::span<const std::size_t> positions, Vector weights) const {
  Matrix pts(static_cast<Eigen::Index>(positions.size()), points_.cols());
  std::vector<std::size_t> sub_ids(positions.size());
  for (std::size_t k = 0; k < positions.size(); ++k) {
    if (positions[k] >= size()) {
      throw ValidationError("restrict_to: position out of range");
    }
    pts.row(static_cast<Eigen::Index>(k)) = points_.row(static_cast<Eigen::Index>(positions[k]));
    sub_ids[k] = ids_[positions[k]];
  }
  return DiscreteMeasure(std::move(pts), std::move(weights), std::move(sub_ids), label_);
}

DiscreteMeasure make_measure(const Matrix& points, std::optional<std::span<const double>> weights,
                             std::string label) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (n == 0) {
    throw ValidationError("empty support");
  }
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index k = 0; k < points.cols(); ++k) {
      if (!std::isfinite(points(i, k))) {
        throw ValidationError("non-finite coordinate at atom " + std::to_string(i));
      }
    }
  }

  std::vector<double> w(n, 1.0);
  if (weights) {
    if (weights->size() != n) {
      throw ValidationError("got " + std::to_string(weights->size()) + " weights for " + std::to_string(n) +
                            " points");
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double wi = (*weights)[i];
      if (!std::isfinite(wi)) {
        throw ValidationError("non-finite weight at atom " + std::to_string(i));
      }
      if (wi < 0.0) {
        throw ValidationError("negative weight at atom " + std::to_string(i));
      }
      w[i] = wi;
    }
  }

  const double total = compensated_sum(w);
  if (!(total > 0.0)) {
    throw ValidationError("weights have zero total");
  }
  // Weights already on the simplex are kept bitwise, so re-wrapping is idempotent.
  if (std::abs(total - 1.0) > kWeightSumTol) {
    for (double& wi : w) wi /= total;
  }

  std::vector<std::size_t> keep;
  keep.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (w[i] > 0.0) keep.push_back(i);
  }

  Matrix pts(static_cast<Eigen::Index>(keep.size()), points.cols());
  Vector kept(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    pts.row(static_cast<Eigen::Index>(k)) = points.row(static_cast<Eigen::Index>(keep[k]));
    kept[static_cast<Eigen::Index>(k)] = w[keep[k]];
  }
  if (keep.size() != n) {
    // Dropping atoms cannot move the total beyond round-off, but renormalize
    // the survivors if it did.
    const double kept_total = compensated_sum(as_span(kept));
    if (std::abs(kept_total - 1.0) > kWeightSumTol) kept /= kept_total;
  }
  return DiscreteMeasure(std::move(pts), std::move(kept), std::move(keep), std::move(label));
}

DiscreteMeasure make_measure(const std::vector<std::vector<double>>& points,
                             std::optional<std::span<const double>> weights, std::string label) {
  if (points.empty()) {
    throw ValidationError("empty support");
  }
  const std::size_t d = points.front().size();
  Matrix m(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != d) {
      throw ValidationError("point " + std::to_string(i) + " has dimension " + std::to_string(points[i].size()) +
                            ", expected " + std::to_string(d));
    }
    for (std::size_t k = 0; k < d; ++k) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = points[i][k];
    }
  }
  return make_measure(m, weights, std::move(label));
}

void CostSpec::validate() const {
  switch (kind) {
    case CostKind::kEuclidean:
    case CostKind::kSphereGeodesic:
      return;
    case CostKind::kGridEuclidean:
      if (!(pitch > 0.0) || !std::isfinite(pitch)) {
        throw ValidationError("grid pitch must be positive and finite");
      }
      return;
    case CostKind::kExplicitMatrix:
      if (matrix.size() == 0) {
        throw ValidationError("explicit cost matrix is empty");
      }
      for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
        for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
          const double c = matrix(i, j);
          if (!std::isfinite(c) || c < 0.0) {
            throw ValidationError("explicit cost entry (" + std::to_string(i) + "," + std::to_string(j) +
                                  ") must be finite and >= 0");
          }
        }
      }
      return;
  }
}

std::string to_string(CostKind kind) {
  switch (kind) {
    case CostKind::kEuclidean:
      return "euclidean";
    case CostKind::kSphereGeodesic:
      return "sphere-geodesic";
    case CostKind::kGridEuclidean:
      return "grid-euclidean";
    case CostKind::kExplicitMatrix:
      return "explicit-matrix";
  }
  return "unknown";
}

CostKind parse_cost_kind(const std::string& name) {
  if (name == "euclidean") return CostKind::kEuclidean;
  if (name == "sphere-geodesic" || name == "geodesic") return CostKind::kSphereGeodesic;
  if (name == "grid-euclidean" || name == "grid") return CostKind::kGridEuclidean;
  if (name == "explicit-matrix" || name == "explicit") return CostKind::kExplicitMatrix;
  throw ValidationError("unknown cost kind '" + name + "'");
}

CostMatrix::CostMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.size() == 0) {
    throw ValidationError("cost matrix is empty");
  }
  double mx = 0.0;
  for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
    for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
      const double c = entries_(i, j);
      if (!std::isfinite(c) || c < 0.0) {
        throw ValidationError("cost entry (" + std::to_string(i) + "," + std::to_string(j) +
                              ") must be finite and >= 0");
      }
      mx = std::max(mx, c);
    }
  }
  max_cost_ = mx;
}

CostMatrix realize_cost(const DiscreteMeasure& src, const DiscreteMeasure& tgt, const CostSpec& spec) {
  spec.validate();
  const auto m = static_cast<Eigen::Index>(src.size());
  const auto n = static_cast<Eigen::Index>(tgt.size());
  Matrix c(m, n);

  switch (spec.kind) {
    case CostKind::kEuclidean: {
      if (src.dim() != tgt.dim()) {
        throw ValidationError("dimension mismatch: source is " + std::to_string(src.dim()) + "-d, target is " +
                              std::to_string(tgt.dim()) + "-d");
      }
      const Matrix& x = src.points();
      const Matrix& y = tgt.points();
      for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          c(i, j) = (x.row(i) - y.row(j)).norm();
        }
      }
      break;
    }
    case CostKind::kSphereGeodesic: {
      if (src.dim() != tgt.dim()) {
        throw ValidationError("dimension mismatch between source and target points");
      }
      require_unit_sphere(src, "source");
      require_unit_sphere(tgt, "target");
      const Matrix& x = src.points();
      const Matrix& y = tgt.points();
      for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          const double dot = std::clamp(x.row(i).dot(y.row(j)), -1.0, 1.0);
          c(i, j) = std::acos(dot);
        }
      }
      break;
    }
    case CostKind::kGridEuclidean: {
      const auto a = lattice_coords(src, spec.pitch, "source");
      const auto b = lattice_coords(tgt, spec.pitch, "target");
      for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          const long dx = a(i, 0) - b(j, 0);
          const long dy = a(i, 1) - b(j, 1);
          c(i, j) = spec.pitch * std::sqrt(static_cast<double>(dx * dx + dy * dy));
        }
      }
      break;
    }
    case CostKind::kExplicitMatrix: {
      const auto& rows = src.ids();
      const auto& cols = tgt.ids();
      const auto max_row = *std::max_element(rows.begin(), rows.end());
      const auto max_col = *std::max_element(cols.begin(), cols.end());
      if (max_row >= static_cast<std::size_t>(spec.matrix.rows()) ||
          max_col >= static_cast<std::size_t>(spec.matrix.cols())) {
        throw ValidationError("explicit cost matrix is " + std::to_string(spec.matrix.rows()) + "x" +
                              std::to_string(spec.matrix.cols()) + " but the supports need at least " +
                              std::to_string(max_row + 1) + "x" + std::to_string(max_col + 1));
      }
      for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          c(i, j) = spec.matrix(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]),
                                static_cast<Eigen::Index>(cols[static_cast<std::size_t>(j)]));
        }
      }
      break;
    }
  }
  return CostMatrix(std::move(c));
}

}  // namespace eotcoloc
