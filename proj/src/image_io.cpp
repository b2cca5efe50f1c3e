#include "eotcoloc/image_io.hpp"

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "eotcoloc/error.hpp"
#include "eotcoloc/io.hpp"

namespace eotcoloc {

GridMeasure::GridMeasure(Matrix intensities, double pitch) : intensities_(std::move(intensities)), pitch_(pitch) {
  if (!(pitch_ > 0.0) || !std::isfinite(pitch_)) throw ValidationError("pitch must be positive and finite");
  if (intensities_.size() == 0) throw ValidationError("image is empty");
  for (Eigen::Index i = 0; i < intensities_.rows(); ++i) {
    for (Eigen::Index j = 0; j < intensities_.cols(); ++j) {
      const double v = intensities_(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        throw ValidationError("pixel (" + std::to_string(i) + ", " + std::to_string(j) +
                              ") must be finite and non-negative");
      }
    }
  }
  std::vector<double> flat(intensities_.data(), intensities_.data() + intensities_.size());
  total_ = compensated_sum(flat);
  if (!(total_ > 0.0)) throw ValidationError("image has no positive intensity");
}

GridMeasure read_grid(std::istream& in, double pitch) { return GridMeasure(read_matrix_text(in), pitch); }

GridMeasure load_grid(const std::filesystem::path& path, double pitch) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_grid(in, pitch);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

namespace {

DiscreteMeasure pixel_measure(const GridMeasure& grid, const std::vector<double>& weights) {
  const Matrix& img = grid.intensities();
  std::vector<std::size_t> ids;
  std::vector<double> w;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] > 0.0) {
      ids.push_back(k);
      w.push_back(weights[k]);
    }
  }
  Matrix pts(static_cast<Eigen::Index>(ids.size()), 2);
  const auto width = static_cast<std::size_t>(img.cols());
  for (std::size_t a = 0; a < ids.size(); ++a) {
    const auto row = static_cast<double>(ids[a] / width);
    const auto col = static_cast<double>(ids[a] % width);
    pts(static_cast<Eigen::Index>(a), 0) = (col + 0.5) * grid.pitch();
    pts(static_cast<Eigen::Index>(a), 1) = (row + 0.5) * grid.pitch();
  }
  return DiscreteMeasure(std::move(pts), Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size())),
                         std::move(ids));
}

}  // namespace

DiscreteMeasure to_measure(const GridMeasure& grid) {
  const Matrix& img = grid.intensities();
  std::vector<double> w(img.data(), img.data() + img.size());
  for (double& v : w) v /= grid.total();
  return pixel_measure(grid, w);
}

DiscreteMeasure subsample_grid(const GridMeasure& grid, std::size_t n, RngStream& rng) {
  if (n < 1) throw ValidationError("subsample size must be at least 1");
  const Matrix& img = grid.intensities();
  const auto counts = multinomial_counts(std::span<const double>(img.data(), static_cast<std::size_t>(img.size())), n, rng);
  std::vector<double> w(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) w[k] = static_cast<double>(counts[k]) / static_cast<double>(n);
  return pixel_measure(grid, w);
}

}  // namespace eotcoloc
