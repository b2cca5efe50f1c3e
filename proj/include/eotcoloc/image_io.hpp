#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>

#include "eotcoloc/measure.hpp"
#include "eotcoloc/random.hpp"
#include "eotcoloc/types.hpp"

namespace eotcoloc {

/// Pixel intensities (row i = image row i, top first) on a square lattice.
/// Pixel (i, j) sits at ((j + 0.5) * pitch, (i + 0.5) * pitch).
class GridMeasure {
 public:
  GridMeasure(Matrix intensities, double pitch = 1.0);

  std::size_t width() const noexcept { return static_cast<std::size_t>(intensities_.cols()); }
  std::size_t height() const noexcept { return static_cast<std::size_t>(intensities_.rows()); }
  /// Pixels before zero-intensity pruning.
  std::size_t pixel_count() const noexcept { return width() * height(); }
  double pitch() const noexcept { return pitch_; }
  const Matrix& intensities() const noexcept { return intensities_; }
  double total() const noexcept { return total_; }

 private:
  Matrix intensities_;
  double pitch_;
  double total_ = 0.0;
};

/// Parses a rectangular plain-text matrix; entries separated by whitespace
/// and/or commas, blank lines ignored.
GridMeasure read_grid(std::istream& in, double pitch = 1.0);
GridMeasure load_grid(const std::filesystem::path& path, double pitch = 1.0);

/// Atoms at the centers of non-zero pixels, row-major, weights = intensity / total.
/// Atom ids are the row-major pixel index, so costs can be matched across subsamples.
DiscreteMeasure to_measure(const GridMeasure& grid);

/// n multinomial draws from the normalized intensities, as counts / n on pixel centers.
DiscreteMeasure subsample_grid(const GridMeasure& grid, std::size_t n, RngStream& rng);

}  // namespace eotcoloc
