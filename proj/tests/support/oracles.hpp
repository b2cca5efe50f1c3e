#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "eotcoloc/measure.hpp"
#include "eotcoloc/random.hpp"
#include "eotcoloc/types.hpp"

namespace eotcoloc::testing {

/// Exhaustive search over permutations of a square cost matrix (n <= 9).
struct Assignment {
  std::vector<std::size_t> perm;  // row i goes to column perm[i]
  double cost = 0.0;              // mean of c(i, perm[i])
};
Assignment brute_force_assignment(const Matrix& cost);

/// Plan with mass 1/n on (i, perm[i]).
Matrix permutation_plan(const std::vector<std::size_t>& perm);

/// Kolmogorov-Smirnov statistic of `sample` against a continuous CDF.
template <class Cdf>
double ks_statistic(std::vector<double> sample, Cdf&& cdf);

/// Asymptotic p-value of sqrt(n) D under the Kolmogorov distribution.
double ks_p_value(double d, std::size_t n);

/// Uniform random matrix with entries in [lo, hi).
Matrix random_matrix(std::size_t rows, std::size_t cols, RngStream& rng, double lo = 0.0, double hi = 1.0);

/// Random measure with `n` atoms in [0, 1]^dim and weights from a (0.1, 1) range.
DiscreteMeasure random_measure(std::size_t n, std::size_t dim, RngStream& rng, bool uniform_weights = false);

template <class Cdf>
double ks_statistic(std::vector<double> sample, Cdf&& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t k = 0; k < sample.size(); ++k) {
    const double f = cdf(sample[k]);
    d = std::max({d, static_cast<double>(k + 1) / n - f, f - static_cast<double>(k) / n});
  }
  return d;
}

}  // namespace eotcoloc::testing
