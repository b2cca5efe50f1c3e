#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <vector>

#include "eotcoloc/measure.hpp"
#include "eotcoloc/random.hpp"

namespace eotcoloc {

struct GaussianMixtureSpec {
  std::vector<double> weights;
  std::vector<Eigen::Vector2d> means;
  std::vector<Eigen::Matrix2d> covariances;

  void validate() const;
};

struct VmfMixtureSpec {
  std::vector<double> weights;
  std::vector<Eigen::Vector3d> mean_directions;
  std::vector<double> concentrations;

  void validate() const;
};

/// n i.i.d. draws as a uniform-weight measure: a component is picked by its
/// weight, then a standard normal pair is mapped through the symmetric square
/// root of the component covariance.
DiscreteMeasure sample_gaussian_mixture(const GaussianMixtureSpec& spec, std::size_t n, RngStream& rng);

/// n i.i.d. unit vectors on S^2 as a uniform-weight measure.
DiscreteMeasure sample_vmf_mixture(const VmfMixtureSpec& spec, std::size_t n, RngStream& rng);

/// One von Mises-Fisher draw on S^2 with mean direction `mean` (unit) and concentration kappa > 0.
Eigen::Vector3d sample_vmf(const Eigen::Vector3d& mean, double kappa, RngStream& rng);

/// Cosine w = <mean, X> of a vMF draw: inverse CDF of the density proportional
/// to exp(kappa w) on [-1, 1], given u uniform on (0, 1].
double vmf_cosine_from_uniform(double kappa, double u);

/// Standard planar Gaussian versus the three-component mixture with weights
/// (0.3, 0.3, 0.4), means (-1, 3), (10, -1), (15, 5) and shared covariance
/// [[1, -0.8], [-0.8, 1]].
GaussianMixtureSpec scenario_i_source();
GaussianMixtureSpec scenario_i_target();

/// vMF((0, 0, 1), 50) versus the mixture with weights (0.3, 0.3, 0.4),
/// concentrations (60, 70, 80) and mean directions (sqrt3, sqrt2, 2) / 3,
/// (0, -1, 0) and -(sqrt2 / 2)(1, 0, 1).
VmfMixtureSpec scenario_ii_source();
VmfMixtureSpec scenario_ii_target();

}  // namespace eotcoloc
