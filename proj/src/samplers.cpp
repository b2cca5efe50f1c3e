#include "eotcoloc/samplers.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <string>

#include "eotcoloc/error.hpp"

namespace eotcoloc {
namespace {

constexpr double kSimplexTol = 1e-12;
constexpr double kUnitTol = 1e-9;

void check_simplex(const std::vector<double>& w, const char* what) {
  if (w.empty()) throw ValidationError(std::string(what) + ": no mixture components");
  for (double x : w) {
    if (!std::isfinite(x) || x < 0.0) throw ValidationError(std::string(what) + ": weights must be non-negative");
  }
  if (std::abs(compensated_sum(w) - 1.0) > kSimplexTol) {
    throw ValidationError(std::string(what) + ": weights must sum to 1");
  }
}

// Symmetric square root; eigenvalues within round-off of zero are clamped.
Eigen::Matrix2d symmetric_sqrt(const Eigen::Matrix2d& cov, std::size_t component) {
  if (!cov.allFinite() || std::abs(cov(0, 1) - cov(1, 0)) > 1e-12 * (1.0 + cov.cwiseAbs().maxCoeff())) {
    throw ValidationError("covariance " + std::to_string(component) + " is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  Eigen::Vector2d ev = eig.eigenvalues();
  const double tol = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (Eigen::Index k = 0; k < 2; ++k) {
    if (ev[k] < -tol) {
      throw ValidationError("covariance " + std::to_string(component) + " is not positive semi-definite");
    }
    ev[k] = std::sqrt(std::max(ev[k], 0.0));
  }
  return eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
}

DiscreteMeasure uniform_measure(const Matrix& points, std::string label) {
  return make_measure(points, std::nullopt, std::move(label));
}

}  // namespace

void GaussianMixtureSpec::validate() const {
  check_simplex(weights, "gaussian mixture");
  if (means.size() != weights.size() || covariances.size() != weights.size()) {
    throw ValidationError("gaussian mixture: weights, means and covariances must have equal length");
  }
  for (std::size_t k = 0; k < covariances.size(); ++k) {
    const Eigen::Matrix2d& s = covariances[k];
    if (!means[k].allFinite()) throw ValidationError("gaussian mixture: non-finite mean");
    symmetric_sqrt(s, k);
  }
}

void VmfMixtureSpec::validate() const {
  check_simplex(weights, "vMF mixture");
  if (mean_directions.size() != weights.size() || concentrations.size() != weights.size()) {
    throw ValidationError("vMF mixture: weights, directions and concentrations must have equal length");
  }
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (std::abs(mean_directions[k].norm() - 1.0) > kUnitTol) {
      throw ValidationError("vMF mixture: mean direction " + std::to_string(k) + " is not a unit vector");
    }
    if (!(concentrations[k] > 0.0) || !std::isfinite(concentrations[k])) {
      throw ValidationError("vMF mixture: concentration must be positive");
    }
  }
}

DiscreteMeasure sample_gaussian_mixture(const GaussianMixtureSpec& spec, std::size_t n, RngStream& rng) {
  spec.validate();
  if (n == 0) throw ValidationError("sample size must be >= 1");
  std::vector<Eigen::Matrix2d> roots;
  for (std::size_t k = 0; k < spec.covariances.size(); ++k) roots.push_back(symmetric_sqrt(spec.covariances[k], k));
  const auto cum = cumulative_weights(spec.weights);

  Matrix pts(static_cast<Eigen::Index>(n), 2);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = rng.categorical(cum);
    Eigen::Vector2d z;
    z[0] = rng.normal();
    z[1] = rng.normal();
    pts.row(static_cast<Eigen::Index>(i)) = (spec.means[k] + roots[k] * z).transpose();
  }
  return uniform_measure(pts, "gaussian-mixture");
}

double vmf_cosine_from_uniform(double kappa, double u) {
  // CDF (e^{kappa w} - e^{-kappa}) / (e^{kappa} - e^{-kappa}) inverted in a
  // form that stays finite for large kappa.
  return 1.0 + std::log(u + (1.0 - u) * std::exp(-2.0 * kappa)) / kappa;
}

Eigen::Vector3d sample_vmf(const Eigen::Vector3d& mean, double kappa, RngStream& rng) {
  const double w = std::max(-1.0, std::min(1.0, vmf_cosine_from_uniform(kappa, rng.uniform_positive())));
  const double angle = 2.0 * std::numbers::pi * rng.uniform();
  const double r = std::sqrt(std::max(0.0, 1.0 - w * w));
  Eigen::Vector3d x(r * std::cos(angle), r * std::sin(angle), w);

  // Householder reflection taking the north pole to `mean`.
  const Eigen::Vector3d north(0.0, 0.0, 1.0);
  const Eigen::Vector3d v = north - mean;
  const double vv = v.squaredNorm();
  if (vv > 1e-30) x -= (2.0 * v.dot(x) / vv) * v;
  return x.normalized();
}

DiscreteMeasure sample_vmf_mixture(const VmfMixtureSpec& spec, std::size_t n, RngStream& rng) {
  spec.validate();
  if (n == 0) throw ValidationError("sample size must be >= 1");
  const auto cum = cumulative_weights(spec.weights);
  Matrix pts(static_cast<Eigen::Index>(n), 3);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = rng.categorical(cum);
    pts.row(static_cast<Eigen::Index>(i)) =
        sample_vmf(spec.mean_directions[k].normalized(), spec.concentrations[k], rng).transpose();
  }
  return uniform_measure(pts, "vmf-mixture");
}

GaussianMixtureSpec scenario_i_source() {
  return GaussianMixtureSpec{{1.0}, {Eigen::Vector2d(0.0, 0.0)}, {Eigen::Matrix2d::Identity()}};
}

GaussianMixtureSpec scenario_i_target() {
  Eigen::Matrix2d cov;
  cov << 1.0, -0.8, -0.8, 1.0;
  return GaussianMixtureSpec{{0.3, 0.3, 0.4},
                             {Eigen::Vector2d(-1.0, 3.0), Eigen::Vector2d(10.0, -1.0), Eigen::Vector2d(15.0, 5.0)},
                             {cov, cov, cov}};
}

VmfMixtureSpec scenario_ii_source() { return VmfMixtureSpec{{1.0}, {Eigen::Vector3d(0.0, 0.0, 1.0)}, {50.0}}; }

VmfMixtureSpec scenario_ii_target() {
  const double s2 = std::sqrt(2.0);
  const double s3 = std::sqrt(3.0);
  return VmfMixtureSpec{{0.3, 0.3, 0.4},
                        {Eigen::Vector3d(s3, s2, 2.0) / 3.0, Eigen::Vector3d(0.0, -1.0, 0.0),
                         -(s2 / 2.0) * Eigen::Vector3d(1.0, 0.0, 1.0)},
                        {60.0, 70.0, 80.0}};
}

}  // namespace eotcoloc
