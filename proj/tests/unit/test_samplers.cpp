#include <doctest.h>

#include <cmath>
#include <vector>

#include "eotcoloc/error.hpp"
#include "eotcoloc/samplers.hpp"
#include "oracles.hpp"

using namespace eotcoloc;

namespace {

// Nearest component mean, which identifies the component for well separated mixtures.
std::size_t nearest(const std::vector<Eigen::Vector2d>& means, const Eigen::Vector2d& x) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < means.size(); ++k) {
    if ((x - means[k]).norm() < (x - means[best]).norm()) best = k;
  }
  return best;
}

}  // namespace

TEST_CASE("standard Gaussian mean") {
  GaussianMixtureSpec spec{{1.0}, {Eigen::Vector2d::Zero()}, {Eigen::Matrix2d::Identity()}};
  RngStream rng(10);
  const auto m = sample_gaussian_mixture(spec, 100000, rng);
  CHECK(m.size() == 100000);
  CHECK(std::abs(m.points().col(0).mean()) < 0.02);
  CHECK(std::abs(m.points().col(1).mean()) < 0.02);
  CHECK(m.weights().isApproxToConstant(1e-5));
}

TEST_CASE("degenerate mixture weights") {
  GaussianMixtureSpec spec = scenario_i_target();
  spec.weights = {1.0, 0.0, 0.0};
  RngStream rng(11);
  const auto m = sample_gaussian_mixture(spec, 2000, rng);
  for (Eigen::Index i = 0; i < m.points().rows(); ++i) {
    CHECK(nearest(spec.means, m.points().row(i).transpose()) == 0);
  }
}

TEST_CASE("scenario I component frequencies") {
  const auto spec = scenario_i_target();
  RngStream rng(12);
  const auto m = sample_gaussian_mixture(spec, 100000, rng);
  std::vector<double> freq(3, 0.0);
  for (Eigen::Index i = 0; i < m.points().rows(); ++i) freq[nearest(spec.means, m.points().row(i).transpose())] += 1e-5;
  CHECK(std::abs(freq[0] - 0.3) < 0.01);
  CHECK(std::abs(freq[1] - 0.3) < 0.01);
  CHECK(std::abs(freq[2] - 0.4) < 0.01);
}

TEST_CASE("Gaussian covariance") {
  GaussianMixtureSpec corr{{1.0}, {Eigen::Vector2d(1, 2)}, {scenario_i_target().covariances[0]}};
  RngStream rng(13);
  const auto m = sample_gaussian_mixture(corr, 100000, rng);
  const Eigen::MatrixXd centered = m.points().rowwise() - m.points().colwise().mean();
  const Eigen::Matrix2d cov = centered.transpose() * centered / 99999.0;
  CHECK(cov(0, 1) == doctest::Approx(-0.8).epsilon(0.02));
  CHECK(cov(0, 0) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("mixture spec validation") {
  RngStream rng(14);
  GaussianMixtureSpec bad = scenario_i_target();
  bad.weights = {0.5, 0.5};
  CHECK_THROWS_AS(sample_gaussian_mixture(bad, 10, rng), ValidationError);
  bad = scenario_i_target();
  bad.covariances[0] << 1, 2, 2, 1;
  CHECK_THROWS_AS(sample_gaussian_mixture(bad, 10, rng), ValidationError);
  CHECK_THROWS_AS(sample_gaussian_mixture(scenario_i_target(), 0, rng), ValidationError);
  VmfMixtureSpec vbad = scenario_ii_target();
  vbad.concentrations[0] = 0.0;
  CHECK_THROWS_AS(sample_vmf_mixture(vbad, 10, rng), ValidationError);
  vbad = scenario_ii_target();
  vbad.mean_directions[0] = Eigen::Vector3d(1, 1, 0);
  CHECK_THROWS_AS(sample_vmf_mixture(vbad, 10, rng), ValidationError);
}

TEST_CASE("vMF samples are unit vectors") {
  RngStream rng(15);
  const auto m = sample_vmf_mixture(scenario_ii_target(), 10000, rng);
  for (Eigen::Index i = 0; i < m.points().rows(); ++i) CHECK(std::abs(m.points().row(i).norm() - 1.0) <= 1e-12);
}

TEST_CASE("vMF mean resultant") {
  const Eigen::Vector3d a = Eigen::Vector3d(1, 2, 2) / 3.0;
  for (double kappa : {1.0, 50.0}) {
    RngStream rng(16);
    double sum = 0.0;
    for (int k = 0; k < 100000; ++k) sum += a.dot(sample_vmf(a, kappa, rng));
    CHECK(std::abs(sum / 1e5 - (1.0 / std::tanh(kappa) - 1.0 / kappa)) < 0.005);
  }
}

TEST_CASE("vMF concentrates for large kappa") {
  const Eigen::Vector3d a(0, 1, 0);
  RngStream rng(17);
  for (int k = 0; k < 10000; ++k) CHECK((sample_vmf(a, 1e6, rng) - a).norm() < 0.01);
}

TEST_CASE("vMF cosine inverse CDF") {
  for (double kappa : {0.5, 50.0, 1e4}) {
    CHECK(vmf_cosine_from_uniform(kappa, 1.0) == doctest::Approx(1.0));
    for (double u : {1e-300, 0.01, 0.3, 0.9}) {
      const double w = vmf_cosine_from_uniform(kappa, u);
      CHECK(w >= -1.0);
      CHECK(w <= 1.0);
      const double cdf = std::expm1(kappa * (w + 1.0)) / std::expm1(2.0 * kappa);
      if (kappa < 100) CHECK(cdf == doctest::Approx(u).epsilon(1e-9));
    }
  }
}

TEST_CASE("scenario II source KS") {
  RngStream rng(18);
  const auto m = sample_vmf_mixture(scenario_ii_source(), 20000, rng);
  std::vector<double> w(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) w[i] = m.points()(static_cast<Eigen::Index>(i), 2);
  const double kappa = 50.0;
  const double d = testing::ks_statistic(w, [&](double x) { return std::expm1(kappa * (x + 1)) / std::expm1(2 * kappa); });
  CHECK(testing::ks_p_value(d, w.size()) > 1e-3);
}
