#include <doctest.h>

#include <cmath>
#include <vector>

#include "eotcoloc/error.hpp"
#include "eotcoloc/sinkhorn.hpp"
#include "oracles.hpp"

using namespace eotcoloc;

namespace {

using Points = std::vector<std::vector<double>>;

struct TwoByTwo {
  DiscreteMeasure mu = make_measure(Points{{0.0}, {1.0}});
  DiscreteMeasure nu = make_measure(Points{{0.0}, {1.0}});
  CostMatrix cost = realize_cost(mu, nu, CostSpec::euclidean());
};

// Diagonal mass a of the symmetric 2x2 instance at lambda = 1: a / (0.5 - a) = e.
const double kDiag = 0.5 * std::exp(1.0) / (1.0 + std::exp(1.0));

}  // namespace

TEST_CASE("single atoms couple trivially") {
  const auto x = make_measure(Points{{0.0, 0.0}});
  const auto y = make_measure(Points{{3.0, 4.0}});
  const auto c = realize_cost(x, y, CostSpec::euclidean());
  for (double lambda : {1e-3, 1.0, 50.0}) {
    SolverConfig cfg;
    cfg.lambda = lambda;
    const auto s = solve(x, y, c, cfg);
    CHECK(s.converged);
    CHECK(s.plan(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.potentials.f(0) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(s.potentials.g(0) == doctest::Approx(0.0));
    CHECK(s.primal_value == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(s.dual_value == doctest::Approx(5.0).epsilon(1e-12));
  }
}

TEST_CASE("zero cost gives the independent coupling") {
  const auto mu = make_measure(Points{{0.0}, {1.0}});
  const auto c = CostMatrix(Matrix::Zero(2, 2));
  SolverConfig cfg;
  const auto s = solve(mu, mu, c, cfg);
  CHECK(s.plan.isApproxToConstant(0.25, 1e-14));
  CHECK(s.potentials.f.norm() < 1e-14);
  CHECK(s.potentials.g.norm() < 1e-14);
  CHECK(std::abs(s.primal_value) < 1e-14);
  CHECK(independent_coupling_gap(s, mu, mu) < 1e-14);
}

TEST_CASE("symmetric 2x2 closed form") {
  TwoByTwo t;
  CHECK(kDiag == doctest::Approx(0.365529).epsilon(1e-6));
  for (bool log_domain : {true, false}) {
    SolverConfig cfg;
    cfg.log_domain = log_domain;
    const auto s = solve(t.mu, t.nu, t.cost, cfg);
    REQUIRE(s.converged);
    CHECK(s.plan(0, 0) == doctest::Approx(kDiag).epsilon(1e-9));
    CHECK(s.plan(1, 1) == doctest::Approx(kDiag).epsilon(1e-9));
    CHECK(s.plan(0, 1) == doctest::Approx(0.5 - kDiag).epsilon(1e-9));
    CHECK(s.primal_value == doctest::Approx(0.379885).epsilon(1e-5));
    CHECK(s.dual_value == doctest::Approx(s.primal_value).epsilon(1e-12));
  }
}

TEST_CASE("symmetric 2x2 value by grid search over a") {
  TwoByTwo t;
  // Couplings of uniform 2-point marginals are [[a, 0.5-a], [0.5-a, a]].
  double best = INFINITY;
  for (int k = 1; k < 500000; ++k) {
    const double a = 0.5 * k / 500000.0;
    const double b = 0.5 - a;
    const double v = 2 * b + 2 * a * std::log(4 * a) + 2 * b * std::log(4 * b);
    best = std::min(best, v);
  }
  SolverConfig cfg;
  CHECK(solve(t.mu, t.nu, t.cost, cfg).primal_value == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("dual and primal objective examples") {
  TwoByTwo t;
  const Potentials zero{Vector::Zero(2), Vector::Zero(2)};
  CHECK(dual_objective(t.mu, t.nu, CostMatrix(Matrix::Zero(2, 2)), zero, 1.0) == doctest::Approx(0.0));
  CHECK(dual_objective(t.mu, t.nu, t.cost, zero, 1.0) == doctest::Approx(0.316060).epsilon(1e-6));
  CHECK(dual_objective(t.mu, t.nu, t.cost, zero, 1.0) ==
        doctest::Approx(1.0 - (2.0 + 2.0 * std::exp(-1.0)) / 4.0).epsilon(1e-15));

  const Matrix product = Matrix::Constant(2, 2, 0.25);
  CHECK(primal_objective(product, CostMatrix(Matrix::Zero(2, 2)), t.mu, t.nu, 1.0) == doctest::Approx(0.0));

  const auto x = make_measure(Points{{0.0, 0.0}});
  const auto y = make_measure(Points{{3.0, 4.0}});
  CHECK(primal_objective(Matrix::Ones(1, 1), realize_cost(x, y, CostSpec::euclidean()), x, y, 2.0) == 5.0);

  Matrix plan(2, 2);
  plan << kDiag, 0.5 - kDiag, 0.5 - kDiag, kDiag;
  CHECK(primal_objective(plan, t.cost, t.mu, t.nu, 1.0) == doctest::Approx(0.379885).epsilon(1e-5));
}

TEST_CASE("independent coupling gap") {
  const auto x = make_measure(Points{{0.0}});
  SolverConfig cfg;
  CHECK(independent_coupling_gap(solve(x, x, CostMatrix(Matrix::Zero(1, 1)), cfg), x, x) == 0.0);

  RngStream rng(3);
  const auto mu = testing::random_measure(6, 2, rng);
  const auto nu = testing::random_measure(5, 2, rng);
  const auto c = realize_cost(mu, nu, CostSpec::euclidean());
  cfg.lambda = 1e6 * c.max_cost();
  CHECK(independent_coupling_gap(solve(mu, nu, c, cfg), mu, nu) <= 1e-4);
}

TEST_CASE("solver modes agree") {
  RngStream rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    const auto mu = testing::random_measure(7, 2, rng);
    const auto nu = testing::random_measure(9, 2, rng);
    const auto c = realize_cost(mu, nu, CostSpec::euclidean());
    SolverConfig a;
    a.lambda = 0.1;
    SolverConfig b = a;
    b.newton = false;
    SolverConfig s = a;
    s.log_domain = false;
    const auto ra = solve(mu, nu, c, a);
    const auto rb = solve(mu, nu, c, b);
    const auto rs = solve(mu, nu, c, s);
    REQUIRE(ra.converged);
    REQUIRE(rb.converged);
    REQUIRE(rs.converged);
    CHECK((ra.plan - rb.plan).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((ra.plan - rs.plan).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((ra.potentials.g - rb.potentials.g).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("small lambda stays finite in the log domain") {
  RngStream rng(5);
  const auto mu = testing::random_measure(40, 2, rng);
  const auto nu = testing::random_measure(30, 2, rng);
  const auto c = realize_cost(mu, nu, CostSpec::euclidean());
  SolverConfig cfg;
  cfg.lambda = 1e-4;
  const auto s = solve(mu, nu, c, cfg);
  CHECK(s.converged);
  CHECK(s.plan.allFinite());
  CHECK(std::abs(s.primal_value - s.dual_value) < 1e-6);

  cfg.log_domain = false;
  CHECK_THROWS_AS(solve(mu, nu, c, cfg), NumericalError);
}

TEST_CASE("iteration budget exhaustion is reported, not thrown") {
  RngStream rng(8);
  const auto mu = testing::random_measure(20, 2, rng);
  const auto nu = testing::random_measure(20, 2, rng);
  const auto c = realize_cost(mu, nu, CostSpec::euclidean());
  SolverConfig cfg;
  cfg.lambda = 1e-3;
  cfg.max_iters = 2;
  cfg.newton = false;
  const auto s = solve(mu, nu, c, cfg);
  CHECK_FALSE(s.converged);
  CHECK(s.iterations == 2);
  CHECK(s.final_marginal_error > cfg.marginal_tol);
}

TEST_CASE("warm start reaches the same solution") {
  RngStream rng(9);
  const auto mu = testing::random_measure(15, 2, rng);
  const auto nu = testing::random_measure(12, 2, rng);
  const auto c = realize_cost(mu, nu, CostSpec::euclidean());
  SolverConfig cfg;
  cfg.lambda = 0.01;
  const auto cold = solve(mu, nu, c, cfg);
  const auto warm = solve(mu, nu, c, cfg, cold.potentials);
  CHECK(warm.converged);
  CHECK(warm.iterations <= 2);
  CHECK((warm.plan - cold.plan).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("restrict_potentials matches by id") {
  const auto mu = make_measure(Points{{0.0}, {1.0}, {2.0}});
  const Potentials p{Vector::LinSpaced(3, 1.0, 3.0), Vector::LinSpaced(3, -1.0, 1.0)};
  const std::vector<std::size_t> pos{2, 0};
  const auto sub = mu.restrict_to(pos, Vector::Constant(2, 0.5));
  const auto r = restrict_potentials(p, mu, mu, sub, sub);
  CHECK(r.f(0) == 3.0);
  CHECK(r.f(1) == 1.0);
  CHECK(r.g(0) == 1.0);
  CHECK(r.g(1) == -1.0);
}

TEST_CASE("config validation") {
  const auto x = make_measure(Points{{0.0}});
  const auto c = CostMatrix(Matrix::Zero(1, 1));
  SolverConfig cfg;
  cfg.lambda = 0.0;
  CHECK_THROWS_AS(solve(x, x, c, cfg), ValidationError);
  cfg.lambda = NAN;
  CHECK_THROWS_AS(solve(x, x, c, cfg), ValidationError);
  cfg.lambda = 1.0;
  cfg.max_iters = 0;
  CHECK_THROWS_AS(solve(x, x, c, cfg), ValidationError);
  cfg.max_iters = 10;
  cfg.marginal_tol = 0.0;
  CHECK_THROWS_AS(solve(x, x, c, cfg), ValidationError);
  cfg.marginal_tol = 1e-9;
  CHECK_THROWS_AS(solve(x, x, CostMatrix(Matrix::Zero(2, 1)), cfg), ValidationError);
}
