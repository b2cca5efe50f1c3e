// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance                  run every criterion
//   acceptance --criterion 3    run one (repeatable)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "cli.hpp"
#include "eotcoloc/bootstrap.hpp"
#include "eotcoloc/coloc.hpp"
#include "eotcoloc/image_io.hpp"
#include "eotcoloc/io.hpp"
#include "eotcoloc/samplers.hpp"
#include "eotcoloc/sinkhorn.hpp"
#include "oracles.hpp"

using namespace eotcoloc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::size_t all_cores() { return std::max(1u, std::thread::hardware_concurrency()); }

// Criteria 1 and 2 share one suite: 200 instances, m, n <= 50, costs uniform
// on [0, 1], lambda cycling through {0.01, 0.1, 1}.
struct SuiteStats {
  std::size_t instances = 0;
  std::size_t unconverged = 0;
  double worst_gap = 0.0;
  double worst_marginal = 0.0;
  double worst_potential_excess = -INFINITY;
  double seconds = 0.0;
};

const SuiteStats& random_suite() {
  static const SuiteStats stats = [] {
    SuiteStats s;
    const auto t0 = std::chrono::steady_clock::now();
    RngStream rng(20240601);
    const double lambdas[] = {0.01, 0.1, 1.0};
    for (std::size_t k = 0; k < 200; ++k) {
      const auto m = 1 + static_cast<std::size_t>(rng.uniform() * 50);
      const auto n = 1 + static_cast<std::size_t>(rng.uniform() * 50);
      const auto mu = testing::random_measure(m, 1, rng);
      const auto nu = testing::random_measure(n, 1, rng);
      const CostMatrix cost(testing::random_matrix(m, n, rng));
      SolverConfig cfg;
      cfg.lambda = lambdas[k % 3];
      const auto sol = solve(mu, nu, cost, cfg);
      ++s.instances;
      if (!sol.converged) ++s.unconverged;
      const double row_err = (sol.plan.rowwise().sum() - mu.weights()).lpNorm<1>();
      const double col_err = (sol.plan.colwise().sum().transpose() - nu.weights()).lpNorm<1>();
      s.worst_marginal = std::max({s.worst_marginal, row_err, col_err});
      s.worst_gap = std::max(s.worst_gap, std::abs(sol.primal_value - sol.dual_value));
      const double pot = std::max(sol.potentials.f.cwiseAbs().maxCoeff(), sol.potentials.g.cwiseAbs().maxCoeff());
      s.worst_potential_excess = std::max(s.worst_potential_excess, pot - cost.max_cost());
    }
    s.seconds = seconds_since(t0);
    return s;
  }();
  return stats;
}

Outcome criterion_1() {
  const auto& s = random_suite();
  const bool pass = s.unconverged == 0 && s.worst_gap <= 1e-6 && s.worst_marginal <= 1e-9 && s.seconds < 60.0;
  return {pass, fmt("strong duality on %zu instances: max |P-D| = %.2e, max marginal L1 = %.2e, unconverged = %zu, %.1f s",
                    s.instances, s.worst_gap, s.worst_marginal, s.unconverged, s.seconds)};
}

Outcome criterion_2() {
  const auto& s = random_suite();
  const bool pass = s.unconverged == 0 && s.worst_potential_excess <= 1e-6;
  return {pass, fmt("potential bounds on %zu instances: max(|f|,|g|) - |c|_inf <= %.3e", s.instances,
                    s.worst_potential_excess)};
}

Outcome criterion_3() {
  using Points = std::vector<std::vector<double>>;
  const auto mu = make_measure(Points{{0.0}, {1.0}});
  const auto cost = realize_cost(mu, mu, CostSpec::euclidean());
  SolverConfig cfg;
  cfg.lambda = 1.0;
  const auto sol = solve(mu, mu, cost, cfg);
  const double diag = std::max(std::abs(sol.plan(0, 0) - 0.365529), std::abs(sol.plan(1, 1) - 0.365529));
  const double value = std::abs(sol.primal_value - 0.379885);
  return {sol.converged && diag <= 1e-5 && value <= 1e-5,
          fmt("2x2 closed form: diagonal %.6f (|err| %.1e), EOT value %.6f (|err| %.1e)", sol.plan(0, 0), diag,
              sol.primal_value, value)};
}

Outcome criterion_4() {
  const auto t0 = std::chrono::steady_clock::now();
  RngStream rng(4004);
  double worst_rel = 0.0;
  double worst_sup = 0.0;
  std::size_t unconverged = 0;
  for (int k = 0; k < 20; ++k) {
    const auto mu = testing::random_measure(5, 2, rng, true);
    const auto nu = testing::random_measure(5, 2, rng, true);
    const auto cost = realize_cost(mu, nu, CostSpec::euclidean());
    const auto exact = testing::brute_force_assignment(cost.entries());
    SolverConfig cfg;
    cfg.lambda = 1e-3 * cost.max_cost();
    const auto sol = solve(mu, nu, cost, cfg);
    if (!sol.converged) ++unconverged;
    worst_rel = std::max(worst_rel, std::abs(sol.primal_value - exact.cost) / exact.cost);
    const auto grid = default_grid(cost);
    const auto eot_curve = coloc_curve(sol, cost, grid);
    const auto ot_curve = coloc_curve(testing::permutation_plan(exact.perm), cost, grid);
    worst_sup = std::max(worst_sup, sup_distance(eot_curve, ot_curve));
  }
  const double secs = seconds_since(t0);
  return {unconverged == 0 && worst_rel <= 0.02 && worst_sup <= 0.05 && secs < 60.0,
          fmt("small lambda vs assignment on 20 instances: max rel. cost error %.2e, max curve sup %.2e, %.2f s",
              worst_rel, worst_sup, secs)};
}

Outcome criterion_5() {
  RngStream rng(5005);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto m = 1 + static_cast<std::size_t>(rng.uniform() * 30);
    const auto n = 1 + static_cast<std::size_t>(rng.uniform() * 30);
    const auto mu = testing::random_measure(m, 2, rng);
    const auto nu = testing::random_measure(n, 2, rng);
    const auto cost = realize_cost(mu, nu, CostSpec::euclidean());
    SolverConfig cfg;
    cfg.lambda = 1e6 * std::max(cost.max_cost(), 1e-300);
    worst = std::max(worst, independent_coupling_gap(solve(mu, nu, cost, cfg), mu, nu));
  }
  return {worst <= 1e-4, fmt("large lambda on 20 instances: max |pi - mu x nu| = %.2e", worst)};
}

Outcome criterion_6() {
  const auto t0 = std::chrono::steady_clock::now();
  constexpr std::size_t kN = 1000;
  SolverConfig cfg;
  cfg.lambda = 0.001;
  BootstrapConfig boot;
  boot.replicates = 1000;
  boot.alpha = 0.05;
  boot.workers = all_cores();
  std::vector<double> widths;
  std::string list;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RngStream src_rng = RngStream::derived(seed, 0);
    RngStream tgt_rng = RngStream::derived(seed, 1);
    const auto src = sample_gaussian_mixture(scenario_i_source(), kN, src_rng);
    const auto tgt = sample_gaussian_mixture(scenario_i_target(), kN, tgt_rng);
    boot.seed = seed;
    const auto band = bootstrap_band(src, tgt, CostSpec::euclidean(), cfg, 200, boot);
    widths.push_back(band.q_star * std::sqrt(2.0 / kN));
    list += fmt("%s%.4f", list.empty() ? "" : ", ", widths.back());
    std::fprintf(stderr, "  criterion 6: seed %d half-width %.4f (%.0f s elapsed)\n", static_cast<int>(seed),
                 widths.back(), seconds_since(t0));
  }
  std::vector<double> sorted = widths;
  std::nth_element(sorted.begin(), sorted.begin() + 2, sorted.end());
  const double median = sorted[2];
  const double rel = median / 0.0402 - 1.0;
  return {std::abs(rel) <= 0.35,
          fmt("Scenario I half-widths [%s], median %.4f (%+.0f%% vs 0.0402), %.0f s on %zu thread(s)", list.c_str(),
              median, 100 * rel, seconds_since(t0), boot.workers)};
}

// Truncated Gaussian blobs (sigma 3 px, cut at 3 sigma) on a 64 x 64 grid.
GridMeasure two_blob_grid(const std::vector<Eigen::Vector2d>& centers, const std::vector<double>& amplitudes) {
  constexpr double kSigma = 3.0;
  Matrix img = Matrix::Zero(64, 64);
  for (Eigen::Index i = 0; i < 64; ++i) {
    for (Eigen::Index j = 0; j < 64; ++j) {
      const Eigen::Vector2d p(static_cast<double>(j) + 0.5, static_cast<double>(i) + 0.5);
      for (std::size_t b = 0; b < centers.size(); ++b) {
        const double r2 = (p - centers[b]).squaredNorm();
        if (r2 <= 9 * kSigma * kSigma) img(i, j) += amplitudes[b] * std::exp(-r2 / (2 * kSigma * kSigma));
      }
    }
  }
  return GridMeasure(img, 1.0);
}

Outcome criterion_7() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto red = to_measure(two_blob_grid({{20, 22}, {42, 40}}, {1.0, 0.7}));
  const auto green = to_measure(two_blob_grid({{22, 23}, {41, 43}}, {0.8, 1.0}));
  const CostSpec spec = CostSpec::grid_euclidean(1.0);
  SolverConfig cfg;
  cfg.lambda = 1.0;
  // exp(-c / lambda) stays above 1e-30 here, so kernel-domain iterations are safe and ~8x faster.
  cfg.log_domain = false;
  const auto cost = realize_cost(red, green, spec);
  const auto full = solve(red, green, cost, cfg);
  if (!full.converged) return {false, "full-grid solve did not converge"};
  const auto truth = coloc_curve(full, cost, default_grid(cost));

  BootstrapConfig boot;
  boot.replicates = 100;
  boot.alpha = 0.05;
  boot.resample_m = 2000;
  boot.resample_n = 2000;
  boot.workers = all_cores();
  const auto result = coverage_experiment(truth, red, green, spec, cfg, boot, 100, 7007);
  const double secs = seconds_since(t0);
  return {result.coverage >= 0.88 && result.coverage <= 1.0 && secs <= 600.0,
          fmt("two-blob 64x64 (%zu x %zu atoms), n* = 2000, B = 100, R = 100: coverage %.2f, %.0f s", red.size(),
              green.size(), result.coverage, secs)};
}

Outcome criterion_8() {
  RngStream rng(8008);
  std::size_t bad_curves = 0;
  double worst_kernel = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto m = 1 + static_cast<std::size_t>(rng.uniform() * 30);
    const auto n = 1 + static_cast<std::size_t>(rng.uniform() * 30);
    const auto mu = testing::random_measure(m, 2, rng);
    const auto nu = testing::random_measure(n, 2, rng);
    const auto cost = realize_cost(mu, nu, CostSpec::euclidean());
    SolverConfig cfg;
    cfg.lambda = std::pow(10.0, -3.0 + 3.0 * rng.uniform());
    const auto sol = solve(mu, nu, cost, cfg);
    const auto grid = default_grid(cost, 50);
    const auto curve = coloc_curve(sol, cost, grid);
    bool ok = std::abs(curve.values.back() - 1.0) <= 1e-9;
    for (std::size_t t = 0; t < curve.values.size(); ++t) {
      ok = ok && curve.values[t] >= 0.0 && curve.values[t] <= 1.0 + 1e-9;
      if (t > 0) ok = ok && curve.values[t] >= curve.values[t - 1];
      const Matrix indicator = (cost.entries().array() <= grid[t]).cast<double>();
      worst_kernel = std::max(worst_kernel, std::abs(eval_kernel_functional(sol, indicator) - curve.values[t]));
    }
    if (!ok) ++bad_curves;
  }
  return {bad_curves == 0 && worst_kernel <= 1e-12,
          fmt("curve invariants on 100 instances: %zu violations, max |kernel - curve| = %.1e", bad_curves,
              worst_kernel)};
}

Outcome criterion_9() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("eotcoloc_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string a = (dir / "a.csv").string();
  const std::string b = (dir / "b.csv").string();
  std::ostringstream sink;
  if (cli::run({"simulate", "--scenario", "i", "--n", "150", "--seed", "9", "--out-src", a, "--out-tgt", b}, sink,
               sink) != 0) {
    fs::remove_all(dir);
    return {false, "simulate failed: " + sink.str()};
  }
  std::vector<std::string> outputs;
  for (const char* threads : {"1", "1", "8", "8"}) {
    std::ostringstream out, err;
    const int code = cli::run({"band", a, b, "--lambda", "0.01", "-B", "64", "--seed", "123", "--threads", threads},
                              out, err);
    if (code != 0) {
      fs::remove_all(dir);
      return {false, "band failed: " + err.str()};
    }
    outputs.push_back(out.str());
  }
  fs::remove_all(dir);
  const bool same_1 = outputs[0] == outputs[1];
  const bool same_8 = outputs[2] == outputs[3];
  const bool across = outputs[0] == outputs[2];
  return {same_1 && same_8 && across,
          fmt("band JSON byte-identical: 1 worker %s, 8 workers %s, 1 vs 8 %s (%zu bytes)", same_1 ? "yes" : "no",
              same_8 ? "yes" : "no", across ? "yes" : "no", outputs[0].size())};
}

Outcome criterion_10() {
  const Eigen::Vector3d a = Eigen::Vector3d(std::sqrt(3.0), std::sqrt(2.0), 2.0) / 3.0;
  bool pass = true;
  std::string detail;
  for (double kappa : {50.0, 80.0}) {
    RngStream rng(static_cast<std::uint64_t>(kappa));
    std::vector<double> w(100000);
    double sum = 0.0;
    for (double& x : w) {
      x = a.dot(sample_vmf(a, kappa, rng));
      sum += x;
    }
    const double d = testing::ks_statistic(
        w, [kappa](double x) { return std::expm1(kappa * (x + 1.0)) / std::expm1(2.0 * kappa); });
    const double p = testing::ks_p_value(d, w.size());
    const double mean_err = std::abs(sum / 1e5 - (1.0 / std::tanh(kappa) - 1.0 / kappa));
    pass = pass && p > 1e-3 && mean_err <= 0.005;
    detail += fmt("%skappa %.0f: KS D = %.4f (p = %.3f), mean resultant |err| = %.1e", detail.empty() ? "" : "; ",
                  kappa, d, p, mean_err);
  }
  return {pass, detail};
}

const std::vector<std::function<Outcome()>> kCriteria = {criterion_1, criterion_2, criterion_3, criterion_4,
                                                          criterion_5, criterion_6, criterion_7, criterion_8,
                                                          criterion_9, criterion_10};

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::size_t> selected;
  for (int k = 1; k < argc; ++k) {
    const std::string arg = argv[k];
    if (arg == "--criterion" && k + 1 < argc) {
      const long c = std::strtol(argv[++k], nullptr, 10);
      if (c < 1 || c > static_cast<long>(kCriteria.size())) {
        std::fprintf(stderr, "unknown criterion %s\n", argv[k]);
        return 2;
      }
      selected.push_back(static_cast<std::size_t>(c));
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]...\n", argv[0]);
      return 2;
    }
  }
  if (selected.empty()) {
    for (std::size_t c = 1; c <= kCriteria.size(); ++c) selected.push_back(c);
  }

  int failures = 0;
  for (std::size_t c : selected) {
    Outcome outcome;
    try {
      outcome = kCriteria[c - 1]();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %zu: %s - %s\n", c, outcome.pass ? "PASS" : "FAIL", outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
