#include "eotcoloc/bootstrap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include "eotcoloc/error.hpp"

namespace eotcoloc {

void BootstrapConfig::validate() const {
  if (replicates < 1) throw ValidationError("replicates must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  if (static_cast<double>(replicates) * (1.0 - alpha) < 1.0) {
    throw ValidationError("replicates * (1 - alpha) is below 1; no order statistic to take");
  }
}

DiscreteMeasure resample(const DiscreteMeasure& measure, std::size_t size, RngStream& rng) {
  if (size < 1) throw ValidationError("resample size must be at least 1");
  const Vector& w = measure.weights();
  const auto counts = multinomial_counts(std::span<const double>(w.data(), static_cast<std::size_t>(w.size())), size, rng);
  std::vector<std::size_t> positions;
  std::vector<double> weights;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == 0) continue;
    positions.push_back(k);
    weights.push_back(static_cast<double>(counts[k]) / static_cast<double>(size));
  }
  return measure.restrict_to(positions, Eigen::Map<const Vector>(weights.data(), static_cast<Eigen::Index>(weights.size())));
}

double upper_quantile(std::span<const double> values, double alpha) {
  if (values.empty()) throw ValidationError("no values to take a quantile of");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  const double target = static_cast<double>(values.size()) * (1.0 - alpha);
  if (target < 1.0) throw ValidationError("replicates * (1 - alpha) is below 1; no order statistic to take");
  // Guard against B (1 - alpha) landing a hair above an integer.
  const auto rank = static_cast<std::size_t>(std::ceil(target - 1e-9));
  std::vector<double> sorted(values.begin(), values.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end());
  return sorted[rank - 1];
}

BandResult assemble_band(ColocCurve center, std::vector<double> replicate_sups, double alpha, double rate) {
  if (!(rate > 0.0)) throw ValidationError("band rate must be positive");
  BandResult band;
  band.alpha = alpha;
  band.replicates = replicate_sups.size();
  band.q_star = upper_quantile(replicate_sups, alpha);
  band.rate = rate;
  band.half_width = band.q_star / rate;
  band.lower.resize(center.values.size());
  band.upper.resize(center.values.size());
  for (std::size_t k = 0; k < center.values.size(); ++k) {
    band.lower[k] = std::clamp(center.values[k] - band.half_width, 0.0, 1.0);
    band.upper[k] = std::clamp(center.values[k] + band.half_width, 0.0, 1.0);
  }
  band.center = std::move(center);
  band.replicate_sups = std::move(replicate_sups);
  return band;
}

namespace {

// Runs task(b) for b in [0, count) on up to `workers` threads. Every task runs;
// the exception of the lowest failing index is rethrown.
template <class Task>
void run_indexed(std::size_t count, std::size_t workers, Task&& task) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t b = next++; b < count; b = next++) {
      try {
        task(b);
      } catch (...) {
        errors[b] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(std::max<std::size_t>(workers, 1), count);
  if (threads <= 1) {
    drain();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(drain);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

EotSolution solve_or_throw(const DiscreteMeasure& src, const DiscreteMeasure& tgt, const CostMatrix& cost,
                           const SolverConfig& cfg, const Potentials* warm, long replicate) {
  EotSolution sol = warm ? solve(src, tgt, cost, cfg, *warm) : solve(src, tgt, cost, cfg);
  if (!sol.converged) {
    const std::string where = replicate < 0 ? "center problem" : "bootstrap replicate " + std::to_string(replicate);
    throw ConvergenceError(where + " did not converge in " + std::to_string(cfg.max_iters) +
                               " iterations (marginal error " + std::to_string(sol.final_marginal_error) + ")",
                           sol.final_marginal_error, replicate);
  }
  return sol;
}

BandResult band_impl(const DiscreteMeasure& src, const DiscreteMeasure& tgt, const CostSpec& cost_spec,
                     const SolverConfig& solver_cfg, const ThresholdGrid* grid, std::size_t resolution,
                     const BootstrapConfig& boot_cfg) {
  solver_cfg.validate();
  boot_cfg.validate();
  cost_spec.validate();

  const CostMatrix cost = realize_cost(src, tgt, cost_spec);
  const EotSolution center_sol = solve_or_throw(src, tgt, cost, solver_cfg, nullptr, -1);
  const ThresholdGrid shared = grid ? *grid : default_grid(cost, resolution);
  ColocCurve center = coloc_curve(center_sol, cost, shared);

  const std::size_t m_star = boot_cfg.resample_m ? boot_cfg.resample_m : src.size();
  const std::size_t n_star = boot_cfg.resample_n ? boot_cfg.resample_n : tgt.size();
  const double ms = static_cast<double>(m_star);
  const double ns = static_cast<double>(n_star);
  const double rate = std::sqrt(ms * ns / (ms + ns));

  std::vector<double> sups(boot_cfg.replicates, 0.0);
  run_indexed(boot_cfg.replicates, boot_cfg.workers, [&](std::size_t b) {
    RngStream rng = RngStream::derived(boot_cfg.seed, b);
    const DiscreteMeasure src_b = resample(src, m_star, rng);
    const DiscreteMeasure tgt_b = resample(tgt, n_star, rng);
    const CostMatrix cost_b = realize_cost(src_b, tgt_b, cost_spec);
    std::optional<Potentials> warm;
    if (boot_cfg.warm_start) warm = restrict_potentials(center_sol.potentials, src, tgt, src_b, tgt_b);
    const EotSolution sol_b =
        solve_or_throw(src_b, tgt_b, cost_b, solver_cfg, warm ? &*warm : nullptr, static_cast<long>(b));
    sups[b] = rate * sup_distance(coloc_curve(sol_b, cost_b, shared), center);
  });
  return assemble_band(std::move(center), std::move(sups), boot_cfg.alpha, rate);
}

}  // namespace

BandResult bootstrap_band(const DiscreteMeasure& src, const DiscreteMeasure& tgt, const CostSpec& cost_spec,
                          const SolverConfig& solver_cfg, const ThresholdGrid& grid, const BootstrapConfig& boot_cfg) {
  return band_impl(src, tgt, cost_spec, solver_cfg, &grid, 0, boot_cfg);
}

BandResult bootstrap_band(const DiscreteMeasure& src, const DiscreteMeasure& tgt, const CostSpec& cost_spec,
                          const SolverConfig& solver_cfg, std::size_t resolution, const BootstrapConfig& boot_cfg) {
  return band_impl(src, tgt, cost_spec, solver_cfg, nullptr, resolution, boot_cfg);
}

std::vector<std::pair<double, double>> qq_data(std::span<const double> boot, std::span<const double> mc) {
  if (boot.empty() || mc.empty()) throw ValidationError("Q-Q data needs two non-empty samples");
  std::vector<double> a(boot.begin(), boot.end());
  std::vector<double> b(mc.begin(), mc.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  // Type-1 empirical quantile: the ceil(p N)-th order statistic.
  auto quantile = [](const std::vector<double>& s, double p) {
    const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(s.size()) - 1e-9));
    return s[std::clamp<std::size_t>(rank, 1, s.size()) - 1];
  };
  const std::size_t k_max = std::min(a.size(), b.size());
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(k_max);
  for (std::size_t k = 1; k <= k_max; ++k) {
    const double p = (static_cast<double>(k) - 0.5) / static_cast<double>(k_max);
    pairs.emplace_back(quantile(a, p), quantile(b, p));
  }
  return pairs;
}

CoverageResult coverage_experiment(const ColocCurve& truth, const DiscreteMeasure& src, const DiscreteMeasure& tgt,
                                   const CostSpec& cost_spec, const SolverConfig& solver_cfg,
                                   const BootstrapConfig& boot_cfg, std::size_t repetitions,
                                   std::uint64_t master_seed) {
  if (repetitions < 1) throw ValidationError("repetitions must be at least 1");
  if (truth.values.size() != truth.grid.size()) throw ValidationError("truth curve does not match its grid");
  boot_cfg.validate();
  const std::size_t m_star = boot_cfg.resample_m ? boot_cfg.resample_m : src.size();
  const std::size_t n_star = boot_cfg.resample_n ? boot_cfg.resample_n : tgt.size();

  CoverageResult result;
  result.repetitions = repetitions;
  for (std::size_t r = 0; r < repetitions; ++r) {
    RngStream rng = RngStream::derived(master_seed, 2 * r);
    const DiscreteMeasure src_r = resample(src, m_star, rng);
    const DiscreteMeasure tgt_r = resample(tgt, n_star, rng);
    BootstrapConfig cfg = boot_cfg;
    cfg.resample_m = m_star;
    cfg.resample_n = n_star;
    cfg.seed = derive_seed(master_seed, 2 * r + 1);
    const BandResult band = bootstrap_band(src_r, tgt_r, cost_spec, solver_cfg, truth.grid, cfg);
    bool inside = true;
    for (std::size_t k = 0; k < truth.values.size() && inside; ++k) {
      inside = truth.values[k] >= band.lower[k] - 1e-9 && truth.values[k] <= band.upper[k] + 1e-9;
    }
    if (inside) ++result.covered;
  }
  result.coverage = static_cast<double>(result.covered) / static_cast<double>(repetitions);
  return result;
}

}  // namespace eotcoloc
