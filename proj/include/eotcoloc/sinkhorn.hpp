#pragma once

#include <cstddef>

#include "eotcoloc/measure.hpp"
#include "eotcoloc/types.hpp"

namespace eotcoloc {

struct SolverConfig {
  double lambda = 1.0;             // regularization, in cost units
  std::size_t max_iters = 10000;   // Sinkhorn sweeps plus Newton steps
  double marginal_tol = 1e-9;      // L1 column-marginal error at which a solve stops
  bool log_domain = true;
  // Sparse Newton steps on the dual once plain sweeps stall. Log domain only.
  bool newton = true;

  void validate() const;
};

/// Dual potentials, normalized so that sum_j g_j nu_j = 0.
struct Potentials {
  Vector f;
  Vector g;
};

struct EotSolution {
  Potentials potentials;
  Matrix plan;  // plan(i, j) = mu_i nu_j exp((f_i + g_j - c_ij) / lambda)
  double lambda = 0.0;
  double primal_value = 0.0;
  double dual_value = 0.0;
  std::size_t iterations = 0;
  std::size_t newton_steps = 0;
  double final_marginal_error = 0.0;
  bool converged = false;
};

/// Entropic OT between two finitely supported measures.
///
/// Row marginals are matched exactly by every sweep; the stopping rule is on
/// the L1 error of the column marginal. A solve that runs out of iterations
/// returns with `converged == false` rather than throwing, so callers can
/// report the residual.
EotSolution solve(const DiscreteMeasure& src, const DiscreteMeasure& tgt, const CostMatrix& cost,
                  const SolverConfig& cfg);

/// Same, starting from `warm_start` instead of zero potentials.
EotSolution solve(const DiscreteMeasure& src, const DiscreteMeasure& tgt, const CostMatrix& cost,
                  const SolverConfig& cfg, const Potentials& warm_start);

/// sum_ij (f_i + g_j - lambda exp((f_i + g_j - c_ij) / lambda)) mu_i nu_j + lambda
double dual_objective(const DiscreteMeasure& src, const DiscreteMeasure& tgt, const CostMatrix& cost,
                      const Potentials& potentials, double lambda);

/// sum_ij c_ij pi_ij + lambda KL(pi | mu x nu), with 0 log 0 = 0.
double primal_objective(const Matrix& plan, const CostMatrix& cost, const DiscreteMeasure& src,
                        const DiscreteMeasure& tgt, double lambda);

/// max_ij |pi_ij - mu_i nu_j|; goes to zero as lambda grows.
double independent_coupling_gap(const EotSolution& solution, const DiscreteMeasure& src,
                                const DiscreteMeasure& tgt);

/// Potentials solved on (from_src, from_tgt), re-indexed onto measures whose
/// atoms are a subset of those supports (matched by atom id). Atoms without a
/// match start at zero.
Potentials restrict_potentials(const Potentials& potentials, const DiscreteMeasure& from_src,
                               const DiscreteMeasure& from_tgt, const DiscreteMeasure& to_src,
                               const DiscreteMeasure& to_tgt);

}  // namespace eotcoloc
