#include "eotcoloc/sinkhorn.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "eotcoloc/error.hpp"

namespace eotcoloc {
namespace {

// Hessian entries below this fraction of mu_i or of nu_j are dropped.
constexpr double kNewtonKeep = 1e-8;
constexpr double kNewtonRidge = 1e-12;
constexpr double kArmijo = 1e-4;
constexpr int kMaxDampingRetries = 12;
constexpr double kDampingIncrease = 8.0;
constexpr double kDampingDecrease = 0.25;
constexpr double kMinDamping = 1e-10;
constexpr double kMaxDamping = 1e8;
// Plain sweeps whose error shrinks by less than this factor count as stalled.
constexpr double kStallRatio = 0.5;
constexpr std::size_t kNewtonCooldown = 10;
// Newton steps in a row that may cut the error by less than kNewtonProgress
// before sweeps take over (near the optimum the ascent test passes on rounding).
constexpr std::size_t kNewtonPatience = 3;
constexpr double kNewtonProgress = 0.9;
// A Newton step costs tens of sweeps, so stalled sweeps only hand over when
// their current contraction rate projects more sweeps than this to tolerance.
constexpr double kNewtonMinSweeps = 500.0;
constexpr double kNewtonMaxFill = 0.3;
constexpr std::size_t kNewtonDenseOk = 800;
// Active-set width in units of lambda, the largest active fraction worth
// handling sparsely, and how often dense runs look for a sparse set again.
constexpr double kActiveMargin = 80.0;
constexpr double kActiveMaxFill = 0.25;
constexpr std::size_t kActiveRetry = 25;

// Exponents are clamped here before exp: exp(-600) is already negligible next
// to the largest term, and far smaller arguments hit slow subnormal paths.
constexpr double kExpFloor = -600.0;

void check_dimensions(const DiscreteMeasure& src, const DiscreteMeasure& tgt, const CostMatrix& cost) {
  if (cost.rows() != src.size() || cost.cols() != tgt.size()) {
    throw ValidationError("cost matrix is " + std::to_string(cost.rows()) + "x" + std::to_string(cost.cols()) +
                          " but the supports have " + std::to_string(src.size()) + " and " +
                          std::to_string(tgt.size()) + " atoms");
  }
}

Matrix assemble_plan(const Matrix& c, const Vector& log_mu, const Vector& log_nu, const Vector& f, const Vector& g,
                     double lambda) {
  Matrix plan(c.rows(), c.cols());
  const double inv = 1.0 / lambda;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    const Eigen::ArrayXd e =
        (log_mu[i] + f[i] * inv) + (g.array() - c.row(i).transpose().array()) * inv + log_nu.array();
    plan.row(i) = (e.max(kExpFloor).exp() * (e >= kExpFloor).cast<double>()).transpose();
  }
  return plan;
}

double primal_unchecked(const Matrix& plan, const Matrix& c, const Vector& mu, const Vector& nu, double lambda) {
  double transport = 0.0;
  double kl = 0.0;
  for (Eigen::Index i = 0; i < plan.rows(); ++i) {
    double row_t = 0.0;
    double row_kl = 0.0;
    const double log_mu = std::log(mu[i]);
    for (Eigen::Index j = 0; j < plan.cols(); ++j) {
      const double p = plan(i, j);
      if (p <= 0.0) continue;
      if (mu[i] <= 0.0 || nu[j] <= 0.0) {
        throw ValidationError("plan puts mass where mu x nu has none; KL is infinite");
      }
      row_t += c(i, j) * p;
      row_kl += p * (std::log(p) - log_mu - std::log(nu[j]));
    }
    transport += row_t;
    kl += row_kl;
  }
  return transport + lambda * kl;
}

double dual_unchecked(const Matrix& c, const Vector& mu, const Vector& nu, const Vector& f, const Vector& g,
                      double lambda) {
  const double inv = 1.0 / lambda;
  const Eigen::ArrayXd log_nu = nu.array().log();
  double mass = 0.0;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    const double row = ((std::log(mu[i]) + f[i] * inv) + (g.array() - c.row(i).transpose().array()) * inv + log_nu)
                           .max(kExpFloor)
                           .exp()
                           .sum();
    mass += row;
  }
  return f.dot(mu) + g.dot(nu) - lambda * mass + lambda;
}

// Log-domain Sinkhorn with optional sparse Newton steps on the dual.
//
// When lambda is small against the cost spread, almost every entry of the plan
// underflows. The solver then works on an active set of entries with
// f_i + g_j - c_ij >= -kActiveMargin * lambda, rebuilt whenever the potentials
// have moved far enough that a dropped entry could exceed
// exp(-kActiveMargin / 2) of its product mass. Convergence is always confirmed
// by a dense pass.
class LogDomainSolver {
 public:
  LogDomainSolver(const DiscreteMeasure& src, const DiscreteMeasure& tgt, const CostMatrix& cost,
                  const SolverConfig& cfg)
      : c_(cost.entries()),
        ct_(cost.entries().transpose()),
        mu_(src.weights()),
        nu_(tgt.weights()),
        log_mu_(src.weights().array().log()),
        log_nu_(tgt.weights().array().log()),
        cfg_(cfg),
        m_(c_.rows()),
        n_(c_.cols()),
        buf_(std::max(m_, n_)) {}

  // out_i = -lambda log sum_k w_k exp((other_k - k_ik) / lambda)
  void lse_pass(const Matrix& k, const Vector& other, const Vector& log_w, Vector& out) {
    const double inv = 1.0 / cfg_.lambda;
    const Eigen::Index len = other.size();
    auto t = buf_.head(len);
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
      t = (other.array() - k.row(i).transpose().array()) * inv + log_w.array();
      const double mx = t.maxCoeff();
      const double s = (t - mx).max(kExpFloor).exp().sum();
      out[i] = -cfg_.lambda * (mx + std::log(s));
    }
  }

  // Same over a compressed active set.
  void sparse_lse_pass(const std::vector<Eigen::Index>& ptr, const std::vector<int>& idx,
                       const std::vector<double>& cost, const Vector& other, const Vector& log_w, Vector& out) {
    const double inv = 1.0 / cfg_.lambda;
    const auto rows = static_cast<Eigen::Index>(ptr.size()) - 1;
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto lo = ptr[static_cast<std::size_t>(r)];
      const auto hi = ptr[static_cast<std::size_t>(r) + 1];
      double mx = -std::numeric_limits<double>::infinity();
      for (auto k = lo; k < hi; ++k) {
        const auto j = idx[static_cast<std::size_t>(k)];
        const double t = (other[j] - cost[static_cast<std::size_t>(k)]) * inv + log_w[j];
        buf_[k - lo] = t;
        mx = std::max(mx, t);
      }
      double s = 0.0;
      for (auto k = lo; k < hi; ++k) s += std::exp(buf_[k - lo] - mx);
      out[r] = -cfg_.lambda * (mx + std::log(s));
    }
  }

  void update_f(const Vector& g, Vector& f) {
    if (sparse_) {
      sparse_lse_pass(row_ptr_, row_col_, row_cost_, g, log_nu_, f);
    } else {
      lse_pass(c_, g, log_nu_, f);
    }
  }
  void update_g(const Vector& f, Vector& g) {
    if (sparse_) {
      sparse_lse_pass(col_ptr_, col_row_, col_cost_, f, log_mu_, g);
    } else {
      lse_pass(ct_, f, log_mu_, g);
    }
  }

  // L1 error of the column marginal of the plan built from (f, g), given
  // g_hat = update_g(f): column j carries nu_j exp((g_j - g_hat_j) / lambda).
  double column_error(const Vector& g, const Vector& g_hat) const {
    double err = 0.0;
    for (Eigen::Index j = 0; j < n_; ++j) {
      err += nu_[j] * std::abs(std::expm1((g[j] - g_hat[j]) / cfg_.lambda));
    }
    return std::isnan(err) ? std::numeric_limits<double>::infinity() : err;
  }

  // Semi-dual value sum_i mu_i f_i + sum_j nu_j g_j with f = update_f(g).
  double semi_dual(const Vector& g, Vector& f) {
    update_f(g, f);
    return f.dot(mu_) + g.dot(nu_);
  }

  // Upper bound on how much any f_i + g_j has grown since the active set was built.
  double drift(const Vector& f, const Vector& g) const {
    return (f - f_ref_).maxCoeff() + (g - g_ref_).maxCoeff();
  }

  // Rebuilds the active set around (f, g). Every row and column keeps at least
  // its largest entry. Falls back to dense passes when the set is too full.
  void build_active(const Vector& f, const Vector& g) {
    const double floor = -kActiveMargin * cfg_.lambda;
    const auto budget = static_cast<std::size_t>(kActiveMaxFill * static_cast<double>(m_) * static_cast<double>(n_));
    sparse_ = false;

    std::vector<double> col_best(static_cast<std::size_t>(n_), -std::numeric_limits<double>::infinity());
    std::vector<Eigen::Index> col_arg(static_cast<std::size_t>(n_), 0);
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < m_; ++i) {
      for (Eigen::Index j = 0; j < n_; ++j) {
        const double s = f[i] + g[j] - c_(i, j);
        if (s >= floor) ++count;
        if (s > col_best[static_cast<std::size_t>(j)]) {
          col_best[static_cast<std::size_t>(j)] = s;
          col_arg[static_cast<std::size_t>(j)] = i;
        }
      }
      if (count > budget) return;
    }

    row_ptr_.assign(static_cast<std::size_t>(m_) + 1, 0);
    row_col_.clear();
    row_cost_.clear();
    std::vector<Eigen::Index> col_count(static_cast<std::size_t>(n_), 0);
    for (Eigen::Index i = 0; i < m_; ++i) {
      double best = -std::numeric_limits<double>::infinity();
      Eigen::Index best_j = 0;
      const std::size_t first = row_col_.size();
      for (Eigen::Index j = 0; j < n_; ++j) {
        const double s = f[i] + g[j] - c_(i, j);
        if (s > best) {
          best = s;
          best_j = j;
        }
        if (s >= floor || col_arg[static_cast<std::size_t>(j)] == i) {
          row_col_.push_back(static_cast<int>(j));
          row_cost_.push_back(c_(i, j));
        }
      }
      if (best < floor && col_arg[static_cast<std::size_t>(best_j)] != i) {
        const auto pos = std::lower_bound(row_col_.begin() + static_cast<std::ptrdiff_t>(first), row_col_.end(),
                                          static_cast<int>(best_j));
        row_cost_.insert(row_cost_.begin() + (pos - row_col_.begin()), c_(i, best_j));
        row_col_.insert(pos, static_cast<int>(best_j));
      }
      for (std::size_t k = first; k < row_col_.size(); ++k) ++col_count[static_cast<std::size_t>(row_col_[k])];
      row_ptr_[static_cast<std::size_t>(i) + 1] = static_cast<Eigen::Index>(row_col_.size());
    }

    col_ptr_.assign(static_cast<std::size_t>(n_) + 1, 0);
    for (Eigen::Index j = 0; j < n_; ++j) {
      col_ptr_[static_cast<std::size_t>(j) + 1] = col_ptr_[static_cast<std::size_t>(j)] + col_count[static_cast<std::size_t>(j)];
    }
    col_row_.resize(row_col_.size());
    col_cost_.resize(row_col_.size());
    std::vector<Eigen::Index> next(col_ptr_.begin(), col_ptr_.end() - 1);
    for (Eigen::Index i = 0; i < m_; ++i) {
      for (auto k = row_ptr_[static_cast<std::size_t>(i)]; k < row_ptr_[static_cast<std::size_t>(i) + 1]; ++k) {
        const auto j = static_cast<std::size_t>(row_col_[static_cast<std::size_t>(k)]);
        const auto slot = static_cast<std::size_t>(next[j]++);
        col_row_[slot] = static_cast<int>(i);
        col_cost_[slot] = row_cost_[static_cast<std::size_t>(k)];
      }
    }
    f_ref_ = f;
    g_ref_ = g;
    sparse_ = true;
  }

  // Plan entries visited row by row: fn(i, j, pi_ij).
  template <class Fn>
  void for_each_entry(const Vector& f, const Vector& g, Fn&& fn) {
    const double inv = 1.0 / cfg_.lambda;
    if (sparse_) {
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double base = log_mu_[i] + f[i] * inv;
        for (auto k = row_ptr_[static_cast<std::size_t>(i)]; k < row_ptr_[static_cast<std::size_t>(i) + 1]; ++k) {
          const auto j = row_col_[static_cast<std::size_t>(k)];
          if (!fn(i, static_cast<Eigen::Index>(j),
                  std::exp(base + (g[j] - row_cost_[static_cast<std::size_t>(k)]) * inv + log_nu_[j]))) {
            return;
          }
        }
      }
      return;
    }
    auto t = buf_.head(n_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      t = ((log_mu_[i] + f[i] * inv) + (g.array() - c_.row(i).transpose().array()) * inv + log_nu_.array())
              .max(kExpFloor)
              .exp();
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (!fn(i, j, t[j])) return;
      }
    }
  }

  // One damped Newton step on the semi-dual in g (f eliminated exactly by the
  // row update), gauge fixed by holding g_{n-1}. Expects f = update_f(g) and
  // keeps that relation. Returns false when no ascent step was found; (f, g)
  // are then unchanged.
  bool newton_step(Vector& f, Vector& g) {
    const double lambda = cfg_.lambda;
    const Eigen::Index dim = m_ + n_ - 1;
    const auto fill_budget = static_cast<std::size_t>(kNewtonMaxFill * static_cast<double>(m_ * n_));
    const bool fill_ok = sparse_ || static_cast<std::size_t>(m_ + n_) <= kNewtonDenseOk;

    Vector row_mass = Vector::Zero(m_);
    Vector col_mass = Vector::Zero(n_);
    triplets_.clear();
    bool overfull = false;
    for_each_entry(f, g, [&](Eigen::Index i, Eigen::Index j, double t) {
      row_mass[i] += t;
      col_mass[j] += t;
      if (j + 1 < n_ && t > kNewtonKeep * mu_[i] && t > kNewtonKeep * nu_[j]) {
        triplets_.emplace_back(static_cast<int>(m_ + j), static_cast<int>(i), t);
        if (!fill_ok && triplets_.size() > fill_budget) {
          overfull = true;
          return false;
        }
      }
      return true;
    });
    if (overfull || !row_mass.allFinite() || !col_mass.allFinite()) return false;

    const double ridge = kNewtonRidge * row_mass.sum() / static_cast<double>(dim);
    Vector diag(dim);
    diag.head(m_) = row_mass.array() + ridge;
    diag.tail(n_ - 1) = col_mass.head(n_ - 1).array() + ridge;
    for (Eigen::Index k = 0; k < dim; ++k) {
      triplets_.emplace_back(static_cast<int>(k), static_cast<int>(k), diag[k]);
    }
    Eigen::SparseMatrix<double> hess(dim, dim);
    hess.setFromTriplets(triplets_.begin(), triplets_.end());
    hess.makeCompressed();
    std::vector<double*> diag_slots(static_cast<std::size_t>(dim));
    for (Eigen::Index k = 0; k < dim; ++k) diag_slots[static_cast<std::size_t>(k)] = &hess.coeffRef(k, k);

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt;
    ldlt.analyzePattern(hess);

    Vector rhs(dim);
    rhs.head(m_) = lambda * (mu_ - row_mass);
    rhs.tail(n_ - 1) = lambda * (nu_.head(n_ - 1) - col_mass.head(n_ - 1));
    const double value = f.dot(mu_) + g.dot(nu_);
    Vector f_try(m_);
    Vector g_try = g;

    // Levenberg-Marquardt damping H + damping * diag(H): large damping gives a
    // diagonally scaled gradient step, small damping a full Newton step.
    for (int attempt = 0; attempt < kMaxDampingRetries; ++attempt) {
      for (Eigen::Index k = 0; k < dim; ++k) *diag_slots[static_cast<std::size_t>(k)] = diag[k] * (1.0 + damping_);
      ldlt.factorize(hess);
      if (ldlt.info() != Eigen::Success) return false;
      const Vector step = ldlt.solve(rhs);
      if (!step.allFinite()) return false;
      const auto dg = step.tail(n_ - 1);
      const double slope = (nu_.head(n_ - 1) - col_mass.head(n_ - 1)).dot(dg);
      if (!(slope > 0.0)) return false;

      g_try.head(n_ - 1) = g.head(n_ - 1) + dg;
      if (semi_dual(g_try, f_try) >= value + kArmijo * slope) {
        f.swap(f_try);
        g.swap(g_try);
        damping_ = std::max(damping_ * kDampingDecrease, kMinDamping);
        return true;
      }
      damping_ = std::min(damping_ * kDampingIncrease, kMaxDamping);
    }
    return false;
  }

  EotSolution run(Vector f, Vector g) {
    EotSolution sol;
    sol.lambda = cfg_.lambda;
    const double rebuild_drift = 0.5 * kActiveMargin * cfg_.lambda;

    Vector g_hat(n_);
    update_f(g, f);
    build_active(f, g);
    double err = std::numeric_limits<double>::infinity();
    double prev_err = err;
    bool newton_active = false;
    std::size_t cooldown = 0;
    std::size_t slow_steps = 0;
    std::size_t iters = 0;
    std::size_t newton_steps = 0;

    while (true) {
      if (sparse_ ? drift(f, g) > rebuild_drift : iters % kActiveRetry == 0 && iters > 0) build_active(f, g);
      update_g(f, g_hat);
      err = column_error(g, g_hat);
      if (err <= cfg_.marginal_tol && sparse_) {
        sparse_ = false;
        update_g(f, g_hat);
        err = column_error(g, g_hat);
        if (err > cfg_.marginal_tol) {
          build_active(f, g);
          update_g(f, g_hat);
        }
      }
      if (err <= cfg_.marginal_tol) {
        sol.converged = true;
        break;
      }
      if (iters >= cfg_.max_iters) break;
      ++iters;

      const double rate = err / prev_err;
      const double projected = rate < 1.0 ? std::log(cfg_.marginal_tol / err) / std::log(rate) : INFINITY;
      const bool stalled = iters > 2 && rate > kStallRatio && projected > kNewtonMinSweeps;
      if (newton_active) {
        slow_steps = err > kNewtonProgress * prev_err ? slow_steps + 1 : 0;
        if (slow_steps >= kNewtonPatience) {
          newton_active = false;
          cooldown = kNewtonCooldown;
          slow_steps = 0;
        }
      }
      bool stepped = false;
      if (cfg_.newton && cooldown == 0 && (newton_active || stalled)) {
        stepped = newton_step(f, g);
        if (stepped) {
          ++newton_steps;
          newton_active = true;
        } else {
          newton_active = false;
          cooldown = kNewtonCooldown;
        }
      } else if (cooldown > 0) {
        --cooldown;
      }
      if (!stepped) {
        g.swap(g_hat);
        update_f(g, f);
      }
      prev_err = err;
    }
    if (sparse_) {
      sparse_ = false;
      update_g(f, g_hat);
      err = column_error(g, g_hat);
    }

    // Normalize so that sum_j g_j nu_j = 0.
    std::vector<double> gw(static_cast<std::size_t>(n_));
    for (Eigen::Index j = 0; j < n_; ++j) gw[static_cast<std::size_t>(j)] = g[j] * nu_[j];
    const double shift = compensated_sum(gw);
    g.array() -= shift;
    f.array() += shift;

    sol.plan = assemble_plan(c_, log_mu_, log_nu_, f, g, cfg_.lambda);
    sol.iterations = iters;
    sol.newton_steps = newton_steps;
    sol.final_marginal_error = err;
    sol.potentials = Potentials{std::move(f), std::move(g)};
    return sol;
  }

 private:
  const Matrix& c_;
  Matrix ct_;
  const Vector& mu_;
  const Vector& nu_;
  Vector log_mu_;
  Vector log_nu_;
  SolverConfig cfg_;
  Eigen::Index m_;
  Eigen::Index n_;
  Eigen::ArrayXd buf_;
  std::vector<Eigen::Triplet<double>> triplets_;
  double damping_ = 1e-2;

  bool sparse_ = false;
  std::vector<Eigen::Index> row_ptr_;
  std::vector<int> row_col_;
  std::vector<double> row_cost_;
  std::vector<Eigen::Index> col_ptr_;
  std::vector<int> col_row_;
  std::vector<double> col_cost_;
  Vector f_ref_;
  Vector g_ref_;
};

// Classic scaling iterations on the Gibbs kernel exp(-c / lambda).
EotSolution run_scaling(const DiscreteMeasure& src, const DiscreteMeasure& tgt, const CostMatrix& cost,
                        const SolverConfig& cfg, const Vector& f0, const Vector& g0) {
  const Matrix& c = cost.entries();
  const Vector& mu = src.weights();
  const Vector& nu = tgt.weights();
  const Matrix kernel = (-c.array() / cfg.lambda).exp().matrix();
  Vector u = (f0.array() / cfg.lambda).exp().matrix();
  Vector v = (g0.array() / cfg.lambda).exp().matrix();

  auto require_finite = [&](const Vector& x, const char* which) {
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      if (!std::isfinite(x[k]) || x[k] <= 0.0) {
        throw NumericalError(std::string("scaling iterations overflowed in ") + which +
                             "; retry with log_domain enabled");
      }
    }
  };
  require_finite(u, "initial f");
  require_finite(v, "initial g");

  EotSolution sol;
  sol.lambda = cfg.lambda;
  u = (kernel * nu.cwiseProduct(v)).cwiseInverse();
  require_finite(u, "row scaling");
  double err = std::numeric_limits<double>::infinity();
  std::size_t iters = 0;
  while (true) {
    const Vector kt_u = kernel.transpose() * mu.cwiseProduct(u);
    err = (nu.cwiseProduct(v).cwiseProduct(kt_u) - nu).lpNorm<1>();
    if (!std::isfinite(err)) {
      throw NumericalError("scaling iterations overflowed; retry with log_domain enabled");
    }
    if (err <= cfg.marginal_tol) {
      sol.converged = true;
      break;
    }
    if (iters >= cfg.max_iters) break;
    ++iters;
    v = kt_u.cwiseInverse();
    require_finite(v, "column scaling");
    u = (kernel * nu.cwiseProduct(v)).cwiseInverse();
    require_finite(u, "row scaling");
  }

  Vector f = cfg.lambda * u.array().log().matrix();
  Vector g = cfg.lambda * v.array().log().matrix();
  const double shift = g.dot(nu);
  g.array() -= shift;
  f.array() += shift;
  const Vector log_mu = mu.array().log();
  const Vector log_nu = nu.array().log();
  sol.plan = assemble_plan(c, log_mu, log_nu, f, g, cfg.lambda);
  sol.iterations = iters;
  sol.final_marginal_error = err;
  sol.potentials = Potentials{std::move(f), std::move(g)};
  return sol;
}

EotSolution solve_from(const DiscreteMeasure& src, const DiscreteMeasure& tgt, const CostMatrix& cost,
                       const SolverConfig& cfg, Vector f0, Vector g0) {
  EotSolution sol;
  if (cfg.log_domain) {
    LogDomainSolver solver(src, tgt, cost, cfg);
    sol = solver.run(std::move(f0), std::move(g0));
  } else {
    sol = run_scaling(src, tgt, cost, cfg, f0, g0);
  }
  sol.primal_value = primal_unchecked(sol.plan, cost.entries(), src.weights(), tgt.weights(), cfg.lambda);
  sol.dual_value = dual_unchecked(cost.entries(), src.weights(), tgt.weights(), sol.potentials.f,
                                  sol.potentials.g, cfg.lambda);
  return sol;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ValidationError("lambda must be positive and finite (got " + std::to_string(lambda) + ")");
  }
  if (!(marginal_tol > 0.0) || !std::isfinite(marginal_tol)) {
    throw ValidationError("marginal_tol must be positive");
  }
  if (max_iters < 1) {
    throw ValidationError("max_iters must be at least 1");
  }
}

EotSolution solve(const DiscreteMeasure& src, const DiscreteMeasure& tgt, const CostMatrix& cost,
                  const SolverConfig& cfg) {
  cfg.validate();
  check_dimensions(src, tgt, cost);
  return solve_from(src, tgt, cost, cfg, Vector::Zero(static_cast<Eigen::Index>(src.size())),
                    Vector::Zero(static_cast<Eigen::Index>(tgt.size())));
}

EotSolution solve(const DiscreteMeasure& src, const DiscreteMeasure& tgt, const CostMatrix& cost,
                  const SolverConfig& cfg, const Potentials& warm_start) {
  cfg.validate();
  check_dimensions(src, tgt, cost);
  if (warm_start.f.size() != static_cast<Eigen::Index>(src.size()) ||
      warm_start.g.size() != static_cast<Eigen::Index>(tgt.size())) {
    throw ValidationError("warm-start potentials do not match the supports");
  }
  if (!warm_start.f.allFinite() || !warm_start.g.allFinite()) {
    throw ValidationError("warm-start potentials must be finite");
  }
  return solve_from(src, tgt, cost, cfg, warm_start.f, warm_start.g);
}

double dual_objective(const DiscreteMeasure& src, const DiscreteMeasure& tgt, const CostMatrix& cost,
                      const Potentials& potentials, double lambda) {
  check_dimensions(src, tgt, cost);
  if (potentials.f.size() != static_cast<Eigen::Index>(src.size()) ||
      potentials.g.size() != static_cast<Eigen::Index>(tgt.size())) {
    throw ValidationError("potentials do not match the supports");
  }
  if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
  return dual_unchecked(cost.entries(), src.weights(), tgt.weights(), potentials.f, potentials.g, lambda);
}

double primal_objective(const Matrix& plan, const CostMatrix& cost, const DiscreteMeasure& src,
                        const DiscreteMeasure& tgt, double lambda) {
  check_dimensions(src, tgt, cost);
  if (plan.rows() != static_cast<Eigen::Index>(src.size()) || plan.cols() != static_cast<Eigen::Index>(tgt.size())) {
    throw ValidationError("plan dimensions do not match the supports");
  }
  if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
  for (Eigen::Index i = 0; i < plan.rows(); ++i) {
    for (Eigen::Index j = 0; j < plan.cols(); ++j) {
      if (!std::isfinite(plan(i, j)) || plan(i, j) < 0.0) {
        throw ValidationError("plan entries must be finite and non-negative");
      }
    }
  }
  constexpr double kCouplingTol = 1e-6;
  const double row_err = (plan.rowwise().sum() - src.weights()).lpNorm<1>();
  const double col_err = (plan.colwise().sum().transpose() - tgt.weights()).lpNorm<1>();
  if (row_err > kCouplingTol || col_err > kCouplingTol) {
    throw ValidationError("plan is not a coupling of the given marginals (L1 errors " + std::to_string(row_err) +
                          ", " + std::to_string(col_err) + ")");
  }
  return primal_unchecked(plan, cost.entries(), src.weights(), tgt.weights(), lambda);
}

double independent_coupling_gap(const EotSolution& solution, const DiscreteMeasure& src,
                                const DiscreteMeasure& tgt) {
  if (solution.plan.rows() != static_cast<Eigen::Index>(src.size()) ||
      solution.plan.cols() != static_cast<Eigen::Index>(tgt.size())) {
    throw ValidationError("plan dimensions do not match the supports");
  }
  const Matrix product = src.weights() * tgt.weights().transpose();
  return (solution.plan - product).cwiseAbs().maxCoeff();
}

Potentials restrict_potentials(const Potentials& potentials, const DiscreteMeasure& from_src,
                               const DiscreteMeasure& from_tgt, const DiscreteMeasure& to_src,
                               const DiscreteMeasure& to_tgt) {
  auto remap = [](const Vector& values, const DiscreteMeasure& from, const DiscreteMeasure& to) {
    std::unordered_map<std::size_t, Eigen::Index> position;
    position.reserve(from.size());
    for (std::size_t k = 0; k < from.size(); ++k) position.emplace(from.ids()[k], static_cast<Eigen::Index>(k));
    Vector out = Vector::Zero(static_cast<Eigen::Index>(to.size()));
    for (std::size_t k = 0; k < to.size(); ++k) {
      const auto it = position.find(to.ids()[k]);
      if (it != position.end()) out[static_cast<Eigen::Index>(k)] = values[it->second];
    }
    return out;
  };
  if (potentials.f.size() != static_cast<Eigen::Index>(from_src.size()) ||
      potentials.g.size() != static_cast<Eigen::Index>(from_tgt.size())) {
    throw ValidationError("potentials do not match the measures they were solved on");
  }
  return Potentials{remap(potentials.f, from_src, to_src), remap(potentials.g, from_tgt, to_tgt)};
}

}  // namespace eotcoloc
