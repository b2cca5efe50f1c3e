#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "eotcoloc/bootstrap.hpp"
#include "eotcoloc/coloc.hpp"
#include "eotcoloc/error.hpp"
#include "eotcoloc/image_io.hpp"
#include "eotcoloc/io.hpp"
#include "eotcoloc/samplers.hpp"
#include "eotcoloc/sinkhorn.hpp"

namespace eotcoloc::cli {
namespace {

const std::set<std::string> kFlagOptions = {"no-log-domain", "no-newton", "no-warm-start"};

// Streams reserved for grid subsampling; bootstrap replicates use 0, 1, 2, ...
constexpr std::uint64_t kSubsampleSrcStream = std::numeric_limits<std::uint64_t>::max();
constexpr std::uint64_t kSubsampleTgtStream = std::numeric_limits<std::uint64_t>::max() - 1;

struct InputOptions {
  std::string src;
  std::string tgt;
  std::string format = "auto";
  double pitch = 1.0;
  std::string cost = "auto";
  std::string cost_matrix;
};

struct SolverOptions {
  double lambda = 0.0;
  std::size_t max_iters = 10000;
  double tol = 1e-9;
  bool no_log_domain = false;
  bool no_newton = false;

  SolverConfig config() const {
    SolverConfig cfg;
    cfg.lambda = lambda;
    cfg.max_iters = max_iters;
    cfg.marginal_tol = tol;
    cfg.log_domain = !no_log_domain;
    cfg.newton = !no_newton;
    cfg.validate();
    return cfg;
  }
};

struct BandOptions {
  double alpha = 0.05;
  std::size_t replicates = 1000;
  std::size_t subsample = 0;
  std::size_t resample_m = 0;
  std::size_t resample_n = 0;
  std::uint64_t seed = 0;
  bool no_warm_start = false;
  std::size_t threads = 0;
  std::size_t grid_resolution = 200;

  BootstrapConfig config() const {
    BootstrapConfig cfg;
    cfg.replicates = replicates;
    cfg.alpha = alpha;
    cfg.resample_m = resample_m ? resample_m : subsample;
    cfg.resample_n = resample_n ? resample_n : subsample;
    cfg.seed = seed;
    cfg.warm_start = !no_warm_start;
    cfg.workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    cfg.validate();
    return cfg;
  }
};

void add_inputs(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("src", in.src, "Source: point CSV or intensity matrix")->required();
  cmd->add_option("tgt", in.tgt, "Target: point CSV or intensity matrix")->required();
  cmd->add_option("--format", in.format, "Input format")
      ->check(CLI::IsMember({"auto", "points", "grid"}))
      ->capture_default_str();
  cmd->add_option("--pitch", in.pitch, "Pixel pitch for intensity matrices")->capture_default_str();
  cmd->add_option("--cost", in.cost, "Ground cost")
      ->check(CLI::IsMember({"auto", "euclidean", "sphere-geodesic", "grid-euclidean", "explicit-matrix"}))
      ->capture_default_str();
  cmd->add_option("--cost-matrix", in.cost_matrix, "Matrix file for --cost explicit-matrix");
}

void add_solver(CLI::App* cmd, SolverOptions& s) {
  cmd->add_option("--lambda", s.lambda, "Entropic regularization, in cost units")->required();
  cmd->add_option("--max-iters", s.max_iters, "Iteration budget per solve")->capture_default_str();
  cmd->add_option("--tol", s.tol, "L1 marginal tolerance")->capture_default_str();
  cmd->add_flag("--no-log-domain", s.no_log_domain, "Scaling iterations on exp(-c/lambda)");
  cmd->add_flag("--no-newton", s.no_newton, "Plain Sinkhorn sweeps only");
}

void add_band(CLI::App* cmd, BandOptions& b) {
  cmd->add_option("--alpha", b.alpha, "Band level 1 - alpha")->capture_default_str();
  cmd->add_option("--replicates,-B", b.replicates, "Bootstrap replicates")->capture_default_str();
  cmd->add_option("--subsample", b.subsample, "Draw this many points from each input first");
  cmd->add_option("--resample-m", b.resample_m, "Source draws per replicate (default: subsample or support size)");
  cmd->add_option("--resample-n", b.resample_n, "Target draws per replicate (default: subsample or support size)");
  cmd->add_option("--seed", b.seed, "Random seed")->envname("EOT_COLOC_SEED");
  cmd->add_flag("--no-warm-start", b.no_warm_start, "Solve replicates from zero potentials");
  cmd->add_option("--threads", b.threads, "Worker threads (0: all cores); output does not depend on it");
  cmd->add_option("--grid-resolution", b.grid_resolution, "Threshold grid size")->capture_default_str();
}

struct Input {
  DiscreteMeasure measure;
  std::optional<GridMeasure> grid;
};

bool looks_like_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const char c = line[first];
    return std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.';
  }
  return false;
}

Input load_input(const std::string& path, const InputOptions& opts) {
  const bool grid = opts.format == "grid" || (opts.format == "auto" && looks_like_matrix(path));
  if (grid) {
    GridMeasure g = load_grid(path, opts.pitch);
    DiscreteMeasure m = to_measure(g);
    return Input{std::move(m), std::move(g)};
  }
  return Input{load_points_csv(path), std::nullopt};
}

CostSpec cost_spec(const InputOptions& opts, const Input& src, const Input& tgt) {
  if (opts.cost == "auto") {
    if (src.grid && tgt.grid) return CostSpec::grid_euclidean(opts.pitch);
    return CostSpec::euclidean();
  }
  const CostKind kind = parse_cost_kind(opts.cost);
  CostSpec spec;
  switch (kind) {
    case CostKind::kEuclidean: spec = CostSpec::euclidean(); break;
    case CostKind::kSphereGeodesic: spec = CostSpec::sphere_geodesic(); break;
    case CostKind::kGridEuclidean: spec = CostSpec::grid_euclidean(opts.pitch); break;
    case CostKind::kExplicitMatrix:
      if (opts.cost_matrix.empty()) throw ValidationError("--cost explicit-matrix needs --cost-matrix");
      spec = CostSpec::explicit_matrix(load_matrix_text(opts.cost_matrix));
      break;
  }
  spec.validate();
  return spec;
}

DiscreteMeasure maybe_subsample(const Input& in, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
  if (n == 0) return in.measure;
  RngStream rng = RngStream::derived(seed, stream);
  return in.grid ? subsample_grid(*in.grid, n, rng) : resample(in.measure, n, rng);
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

template <class Writer>
std::string render(Writer&& write) {
  std::ostringstream ss;
  write(ss);
  return ss.str();
}

int cmd_solve(const InputOptions& in, const SolverOptions& so, std::size_t resolution, const std::string& out_path,
              const std::string& plan_path, const std::string& curve_path, std::ostream& out, std::ostream& err) {
  const SolverConfig cfg = so.config();
  if (resolution < 2) throw ValidationError("--grid-resolution must be at least 2");
  const Input src = load_input(in.src, in);
  const Input tgt = load_input(in.tgt, in);
  const CostSpec spec = cost_spec(in, src, tgt);
  const CostMatrix cost = realize_cost(src.measure, tgt.measure, spec);
  const EotSolution sol = solve(src.measure, tgt.measure, cost, cfg);
  emit(out_path, solution_json(sol), out);
  if (!plan_path.empty()) write_text_file(plan_path, render([&](std::ostream& s) { write_matrix_csv(s, sol.plan); }));
  if (!curve_path.empty()) {
    const ColocCurve curve = coloc_curve(sol, cost, default_grid(cost, resolution));
    write_text_file(curve_path, render([&](std::ostream& s) { write_curve_csv(s, curve); }));
  }
  if (!sol.converged) {
    err << "error: solver did not converge in " << cfg.max_iters << " iterations (marginal error "
        << sol.final_marginal_error << ")\n";
    return 2;
  }
  return 0;
}

int cmd_band(const InputOptions& in, const SolverOptions& so, const BandOptions& bo, const std::string& out_path,
             const std::string& curve_path, const std::string& sups_path, std::ostream& out) {
  const SolverConfig cfg = so.config();
  const BootstrapConfig boot = bo.config();
  if (bo.grid_resolution < 2) throw ValidationError("--grid-resolution must be at least 2");
  const Input src = load_input(in.src, in);
  const Input tgt = load_input(in.tgt, in);
  const CostSpec spec = cost_spec(in, src, tgt);
  const DiscreteMeasure s = maybe_subsample(src, bo.subsample, bo.seed, kSubsampleSrcStream);
  const DiscreteMeasure t = maybe_subsample(tgt, bo.subsample, bo.seed, kSubsampleTgtStream);
  const BandResult band = bootstrap_band(s, t, spec, cfg, bo.grid_resolution, boot);
  emit(out_path, band_json(band), out);
  if (!curve_path.empty()) write_text_file(curve_path, render([&](std::ostream& o) { write_band_csv(o, band); }));
  if (!sups_path.empty()) {
    write_text_file(sups_path, render([&](std::ostream& o) { write_sups_csv(o, band.replicate_sups); }));
  }
  return 0;
}

int cmd_coverage(const InputOptions& in, const SolverOptions& so, const BandOptions& bo, const std::string& truth_path,
                 std::size_t repetitions, const std::string& out_path, std::ostream& out) {
  const SolverConfig cfg = so.config();
  const BootstrapConfig boot = bo.config();
  if (repetitions < 1) throw ValidationError("--repetitions must be at least 1");
  if (bo.grid_resolution < 2) throw ValidationError("--grid-resolution must be at least 2");
  const ColocCurve truth = load_curve_csv(truth_path);
  const Input src = load_input(in.src, in);
  const Input tgt = load_input(in.tgt, in);
  const CostSpec spec = cost_spec(in, src, tgt);
  // The truth must sit on the grid `solve --curve-out` builds for these inputs.
  if (src.measure.size() * tgt.measure.size() <= kBucketedCurveLimit) {
    const ThresholdGrid expected = default_grid(realize_cost(src.measure, tgt.measure, spec), bo.grid_resolution);
    if (!(expected == truth.grid)) {
      throw ValidationError("--truth: grid does not match the " + std::to_string(expected.size()) +
                            "-point threshold grid of the inputs (check --grid-resolution)");
    }
  }
  const CoverageResult result =
      coverage_experiment(truth, src.measure, tgt.measure, spec, cfg, boot, repetitions, bo.seed);
  emit(out_path, coverage_json(result), out);
  return 0;
}

int cmd_simulate(const std::string& scenario, std::size_t n, std::uint64_t seed, const std::string& out_src,
                 const std::string& out_tgt) {
  if (n < 1) throw ValidationError("--n must be at least 1");
  RngStream src_rng = RngStream::derived(seed, 0);
  RngStream tgt_rng = RngStream::derived(seed, 1);
  std::optional<DiscreteMeasure> src;
  std::optional<DiscreteMeasure> tgt;
  if (scenario == "i") {
    src = sample_gaussian_mixture(scenario_i_source(), n, src_rng);
    tgt = sample_gaussian_mixture(scenario_i_target(), n, tgt_rng);
  } else if (scenario == "ii") {
    src = sample_vmf_mixture(scenario_ii_source(), n, src_rng);
    tgt = sample_vmf_mixture(scenario_ii_target(), n, tgt_rng);
  } else {
    throw ValidationError("unknown scenario '" + scenario + "' (expected i or ii)");
  }
  write_text_file(out_src, render([&](std::ostream& o) { write_points_csv(o, *src); }));
  write_text_file(out_tgt, render([&](std::ostream& o) { write_points_csv(o, *tgt); }));
  return 0;
}

int cmd_qq(const std::string& boot_path, const std::string& mc_path, const std::string& out_path, std::ostream& out) {
  const auto boot = load_sups_csv(boot_path);
  const auto mc = load_sups_csv(mc_path);
  const auto pairs = qq_data(boot, mc);
  emit(out_path, render([&](std::ostream& o) { write_qq_csv(o, pairs); }), out);
  return 0;
}

std::string normalize_key(std::string key) {
  while (!key.empty() && key.front() == '-') key.erase(key.begin());
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

bool given(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

}  // namespace

std::vector<std::string> apply_config_file(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) path = args[k + 1];
    if (args[k].rfind("--config=", 0) == 0) path = args[k].substr(9);
  }
  if (path.empty()) return args;

  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::vector<std::string> out = args;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r\"");
      if (b == std::string::npos) return std::string();
      const auto e = s.find_last_not_of(" \t\r\"");
      return s.substr(b, e - b + 1);
    };
    const std::string key = normalize_key(strip(line.substr(0, eq)));
    const std::string value = strip(line.substr(eq + 1));
    if (key.empty()) throw ValidationError(path + ":" + std::to_string(line_no) + ": empty key");
    if (key == "config" || given(args, key)) continue;
    if (kFlagOptions.count(key)) {
      if (value == "true" || value == "1" || value == "yes" || value == "on") out.push_back("--" + key);
      continue;
    }
    out.push_back("--" + key);
    out.push_back(value);
  }
  return out;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entropic optimal transport colocalization curves and bootstrap bands", "eot-coloc"};
  app.require_subcommand(1);
  std::string config_path;

  InputOptions in;
  SolverOptions so;
  BandOptions bo;
  std::string out_path;
  std::string plan_path;
  std::string curve_path;
  std::string sups_path;
  std::size_t resolution = 200;

  auto* solve_cmd = app.add_subcommand("solve", "Solve entropic OT between two inputs");
  add_inputs(solve_cmd, in);
  add_solver(solve_cmd, so);
  solve_cmd->add_option("--out", out_path, "Solution JSON (default: stdout)");
  solve_cmd->add_option("--plan-out", plan_path, "Dense plan CSV");
  solve_cmd->add_option("--curve-out", curve_path, "Colocalization curve CSV (t,phi)");
  solve_cmd->add_option("--grid-resolution", resolution, "Threshold grid size")->capture_default_str();

  auto* band_cmd = app.add_subcommand("band", "Bootstrap confidence band for the colocalization curve");
  add_inputs(band_cmd, in);
  add_solver(band_cmd, so);
  add_band(band_cmd, bo);
  band_cmd->add_option("--out", out_path, "Band JSON (default: stdout)");
  band_cmd->add_option("--curve-out", curve_path, "Band CSV (t,phi,lower,upper)");
  band_cmd->add_option("--sups-out", sups_path, "Replicate sup deviations CSV (sup_dev)");

  std::string truth_path;
  std::size_t repetitions = 0;
  auto* cov_cmd = app.add_subcommand("coverage", "Coverage of subsample bands against a reference curve");
  add_inputs(cov_cmd, in);
  add_solver(cov_cmd, so);
  add_band(cov_cmd, bo);
  cov_cmd->add_option("--truth", truth_path, "Reference curve CSV (t,phi)")->required();
  cov_cmd->add_option("--repetitions,-R", repetitions, "Independent subsample repetitions")->required();
  cov_cmd->add_option("--out", out_path, "Coverage JSON (default: stdout)");

  std::string scenario;
  std::size_t n = 0;
  std::uint64_t sim_seed = 0;
  std::string out_src;
  std::string out_tgt;
  auto* sim_cmd = app.add_subcommand("simulate", "Sample a simulation scenario");
  sim_cmd->add_option("--scenario", scenario, "i (Gaussian vs Gaussian mixture) or ii (vMF on the sphere)")
      ->required();
  sim_cmd->add_option("--n", n, "Points per measure")->required();
  sim_cmd->add_option("--seed", sim_seed, "Random seed")->envname("EOT_COLOC_SEED");
  sim_cmd->add_option("--out-src", out_src, "Source CSV")->required();
  sim_cmd->add_option("--out-tgt", out_tgt, "Target CSV")->required();

  std::string boot_path;
  std::string mc_path;
  auto* qq_cmd = app.add_subcommand("qq", "Quantile pairs of two sup_dev samples");
  qq_cmd->add_option("--boot", boot_path, "Bootstrap sup_dev CSV")->required();
  qq_cmd->add_option("--mc", mc_path, "Monte Carlo sup_dev CSV")->required();
  qq_cmd->add_option("--out", out_path, "Q-Q CSV (default: stdout)");

  for (auto* cmd : {solve_cmd, band_cmd, cov_cmd, sim_cmd, qq_cmd}) {
    cmd->add_option("--config", config_path, "File of 'key = value' lines; flags take precedence");
  }

  try {
    std::vector<std::string> args = apply_config_file(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*solve_cmd) return cmd_solve(in, so, resolution, out_path, plan_path, curve_path, out, err);
    if (*band_cmd) return cmd_band(in, so, bo, out_path, curve_path, sups_path, out);
    if (*cov_cmd) return cmd_coverage(in, so, bo, truth_path, repetitions, out_path, out);
    if (*sim_cmd) return cmd_simulate(scenario, n, sim_seed, out_src, out_tgt);
    if (*qq_cmd) return cmd_qq(boot_path, mc_path, out_path, out);
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace eotcoloc::cli
