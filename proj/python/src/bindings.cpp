#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <vector>

#include "eotcoloc/bootstrap.hpp"
#include "eotcoloc/coloc.hpp"
#include "eotcoloc/error.hpp"
#include "eotcoloc/image_io.hpp"
#include "eotcoloc/io.hpp"
#include "eotcoloc/samplers.hpp"
#include "eotcoloc/sinkhorn.hpp"

namespace py = pybind11;
using namespace eotcoloc;

namespace {

DiscreteMeasure measure_from(const Matrix& points, std::optional<std::vector<double>> weights, std::string label) {
  if (weights) return make_measure(points, std::span<const double>(*weights), std::move(label));
  return make_measure(points, std::nullopt, std::move(label));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Entropic optimal transport colocalization curves and bootstrap bands";

  auto validation = py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", numerical.ptr());
  (void)validation;

  py::class_<DiscreteMeasure>(m, "DiscreteMeasure")
      .def(py::init(&measure_from), py::arg("points"), py::arg("weights") = std::nullopt, py::arg("label") = "",
           "Atoms as rows of `points`; weights default to uniform and are normalized, zero weights dropped.")
      .def_property_readonly("points", &DiscreteMeasure::points)
      .def_property_readonly("weights", &DiscreteMeasure::weights)
      .def_property_readonly("ids", &DiscreteMeasure::ids)
      .def_property_readonly("label", &DiscreteMeasure::label)
      .def("__len__", &DiscreteMeasure::size)
      .def_property_readonly("dim", &DiscreteMeasure::dim);

  py::enum_<CostKind>(m, "CostKind")
      .value("EUCLIDEAN", CostKind::kEuclidean)
      .value("SPHERE_GEODESIC", CostKind::kSphereGeodesic)
      .value("GRID_EUCLIDEAN", CostKind::kGridEuclidean)
      .value("EXPLICIT_MATRIX", CostKind::kExplicitMatrix);

  py::class_<CostSpec>(m, "CostSpec")
      .def_readonly("kind", &CostSpec::kind)
      .def_readonly("pitch", &CostSpec::pitch)
      .def_static("euclidean", &CostSpec::euclidean)
      .def_static("sphere_geodesic", &CostSpec::sphere_geodesic)
      .def_static("grid_euclidean", &CostSpec::grid_euclidean, py::arg("pitch") = 1.0)
      .def_static("explicit_matrix", &CostSpec::explicit_matrix, py::arg("matrix"));

  py::class_<CostMatrix>(m, "CostMatrix")
      .def(py::init<Matrix>(), py::arg("entries"))
      .def_property_readonly("entries", &CostMatrix::entries)
      .def_property_readonly("max_cost", &CostMatrix::max_cost)
      .def_property_readonly("shape", [](const CostMatrix& c) { return py::make_tuple(c.rows(), c.cols()); });

  m.def("realize_cost", &realize_cost, py::arg("src"), py::arg("tgt"), py::arg("spec"));

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init([](double lambda, std::size_t max_iters, double marginal_tol, bool log_domain, bool newton) {
             SolverConfig c{lambda, max_iters, marginal_tol, log_domain, newton};
             c.validate();
             return c;
           }),
           py::arg("lambda_") = 1.0, py::arg("max_iters") = 10000, py::arg("marginal_tol") = 1e-9,
           py::arg("log_domain") = true, py::arg("newton") = true)
      .def_readwrite("lambda_", &SolverConfig::lambda)
      .def_readwrite("max_iters", &SolverConfig::max_iters)
      .def_readwrite("marginal_tol", &SolverConfig::marginal_tol)
      .def_readwrite("log_domain", &SolverConfig::log_domain)
      .def_readwrite("newton", &SolverConfig::newton);

  py::class_<Potentials>(m, "Potentials")
      .def(py::init<Vector, Vector>(), py::arg("f"), py::arg("g"))
      .def_readonly("f", &Potentials::f)
      .def_readonly("g", &Potentials::g);

  py::class_<EotSolution>(m, "EotSolution")
      .def_readonly("potentials", &EotSolution::potentials)
      .def_readonly("plan", &EotSolution::plan)
      .def_readonly("lambda_", &EotSolution::lambda)
      .def_readonly("primal_value", &EotSolution::primal_value)
      .def_readonly("dual_value", &EotSolution::dual_value)
      .def_readonly("iterations", &EotSolution::iterations)
      .def_readonly("newton_steps", &EotSolution::newton_steps)
      .def_readonly("final_marginal_error", &EotSolution::final_marginal_error)
      .def_readonly("converged", &EotSolution::converged)
      .def("to_json", &solution_json);

  m.def(
      "solve",
      [](const DiscreteMeasure& src, const DiscreteMeasure& tgt, const CostMatrix& cost, const SolverConfig& cfg,
         std::optional<Potentials> warm_start) {
        py::gil_scoped_release release;
        return warm_start ? solve(src, tgt, cost, cfg, *warm_start) : solve(src, tgt, cost, cfg);
      },
      py::arg("src"), py::arg("tgt"), py::arg("cost"), py::arg("config"), py::arg("warm_start") = std::nullopt);
  m.def("dual_objective", &dual_objective, py::arg("src"), py::arg("tgt"), py::arg("cost"), py::arg("potentials"),
        py::arg("lambda_"));
  m.def("primal_objective", &primal_objective, py::arg("plan"), py::arg("cost"), py::arg("src"), py::arg("tgt"),
        py::arg("lambda_"));
  m.def("independent_coupling_gap", &independent_coupling_gap, py::arg("solution"), py::arg("src"), py::arg("tgt"));

  py::class_<ThresholdGrid>(m, "ThresholdGrid")
      .def(py::init<std::vector<double>>(), py::arg("thresholds"))
      .def_property_readonly("thresholds", &ThresholdGrid::thresholds)
      .def("__len__", &ThresholdGrid::size)
      .def(py::self == py::self);

  py::class_<ColocCurve>(m, "ColocCurve")
      .def(py::init([](ThresholdGrid grid, std::vector<double> values) {
             ColocCurve c{std::move(grid), std::move(values)};
             c.validate();
             return c;
           }),
           py::arg("grid"), py::arg("values"))
      .def_readonly("grid", &ColocCurve::grid)
      .def_readonly("values", &ColocCurve::values);

  m.def(
      "coloc_curve",
      [](const Matrix& plan, const CostMatrix& cost, const ThresholdGrid& grid) { return coloc_curve(plan, cost, grid); },
      py::arg("plan"), py::arg("cost"), py::arg("grid"));
  m.def("default_grid", &default_grid, py::arg("cost"), py::arg("resolution") = 200);
  m.def("eval_kernel_functional", &eval_kernel_functional, py::arg("solution"), py::arg("kernel"));
  m.def("sup_distance", &sup_distance, py::arg("a"), py::arg("b"));

  py::class_<BootstrapConfig>(m, "BootstrapConfig")
      .def(py::init([](std::size_t replicates, double alpha, std::size_t resample_m, std::size_t resample_n,
                       std::uint64_t seed, bool warm_start, std::size_t workers) {
             BootstrapConfig c{replicates, alpha, resample_m, resample_n, seed, warm_start, workers};
             c.validate();
             return c;
           }),
           py::arg("replicates") = 1000, py::arg("alpha") = 0.05, py::arg("resample_m") = 0,
           py::arg("resample_n") = 0, py::arg("seed") = 0, py::arg("warm_start") = true, py::arg("workers") = 1)
      .def_readwrite("replicates", &BootstrapConfig::replicates)
      .def_readwrite("alpha", &BootstrapConfig::alpha)
      .def_readwrite("resample_m", &BootstrapConfig::resample_m)
      .def_readwrite("resample_n", &BootstrapConfig::resample_n)
      .def_readwrite("seed", &BootstrapConfig::seed)
      .def_readwrite("warm_start", &BootstrapConfig::warm_start)
      .def_readwrite("workers", &BootstrapConfig::workers);

  py::class_<BandResult>(m, "BandResult")
      .def_readonly("alpha", &BandResult::alpha)
      .def_readonly("replicates", &BandResult::replicates)
      .def_readonly("center", &BandResult::center)
      .def_readonly("q_star", &BandResult::q_star)
      .def_readonly("rate", &BandResult::rate)
      .def_readonly("half_width", &BandResult::half_width)
      .def_readonly("lower", &BandResult::lower)
      .def_readonly("upper", &BandResult::upper)
      .def_readonly("replicate_sups", &BandResult::replicate_sups)
      .def("to_json", &band_json);

  m.def(
      "bootstrap_band",
      [](const DiscreteMeasure& src, const DiscreteMeasure& tgt, const CostSpec& spec, const SolverConfig& solver,
         const BootstrapConfig& boot, std::optional<ThresholdGrid> grid, std::size_t resolution) {
        py::gil_scoped_release release;
        return grid ? bootstrap_band(src, tgt, spec, solver, *grid, boot)
                    : bootstrap_band(src, tgt, spec, solver, resolution, boot);
      },
      py::arg("src"), py::arg("tgt"), py::arg("spec"), py::arg("solver"), py::arg("boot"),
      py::arg("grid") = std::nullopt, py::arg("resolution") = 200);
  m.def(
      "upper_quantile", [](const std::vector<double>& v, double alpha) { return upper_quantile(v, alpha); },
      py::arg("values"), py::arg("alpha"));
  m.def(
      "qq_data", [](const std::vector<double>& boot, const std::vector<double>& mc) { return qq_data(boot, mc); },
      py::arg("boot"), py::arg("mc"));
  m.def(
      "resample",
      [](const DiscreteMeasure& measure, std::size_t size, std::uint64_t seed) {
        RngStream rng(seed);
        return resample(measure, size, rng);
      },
      py::arg("measure"), py::arg("size"), py::arg("seed"));

  py::class_<CoverageResult>(m, "CoverageResult")
      .def_readonly("repetitions", &CoverageResult::repetitions)
      .def_readonly("covered", &CoverageResult::covered)
      .def_readonly("coverage", &CoverageResult::coverage);
  m.def(
      "coverage_experiment",
      [](const ColocCurve& truth, const DiscreteMeasure& src, const DiscreteMeasure& tgt, const CostSpec& spec,
         const SolverConfig& solver, const BootstrapConfig& boot, std::size_t repetitions, std::uint64_t seed) {
        py::gil_scoped_release release;
        return coverage_experiment(truth, src, tgt, spec, solver, boot, repetitions, seed);
      },
      py::arg("truth"), py::arg("src"), py::arg("tgt"), py::arg("spec"), py::arg("solver"), py::arg("boot"),
      py::arg("repetitions"), py::arg("seed"));

  m.def(
      "scenario_i",
      [](std::size_t n, std::uint64_t seed) {
        RngStream src_rng = RngStream::derived(seed, 0);
        RngStream tgt_rng = RngStream::derived(seed, 1);
        return py::make_tuple(sample_gaussian_mixture(scenario_i_source(), n, src_rng),
                              sample_gaussian_mixture(scenario_i_target(), n, tgt_rng));
      },
      py::arg("n"), py::arg("seed"), "Source and target samples of the planar Gaussian scenario.");
  m.def(
      "scenario_ii",
      [](std::size_t n, std::uint64_t seed) {
        RngStream src_rng = RngStream::derived(seed, 0);
        RngStream tgt_rng = RngStream::derived(seed, 1);
        return py::make_tuple(sample_vmf_mixture(scenario_ii_source(), n, src_rng),
                              sample_vmf_mixture(scenario_ii_target(), n, tgt_rng));
      },
      py::arg("n"), py::arg("seed"), "Source and target samples of the spherical vMF scenario.");
  m.def(
      "sample_vmf",
      [](const Eigen::Vector3d& mean, double kappa, std::size_t n, std::uint64_t seed) {
        if (n == 0) throw ValidationError("n must be positive");
        RngStream rng(seed);
        Matrix out(static_cast<Eigen::Index>(n), 3);
        for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) = sample_vmf(mean, kappa, rng).transpose();
        return out;
      },
      py::arg("mean"), py::arg("kappa"), py::arg("n"), py::arg("seed"));

  py::class_<GridMeasure>(m, "GridMeasure")
      .def(py::init<Matrix, double>(), py::arg("intensities"), py::arg("pitch") = 1.0)
      .def_property_readonly("width", &GridMeasure::width)
      .def_property_readonly("height", &GridMeasure::height)
      .def_property_readonly("pixel_count", &GridMeasure::pixel_count)
      .def_property_readonly("pitch", &GridMeasure::pitch)
      .def_property_readonly("intensities", &GridMeasure::intensities)
      .def_property_readonly("total", &GridMeasure::total);
  m.def(
      "load_grid", [](const std::string& path, double pitch) { return load_grid(path, pitch); }, py::arg("path"),
      py::arg("pitch") = 1.0);
  m.def("to_measure", &to_measure, py::arg("grid"));
  m.def(
      "subsample_grid",
      [](const GridMeasure& grid, std::size_t n, std::uint64_t seed) {
        RngStream rng(seed);
        return subsample_grid(grid, n, rng);
      },
      py::arg("grid"), py::arg("n"), py::arg("seed"));
  m.def(
      "load_points_csv", [](const std::string& path) { return load_points_csv(path); }, py::arg("path"));
}
