#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "eotcoloc/bootstrap.hpp"
#include "eotcoloc/coloc.hpp"
#include "eotcoloc/measure.hpp"
#include "eotcoloc/sinkhorn.hpp"

namespace eotcoloc {

// All writers print doubles in shortest round-trip form, so equal values give
// equal bytes and every file reads back to the same doubles.

/// Plain-text matrix: one row per line, entries separated by whitespace,
/// commas or semicolons; blank lines ignored; rows must have equal length.
Matrix read_matrix_text(std::istream& in);
Matrix load_matrix_text(const std::filesystem::path& path);

/// Point cloud CSV: header row, then one atom per row with columns x1..xd and
/// an optional trailing `weight` column (recognized by its header name).
DiscreteMeasure read_points_csv(std::istream& in, std::string label = {});
DiscreteMeasure load_points_csv(const std::filesystem::path& path);
void write_points_csv(std::ostream& out, const DiscreteMeasure& measure);

/// `t,phi`
void write_curve_csv(std::ostream& out, const ColocCurve& curve);
/// `t,phi,lower,upper`
void write_band_csv(std::ostream& out, const BandResult& band);
/// Reads the `t` and `phi` columns of a curve or band CSV.
ColocCurve read_curve_csv(std::istream& in);
ColocCurve load_curve_csv(const std::filesystem::path& path);

/// Single column `sup_dev`.
void write_sups_csv(std::ostream& out, const std::vector<double>& sups);
/// The `sup_dev` column of a CSV (other columns ignored).
std::vector<double> read_sups_csv(std::istream& in);
std::vector<double> load_sups_csv(const std::filesystem::path& path);

/// `q_boot,q_mc`
void write_qq_csv(std::ostream& out, const std::vector<std::pair<double, double>>& pairs);

/// Dense matrix, one row per line, no header.
void write_matrix_csv(std::ostream& out, const Matrix& m);

/// {lambda, iterations, final_marginal_error, primal_value, dual_value, f, g,
///  converged, newton_steps}
std::string solution_json(const EotSolution& solution);
/// Everything but the plan.
EotSolution parse_solution_json(const std::string& text);

/// {alpha, B, q_star, rate, half_width, grid, center, lower, upper}
std::string band_json(const BandResult& band);
/// Everything but replicate_sups.
BandResult parse_band_json(const std::string& text);

/// {repetitions, covered, coverage}
std::string coverage_json(const CoverageResult& result);
CoverageResult parse_coverage_json(const std::string& text);

std::string format_double(double v);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace eotcoloc
