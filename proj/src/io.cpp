#include "eotcoloc/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <sstream>

#include "eotcoloc/error.hpp"

namespace eotcoloc {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (s.empty() || res.ec != std::errc() || res.ptr != last) {
    throw ValidationError("line " + std::to_string(line_no) + ": '" + s + "' is not a number");
  }
  return v;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> line_numbers;

  std::optional<std::size_t> column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  }
  std::size_t require(const std::string& name) const {
    const auto c = column(name);
    if (!c) throw ValidationError("missing column '" + name + "'");
    return *c;
  }
};

Table read_table(std::istream& in) {
  Table t;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv(line);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw ValidationError("line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                            " fields, the header has " + std::to_string(t.header.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_number(f, line_no));
    t.rows.push_back(std::move(row));
    t.line_numbers.push_back(line_no);
  }
  if (!have_header) throw ValidationError("CSV is empty (a header row is required)");
  return t;
}

template <class Fn>
auto with_path(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return fn(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::vector<double> to_vector(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector from_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string dump(const json& j) {
  return j.dump(2) + "\n";
}

json number_array(const std::vector<double>& values) {
  json arr = json::array();
  for (double v : values) arr.push_back(v);
  return arr;
}

template <class T>
T field(const json& j, const char* name) {
  if (!j.contains(name)) throw ValidationError(std::string("JSON is missing field '") + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("JSON field '") + name + "' has the wrong type");
  }
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

Matrix read_matrix_text(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    for (char& ch : line) {
      if (ch == ',' || ch == ';' || ch == '\t' || ch == '\r') ch = ' ';
    }
    std::istringstream fields(line);
    std::vector<double> row;
    std::string token;
    while (fields >> token) row.push_back(parse_number(token, line_no));
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ValidationError("line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                            " entries, expected " + std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError("matrix file has no data");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

Matrix load_matrix_text(const std::filesystem::path& path) {
  return with_path(path, [](std::istream& in) { return read_matrix_text(in); });
}

DiscreteMeasure read_points_csv(std::istream& in, std::string label) {
  const Table t = read_table(in);
  std::size_t dims = t.header.size();
  const bool weighted = !t.header.empty() && t.header.back() == "weight";
  if (weighted) --dims;
  if (dims == 0) throw ValidationError("point CSV has no coordinate columns");
  if (t.rows.empty()) throw ValidationError("point CSV has no rows");
  Matrix pts(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(dims));
  std::vector<double> w;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t k = 0; k < dims; ++k) pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = t.rows[i][k];
    if (weighted) w.push_back(t.rows[i][dims]);
  }
  if (weighted) return make_measure(pts, std::span<const double>(w), std::move(label));
  return make_measure(pts, std::nullopt, std::move(label));
}

DiscreteMeasure load_points_csv(const std::filesystem::path& path) {
  return with_path(path, [&](std::istream& in) { return read_points_csv(in, path.stem().string()); });
}

void write_points_csv(std::ostream& out, const DiscreteMeasure& measure) {
  for (std::size_t k = 0; k < measure.dim(); ++k) out << 'x' << (k + 1) << ',';
  out << "weight\n";
  const Matrix& p = measure.points();
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index k = 0; k < p.cols(); ++k) out << format_double(p(i, k)) << ',';
    out << format_double(measure.weights()[i]) << '\n';
  }
}

void write_curve_csv(std::ostream& out, const ColocCurve& curve) {
  out << "t,phi\n";
  for (std::size_t k = 0; k < curve.values.size(); ++k) {
    out << format_double(curve.grid[k]) << ',' << format_double(curve.values[k]) << '\n';
  }
}

void write_band_csv(std::ostream& out, const BandResult& band) {
  out << "t,phi,lower,upper\n";
  for (std::size_t k = 0; k < band.center.values.size(); ++k) {
    out << format_double(band.center.grid[k]) << ',' << format_double(band.center.values[k]) << ','
        << format_double(band.lower[k]) << ',' << format_double(band.upper[k]) << '\n';
  }
}

ColocCurve read_curve_csv(std::istream& in) {
  const Table t = read_table(in);
  const auto ct = t.require("t");
  const auto cphi = t.require("phi");
  if (t.rows.empty()) throw ValidationError("curve CSV has no rows");
  std::vector<double> grid;
  ColocCurve curve;
  for (const auto& row : t.rows) {
    grid.push_back(row[ct]);
    curve.values.push_back(row[cphi]);
  }
  curve.grid = ThresholdGrid(std::move(grid));
  return curve;
}

ColocCurve load_curve_csv(const std::filesystem::path& path) {
  return with_path(path, [](std::istream& in) { return read_curve_csv(in); });
}

void write_sups_csv(std::ostream& out, const std::vector<double>& sups) {
  out << "sup_dev\n";
  for (double s : sups) out << format_double(s) << '\n';
}

std::vector<double> read_sups_csv(std::istream& in) {
  const Table t = read_table(in);
  const auto c = t.require("sup_dev");
  std::vector<double> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) out.push_back(row[c]);
  if (out.empty()) throw ValidationError("column 'sup_dev' has no values");
  return out;
}

std::vector<double> load_sups_csv(const std::filesystem::path& path) {
  return with_path(path, [](std::istream& in) { return read_sups_csv(in); });
}

void write_qq_csv(std::ostream& out, const std::vector<std::pair<double, double>>& pairs) {
  out << "q_boot,q_mc\n";
  for (const auto& [a, b] : pairs) out << format_double(a) << ',' << format_double(b) << '\n';
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

std::string solution_json(const EotSolution& s) {
  json j;
  j["lambda"] = s.lambda;
  j["iterations"] = s.iterations;
  j["final_marginal_error"] = s.final_marginal_error;
  j["primal_value"] = s.primal_value;
  j["dual_value"] = s.dual_value;
  j["f"] = number_array(to_vector(s.potentials.f));
  j["g"] = number_array(to_vector(s.potentials.g));
  j["converged"] = s.converged;
  j["newton_steps"] = s.newton_steps;
  return dump(j);
}

EotSolution parse_solution_json(const std::string& text) {
  const json j = parse_json(text);
  EotSolution s;
  s.lambda = field<double>(j, "lambda");
  s.iterations = field<std::size_t>(j, "iterations");
  s.final_marginal_error = field<double>(j, "final_marginal_error");
  s.primal_value = field<double>(j, "primal_value");
  s.dual_value = field<double>(j, "dual_value");
  s.potentials.f = from_vector(field<std::vector<double>>(j, "f"));
  s.potentials.g = from_vector(field<std::vector<double>>(j, "g"));
  if (j.contains("converged")) s.converged = field<bool>(j, "converged");
  if (j.contains("newton_steps")) s.newton_steps = field<std::size_t>(j, "newton_steps");
  return s;
}

std::string band_json(const BandResult& b) {
  json j;
  j["alpha"] = b.alpha;
  j["B"] = b.replicates;
  j["q_star"] = b.q_star;
  j["rate"] = b.rate;
  j["half_width"] = b.half_width;
  j["grid"] = number_array(b.center.grid.thresholds());
  j["center"] = number_array(b.center.values);
  j["lower"] = number_array(b.lower);
  j["upper"] = number_array(b.upper);
  return dump(j);
}

BandResult parse_band_json(const std::string& text) {
  const json j = parse_json(text);
  BandResult b;
  b.alpha = field<double>(j, "alpha");
  b.replicates = field<std::size_t>(j, "B");
  b.q_star = field<double>(j, "q_star");
  b.rate = field<double>(j, "rate");
  b.half_width = field<double>(j, "half_width");
  b.center.grid = ThresholdGrid(field<std::vector<double>>(j, "grid"));
  b.center.values = field<std::vector<double>>(j, "center");
  b.lower = field<std::vector<double>>(j, "lower");
  b.upper = field<std::vector<double>>(j, "upper");
  const auto n = b.center.grid.size();
  if (b.center.values.size() != n || b.lower.size() != n || b.upper.size() != n) {
    throw ValidationError("band JSON arrays have different lengths");
  }
  return b;
}

std::string coverage_json(const CoverageResult& r) {
  json j;
  j["repetitions"] = r.repetitions;
  j["covered"] = r.covered;
  j["coverage"] = r.coverage;
  return dump(j);
}

CoverageResult parse_coverage_json(const std::string& text) {
  const json j = parse_json(text);
  CoverageResult r;
  r.repetitions = field<std::size_t>(j, "repetitions");
  r.covered = field<std::size_t>(j, "covered");
  r.coverage = field<double>(j, "coverage");
  return r;
}

}  // namespace eotcoloc
