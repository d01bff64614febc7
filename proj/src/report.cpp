#include "hpo/report.hpp"

#include <algorithm>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "hpo/errors.hpp"

namespace hpo {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += (c == '"') ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string number(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace

nlohmann::json to_json(const SuiteConfig& c) {
  using nlohmann::json;
  return json{
      {"lattice", {{"n_points", c.n_points}, {"dt", c.dt}, {"boundary", to_string(c.boundary)}}},
      {"physics",
       {{"hbar", c.units.hbar},
        {"mass", c.units.mass},
        {"omega", c.units.omega},
        {"lambda", c.lambdas},
        {"field_mass", c.field_mass},
        {"foliation", {c.foliation[0], c.foliation[1], c.foliation[2], c.foliation[3]}}}},
      {"fock",
       {{"n_max", c.n_max},
        {"coherent_n_max", c.coherent_n_max},
        {"nparticle_modes", c.nparticle_modes},
        {"allow_sparse", c.allow_sparse}}},
      {"angular",
       {{"span", c.angular_span}, {"refinements", c.angular_refinements}, {"eps_steps", c.angular_eps_steps}}},
      {"qft", {{"grid", c.qft_grid}, {"spacing", c.qft_spacing}, {"oracle_grid", c.qft_oracle_grid}}},
      {"histories", {{"levels", c.history_levels}, {"times", c.history_times}}},
      {"heisenberg", {{"fd_step", c.fd_step}}},
      {"tolerances",
       {{"exact", c.tol.exact},
        {"field", c.tol.field},
        {"greens", c.tol.greens},
        {"projector", c.tol.projector},
        {"contrast", c.tol.contrast},
        {"fd_ratio", c.tol.fd_ratio}}},
      {"run", {{"seed", c.seed}, {"samples", c.samples}, {"coherent_samples", c.coherent_samples}}},
      {"debug", {{"inject_central_term", c.inject_central_term}}},
  };
}

nlohmann::json to_json(const SuiteReport& r, bool include_timing) {
  using nlohmann::json;
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"id", c.id},
                      {"anchor", c.anchor},
                      {"measured", c.measured},
                      {"relation", to_string(c.relation)},
                      {"threshold", c.threshold},
                      {"pass", c.pass},
                      {"note", c.note}});
  json out{{"suite", r.suite}, {"passed", r.passed()}, {"checks", checks}, {"config", to_json(r.config)}};
  if (include_timing) out["seconds"] = r.seconds;
  return out;
}

std::string render_json(const SuiteReport& r, bool include_timing) {
  return to_json(r, include_timing).dump(2) + "\n";
}

std::string render_csv(const SuiteReport& r, bool include_timing) {
  std::ostringstream os;
  os << "suite,id,anchor,measured,relation,threshold,pass";
  if (include_timing) os << ",seconds";
  os << "\n";
  for (const auto& c : r.checks) {
    os << csv_field(r.suite) << ',' << csv_field(c.id) << ',' << csv_field(c.anchor) << ','
       << number(c.measured) << ',' << to_string(c.relation) << ',' << number(c.threshold) << ','
       << (c.pass ? "true" : "false");
    if (include_timing) os << ',' << number(r.seconds);
    os << "\n";
  }
  return os.str();
}

std::vector<TraceRow> trace_matrix() {
  std::vector<TraceRow> rows;
  for (const auto& info : check_catalogue()) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const TraceRow& r) {
      return r.anchor == info.anchor && r.suite == info.suite;
    });
    if (it == rows.end()) rows.push_back({info.anchor, info.suite, {info.id}});
    else it->check_ids.push_back(info.id);
  }
  return rows;
}

std::string render_trace_csv(const std::vector<TraceRow>& rows) {
  std::ostringstream os;
  os << "anchor,suite,checks\n";
  for (const auto& r : rows) {
    std::string ids;
    for (const auto& id : r.check_ids) ids += (ids.empty() ? "" : ";") + id;
    os << csv_field(r.anchor) << ',' << csv_field(r.suite) << ',' << csv_field(ids) << "\n";
  }
  return os.str();
}

nlohmann::json trace_json(const std::vector<TraceRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) out.push_back({{"anchor", r.anchor}, {"suite", r.suite}, {"checks", r.check_ids}});
  return out;
}

// ---------------------------------------------------------------------------

void write_grid_function_csv(std::ostream& out, const TestFunction& f) {
  const Grid& g = f.grid();
  out << "index,t,re,im\n";
  for (Index i = 0; i < f.size(); ++i)
    out << i << ',' << number(static_cast<double>(g.coordinate(i, 0)) * g.spacing(0)) << ','
        << number(f[i].real()) << ',' << number(f[i].imag()) << "\n";
}

void write_spectrum_csv(std::ostream& out, const std::vector<std::vector<double>>& blocks) {
  out << "block,index,value\n";
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (std::size_t i = 0; i < blocks[b].size(); ++i) out << b << ',' << i << ',' << number(blocks[b][i]) << "\n";
}

void write_matrix_csv(std::ostream& out, const MatrixXc& m) {
  out << "alpha,beta,re,im\n";
  for (Index a = 0; a < m.rows(); ++a)
    for (Index b = 0; b < m.cols(); ++b)
      out << a << ',' << b << ',' << number(m(a, b).real()) << ',' << number(m(a, b).imag()) << "\n";
}

void write_coordinate_list(std::ostream& out, const MatrixXc& m, double drop_below) {
  Index nnz = 0;
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (std::abs(m(i, j)) > drop_below) ++nnz;
  out << m.rows() << ' ' << m.cols() << ' ' << nnz << "\n";
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      if (std::abs(m(i, j)) > drop_below)
        out << i << ' ' << j << ' ' << number(m(i, j).real()) << ' ' << number(m(i, j).imag()) << "\n";
}

MatrixXc read_coordinate_list(std::istream& in) {
  Index rows = 0, cols = 0, nnz = 0;
  if (!(in >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0)
    throw PreconditionError("coordinate list: malformed header");
  MatrixXc m = MatrixXc::Zero(rows, cols);
  for (Index k = 0; k < nnz; ++k) {
    Index i = 0, j = 0;
    double re = 0, im = 0;
    if (!(in >> i >> j >> re >> im)) throw PreconditionError("coordinate list: truncated entry list");
    if (i < 0 || i >= rows || j < 0 || j >= cols)
      throw DimensionError("coordinate list: entry outside the matrix");
    m(i, j) = Complex(re, im);
  }
  return m;
}

}  // namespace hpo
