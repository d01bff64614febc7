#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "hpo/lattice.hpp"
#include "hpo/suites.hpp"

namespace hpo {

nlohmann::json to_json(const SuiteConfig& config);
/// Report as JSON; the wall-clock field is omitted when include_timing is false,
/// which leaves a body that is byte-identical across runs with the same config.
nlohmann::json to_json(const SuiteReport& report, bool include_timing = true);
std::string render_json(const SuiteReport& report, bool include_timing = true);
/// One header line plus one row per check.
std::string render_csv(const SuiteReport& report, bool include_timing = true);

/// Anchor -> check ids, in catalogue order of first appearance.
struct TraceRow {
  std::string anchor;
  std::string suite;
  std::vector<std::string> check_ids;
};
std::vector<TraceRow> trace_matrix();
std::string render_trace_csv(const std::vector<TraceRow>& rows);
nlohmann::json trace_json(const std::vector<TraceRow>& rows);

// --- exports ----------------------------------------------------------------

/// index,t,re,im with t the coordinate along the first grid axis.
void write_grid_function_csv(std::ostream& out, const TestFunction& f);
/// block,index,value
void write_spectrum_csv(std::ostream& out, const std::vector<std::vector<double>>& blocks);
/// alpha,beta,re,im for every entry of a matrix-valued table.
void write_matrix_csv(std::ostream& out, const MatrixXc& m);
/// Coordinate list: a "rows cols nnz" header, then "row col re im" per entry
/// whose modulus exceeds drop_below. Values round-trip exactly.
void write_coordinate_list(std::ostream& out, const MatrixXc& m, double drop_below = 0.0);
MatrixXc read_coordinate_list(std::istream& in);

}  // namespace hpo
