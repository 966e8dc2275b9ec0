#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "ptdimer/ep_analysis.hpp"

namespace ptdimer::io {

/// 17 significant digits, so every double reads back exactly.
std::string format_double(double x);

nlohmann::json to_json(const Bicomplex& z);
nlohmann::json to_json(const StationaryState& s);
nlohmann::json to_json(const BifurcationPoint& bp);
nlohmann::json to_json(const LoopTrace& trace);
nlohmann::json to_json(const EpReport& report);
nlohmann::json to_json(const MergerResult& merger);

/// Header of the branch CSV: param, branch_id, psi1_*, psi2_*, mu_*, re_mu_0,
/// re_mu_2, im_mu_0, im_mu_2, is_complex_state, is_pt_symmetric.
std::vector<std::string> branch_csv_columns();

/// One row of the branch CSV. The state is gauge aligned first.
std::vector<std::string> branch_csv_row(double param, int branch_id, const StationaryState& state);

/// All samples of all branches, ordered by grid index and then branch id.
void write_branch_csv(std::ostream& out, const Scenario& scenario);
/// A set of states at one parameter value, numbered in the given order.
void write_states_csv(std::ostream& out, double param, const std::vector<StationaryState>& states);

/// phi, then for each tracked branch k: mu<k>_0..3 and the idempotent parts
/// mu<k>_plus_re, mu<k>_plus_im, mu<k>_minus_re, mu<k>_minus_im.
void write_trace_csv(std::ostream& out, const LoopTrace& trace);

void write_bifurcations_csv(std::ostream& out, const std::vector<BifurcationPoint>& points);

/// Minimal CSV reader for the files written here (no quoting).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t column(const std::string& name) const;
};
CsvTable read_csv(std::istream& in);

}  // namespace ptdimer::io
