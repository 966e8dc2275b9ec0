#include "ptdimer/io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ptdimer::io {

namespace {

void write_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << cells[i];
  }
  out << '\n';
}

void append_components(std::vector<std::string>& row, const Bicomplex& z) {
  for (int c = 0; c < 4; ++c) row.push_back(format_double(z[c]));
}

void append_names(std::vector<std::string>& cols, const std::string& stem) {
  for (int c = 0; c < 4; ++c) cols.push_back(stem + "_" + std::to_string(c));
}

}  // namespace

std::string format_double(double x) {
  // -0 and 0 must not differ between otherwise identical runs.
  if (x == 0.0) x = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

nlohmann::json to_json(const Bicomplex& z) { return {z.z0(), z.z1(), z.z2(), z.z3()}; }

nlohmann::json to_json(const StationaryState& s) {
  nlohmann::json psi = nlohmann::json::array();
  for (const auto& p : s.psi) psi.push_back(to_json(p));
  const auto [re, im] = real_imag_parts(s.mu);
  return {{"psi", psi},
          {"mu", to_json(s.mu)},
          {"re_mu", {re.z0(), re.z2()}},
          {"im_mu", {im.z0(), im.z2()}},
          {"residual_norm", s.residual_norm},
          {"is_complex_state", s.is_complex_state},
          {"is_pt_symmetric", s.is_pt_symmetric}};
}

nlohmann::json to_json(const BifurcationPoint& bp) {
  nlohmann::json j = {{"kind", std::string(to_string(bp.kind))},
                      {"location", bp.location},
                      {"branch_ids", bp.branch_ids},
                      {"detection_residual", bp.detection_residual},
                      {"mu", to_json(bp.coalesced.mu)}};
  if (bp.kind == BifurcationKind::pitchfork) {
    j["continuing_branch"] = bp.continuing_branch;
    j["on_upper_branch"] = bp.on_upper_branch;
    j["partners_pt_related"] = bp.partners_pt_related;
  }
  return j;
}

nlohmann::json to_json(const LoopTrace& trace) {
  return {{"permutation", trace.permutation},
          {"cycle_type", trace.cycle_type},
          {"match_margin", trace.match_margin},
          {"steps", trace.steps_used},
          {"halvings", trace.halvings}};
}

nlohmann::json to_json(const EpReport& report) {
  nlohmann::json traces = nlohmann::json::array();
  for (const auto& t : report.traces)
    traces.push_back({{"param", std::string(to_string(t.which))},
                      {"cycle_type", t.cycle_type},
                      {"match_margin", t.match_margin}});
  return {{"traces", traces},
          {"max_cycle_length", report.max_cycle_length},
          {"coalesced", report.coalesced},
          {"coalescence_distance", report.coalescence_distance},
          {"verdict", report.verdict}};
}

nlohmann::json to_json(const MergerResult& m) {
  return {{"g_star", m.g_star},
          {"gamma_tangent", m.gamma_tangent},
          {"gamma_pitchfork", m.gamma_pitchfork},
          {"gap", m.gap},
          {"bracket", {m.bracket_lo, m.bracket_hi}},
          {"evaluations", m.evaluations}};
}

std::vector<std::string> branch_csv_columns() {
  std::vector<std::string> cols{"param", "branch_id"};
  append_names(cols, "psi1");
  append_names(cols, "psi2");
  append_names(cols, "mu");
  for (const char* c : {"re_mu_0", "re_mu_2", "im_mu_0", "im_mu_2", "is_complex_state", "is_pt_symmetric"})
    cols.emplace_back(c);
  return cols;
}

std::vector<std::string> branch_csv_row(double param, int branch_id, const StationaryState& state) {
  const StationaryState s = gauge_align(state);
  std::vector<std::string> row{format_double(param), std::to_string(branch_id)};
  append_components(row, s.psi1());
  append_components(row, s.psi2());
  append_components(row, s.mu);
  const auto [re, im] = real_imag_parts(s.mu);
  for (double x : {re.z0(), re.z2(), im.z0(), im.z2()}) row.push_back(format_double(x));
  row.push_back(state.is_complex_state ? "1" : "0");
  row.push_back(state.is_pt_symmetric ? "1" : "0");
  return row;
}

void write_branch_csv(std::ostream& out, const Scenario& scenario) {
  write_row(out, branch_csv_columns());
  for (double p : scenario.grid)
    for (const auto& b : scenario.branches)
      if (const auto* sample = b.at(p)) write_row(out, branch_csv_row(p, b.id, sample->state));
}

void write_states_csv(std::ostream& out, double param, const std::vector<StationaryState>& states) {
  write_row(out, branch_csv_columns());
  for (std::size_t i = 0; i < states.size(); ++i)
    write_row(out, branch_csv_row(param, static_cast<int>(i), states[i]));
}

void write_trace_csv(std::ostream& out, const LoopTrace& trace) {
  const std::size_t tracks = trace.states.empty() ? 0 : trace.states.front().size();
  std::vector<std::string> header{"phi"};
  for (std::size_t k = 0; k < tracks; ++k) {
    const std::string stem = "mu" + std::to_string(k);
    append_names(header, stem);
    for (const char* part : {"_plus_re", "_plus_im", "_minus_re", "_minus_im"}) header.push_back(stem + part);
  }
  write_row(out, header);
  for (std::size_t n = 0; n < trace.states.size(); ++n) {
    std::vector<std::string> row{format_double(trace.phis[n])};
    for (const auto& s : trace.states[n]) {
      append_components(row, s.mu);
      const auto [plus, minus] = s.mu.to_idempotent();
      for (double x : {plus.real(), plus.imag(), minus.real(), minus.imag()}) row.push_back(format_double(x));
    }
    write_row(out, row);
  }
}

void write_bifurcations_csv(std::ostream& out, const std::vector<BifurcationPoint>& points) {
  std::vector<std::string> header{"kind", "location", "branch_ids", "detection_residual"};
  append_names(header, "mu");
  header.push_back("on_upper_branch");
  write_row(out, header);
  for (const auto& bp : points) {
    std::string ids;
    for (std::size_t i = 0; i < bp.branch_ids.size(); ++i) ids += (i ? ";" : "") + std::to_string(bp.branch_ids[i]);
    std::vector<std::string> row{std::string(to_string(bp.kind)), format_double(bp.location), ids,
                                 format_double(bp.detection_residual)};
    append_components(row, bp.coalesced.mu);
    row.push_back(bp.kind == BifurcationKind::pitchfork ? (bp.on_upper_branch ? "1" : "0") : "");
    write_row(out, row);
  }
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw std::out_of_range("no CSV column " + name);
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::stringstream ss(l);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!l.empty() && l.back() == ',') cells.emplace_back();
    return cells;
  };
  if (std::getline(in, line)) table.header = split(line);
  while (std::getline(in, line))
    if (!line.empty()) table.rows.push_back(split(line));
  return table;
}

}  // namespace ptdimer::io
