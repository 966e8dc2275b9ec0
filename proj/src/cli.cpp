#include "ptdimer/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "ptdimer/io.hpp"

namespace ptdimer::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.0;
};

Range parse_range(const std::string& text, const char* flag) {
  Range r;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> r.lo >> c1 >> r.hi >> c2 >> r.step) || c1 != ':' || c2 != ':' || !(in >> std::ws).eof())
    throw std::invalid_argument(std::string(flag) + " expects lo:hi:step, got '" + text + "'");
  if (!(r.hi > r.lo) || !(r.step > 0.0))
    throw std::invalid_argument(std::string(flag) + " range is empty");
  return r;
}

struct Options {
  std::string command;
  double v = 1.0;
  double g = 0.0;
  double gamma = 0.0;
  double gamma_j = 0.0;
  double s = 0.0;
  double s_j = 0.0;
  std::string gamma_range;
  std::string g_range;
  double radius = 0.0;
  int steps = 128;
  std::string param = "gamma";
  std::string around;
  std::string out_dir;
  std::string format = "csv";
  std::optional<double> tol;
  std::string seed_grid = "coarse";

  DimerParams params() const {
    DimerParams p;
    p.v = v;
    p.g = g;
    p.gamma = Bicomplex{gamma, gamma_j, 0.0, 0.0};
    p.s = Bicomplex{s, s_j, 0.0, 0.0};
    return p;
  }

  SolveConfig config() const {
    SolveConfig cfg;
    if (tol) cfg.residual_tol = *tol;
    cfg.seed_grid = seed_grid == "fine" ? SeedGrid::fine : SeedGrid::coarse;
    cfg.validate();
    return cfg;
  }

  Range gammas() const {
    return gamma_range.empty() ? Range{0.005, 1.2 * v, 0.01} : parse_range(gamma_range, "--gamma-range");
  }
  Range gs() const { return g_range.empty() ? Range{-2.5, 2.5, 0.1} : parse_range(g_range, "--g-range"); }
};

// Collects artifacts; nothing is written unless --out is given.
class Artifacts {
public:
  explicit Artifacts(const Options& opt) : dir_(opt.out_dir), json_(opt.format == "json") {
    if (!dir_.empty()) fs::create_directories(dir_);
  }
  bool json_format() const { return json_; }

  template <class Writer>
  void csv(const std::string& stem, Writer&& writer) {
    if (dir_.empty()) return;
    std::ofstream f = open(stem + ".csv");
    writer(f);
  }
  void json_file(const std::string& stem, const json& value) {
    if (dir_.empty()) return;
    std::ofstream f = open(stem + ".json");
    f << value.dump(2) << '\n';
  }
  // CSV or JSON depending on --format.
  template <class Writer>
  void table(const std::string& stem, Writer&& writer, const json& as_json) {
    if (json_) json_file(stem, as_json);
    else csv(stem, std::forward<Writer>(writer));
  }
  const std::vector<std::string>& files() const { return files_; }

private:
  std::ofstream open(const std::string& name) {
    const fs::path path = fs::path(dir_) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw fs::filesystem_error("cannot write", path, std::make_error_code(std::errc::permission_denied));
    files_.push_back(path.string());
    return f;
  }
  std::string dir_;
  bool json_;
  std::vector<std::string> files_;
};

GammaScanOptions scan_options(const Options& opt) {
  const Range r = opt.gammas();
  GammaScanOptions scan;
  scan.gamma_lo = r.lo;
  scan.gamma_hi_factor = r.hi / opt.v;
  scan.step = r.step;
  return scan;
}

json states_json(const std::vector<StationaryState>& states) {
  json arr = json::array();
  for (const auto& s : states) arr.push_back(io::to_json(s));
  return arr;
}

json cmd_solve(const Options& opt, Artifacts& art) {
  const DimerParams p = opt.params();
  const auto states = find_all_states(DimerModel{}, p, opt.config());
  const double param = p.get(parse_control_parameter(opt.param)).z0();
  art.table("states", [&](std::ostream& f) { io::write_states_csv(f, param, states); }, states_json(states));
  json mu = json::array();
  int complex_states = 0;
  for (const auto& s : states) {
    mu.push_back(io::to_json(s.mu));
    complex_states += s.is_complex_state;
  }
  return {{"states", states.size()}, {"complex_states", complex_states}, {"mu", mu}};
}

json cmd_sweep(const Options& opt, Artifacts& art) {
  const ControlParameter axis = parse_control_parameter(opt.param);
  if (axis == ControlParameter::s) throw std::invalid_argument("sweeps run over gamma or g");
  const Range used = axis == ControlParameter::gamma ? opt.gammas() : opt.gs();
  const Scenario sc = trace_scenario(DimerModel{}, opt.params(), axis, used.lo, used.hi, used.step, opt.config());
  std::size_t lo = std::numeric_limits<std::size_t>::max(), hi = 0;
  for (std::size_t k = 0; k < sc.grid.size(); ++k) {
    lo = std::min(lo, sc.state_count(k));
    hi = std::max(hi, sc.state_count(k));
  }
  json terminated = json::array();
  for (const auto& b : sc.branches)
    if (b.termination) terminated.push_back({{"branch_id", b.id}, {"param", b.termination_param}, {"reason", *b.termination}});
  if (art.json_format()) {
    json rows = json::array();
    for (double p : sc.grid)
      for (const auto& b : sc.branches)
        if (const auto* sample = b.at(p)) {
          json row = io::to_json(sample->state);
          row["param"] = p;
          row["branch_id"] = b.id;
          rows.push_back(row);
        }
    art.json_file("branches", rows);
  } else {
    art.csv("branches", [&](std::ostream& f) { io::write_branch_csv(f, sc); });
  }
  return {{"param", std::string(to_string(axis))},
          {"grid_points", sc.grid.size()},
          {"branches", sc.branches.size()},
          {"state_count_min", lo},
          {"state_count_max", hi},
          {"terminated", terminated}};
}

json cmd_bifurcations(const Options& opt, Artifacts& art) {
  if (parse_control_parameter(opt.param) != ControlParameter::gamma)
    throw std::invalid_argument("bifurcations scans gamma only");
  const auto summary = analyze_gamma_scenario(DimerModel{}, opt.params(), opt.config(), scan_options(opt));
  json points = json::array();
  for (const auto& bp : summary.all) points.push_back(io::to_json(bp));
  art.table("bifurcations", [&](std::ostream& f) { io::write_bifurcations_csv(f, summary.all); }, points);
  json out = {{"bifurcations", points}};
  out["tangent"] = summary.tangent ? json(summary.tangent->location) : json(nullptr);
  out["pitchfork"] = summary.pitchfork ? json(summary.pitchfork->location) : json(nullptr);
  return out;
}

MergerResult locate_merger(const Options& opt) {
  const Range r = opt.gs();
  MergerOptions mo;
  mo.scan_step = r.step;
  return find_merger(DimerModel{}, opt.v, r.lo, r.hi, opt.config(), mo, scan_options(opt));
}

json cmd_merger(const Options& opt, Artifacts& art) {
  const MergerResult m = locate_merger(opt);
  const json j = io::to_json(m);
  art.table(
      "merger",
      [&](std::ostream& f) {
        f << "g_star,gamma_tangent,gamma_pitchfork,gap,bracket_lo,bracket_hi,evaluations\n";
        f << io::format_double(m.g_star) << ',' << io::format_double(m.gamma_tangent) << ','
          << io::format_double(m.gamma_pitchfork) << ',' << io::format_double(m.gap) << ','
          << io::format_double(m.bracket_lo) << ',' << io::format_double(m.bracket_hi) << ','
          << m.evaluations << '\n';
      },
      j);
  return j;
}

// The loop for --param, centred either on a located bifurcation or on the
// given parameters (tracking every state there).
LoopSpec make_loop(const Options& opt, ControlParameter which, json& center_info) {
  const SolveConfig cfg = opt.config();
  const DimerModel model;
  if (opt.around.empty()) {
    LoopSpec spec;
    spec.center = opt.params();
    spec.which = which;
    // The loop runs around the real part of the chosen parameter.
    spec.center = spec.center.with(which, Bicomplex{spec.center.get(which).z0()});
    spec.radius = opt.radius > 0.0 ? opt.radius : default_radius(spec.center.get(which).z0());
    spec.steps = opt.steps;
    spec.states_to_track = find_all_states(model, spec.center.with(which, spec.value_at(0.0)), cfg);
    center_info = {{"around", "given"}, {"center", spec.center.get(which).z0()}};
    return spec;
  }

  DimerParams base = opt.params();
  if (opt.around == "merger") {
    const MergerResult m = locate_merger(opt);
    base.g = m.g_star;
    center_info["g_star"] = m.g_star;
  }
  const auto summary = analyze_gamma_scenario(model, base, cfg, scan_options(opt));
  std::optional<BifurcationPoint> point;
  std::size_t count = 0;
  if (opt.around == "tangent") {
    point = summary.tangent;
    count = 2;
  }
  if (opt.around == "pitchfork") {
    point = summary.pitchfork;
    count = 3;
  }
  // Where tangent and pitchfork coincide only one merged event is reported;
  // it stands in for either.
  // At the merger the pitchfork triple and the tangent pair share one state.
  if (opt.around == "merger") count = 4;
  if (!point || opt.around == "merger") {
    for (const auto& bp : summary.all)
      if (!point || bp.branch_ids.size() > point->branch_ids.size()) point = bp;
    center_info["merged"] = opt.around != "merger";
  }
  if (!point) throw NoConvergence("no " + opt.around + " bifurcation found to encircle");
  center_info["around"] = opt.around;
  center_info["g"] = base.g.z0();
  center_info["gamma"] = point->location;
  return loop_around(model, base, *point, which, opt.radius, opt.steps, cfg, count);
}

json cmd_encircle(const Options& opt, Artifacts& art) {
  json center;
  const LoopSpec spec = make_loop(opt, parse_control_parameter(opt.param), center);
  const LoopTrace trace = encircle(DimerModel{}, spec, opt.config());
  json j = io::to_json(trace);
  art.table("trace", [&](std::ostream& f) { io::write_trace_csv(f, trace); }, j);
  j["param"] = opt.param;
  j["radius"] = spec.radius;
  j["tracked"] = spec.states_to_track.size();
  j["center"] = center;
  return j;
}

json cmd_classify(const Options& opt, Artifacts& art) {
  std::vector<LoopSpec> specs;
  std::vector<LoopTrace> traces;
  json failures = json::array();
  json center;
  for (ControlParameter which : {ControlParameter::gamma, ControlParameter::g, ControlParameter::s}) {
    const std::string name(to_string(which));
    try {
      LoopSpec spec = make_loop(opt, which, center);
      LoopTrace trace = encircle(DimerModel{}, spec, opt.config());
      art.csv("trace_" + name, [&](std::ostream& f) { io::write_trace_csv(f, trace); });
      specs.push_back(std::move(spec));
      traces.push_back(std::move(trace));
    } catch (const TrackingLost& e) {
      failures.push_back({{"param", name}, {"error", "TrackingLost"}, {"message", e.what()}});
    } catch (const AmbiguousMatch& e) {
      failures.push_back({{"param", name}, {"error", "AmbiguousMatch"}, {"message", e.what()}});
    }
  }
  const EpReport report = classify_ep(DimerModel{}, specs, traces, opt.config());
  json j = io::to_json(report);
  j["failed_traces"] = failures;
  j["center"] = center;
  art.json_file("classify", j);
  return j;
}

json dispatch(const Options& opt, Artifacts& art) {
  if (opt.command == "solve") return cmd_solve(opt, art);
  if (opt.command == "sweep") return cmd_sweep(opt, art);
  if (opt.command == "bifurcations") return cmd_bifurcations(opt, art);
  if (opt.command == "merger") return cmd_merger(opt, art);
  if (opt.command == "encircle") return cmd_encircle(opt, art);
  return cmd_classify(opt, art);
}

void emit(std::ostream& out, json summary) { out << summary.dump() << '\n'; }

int fail(std::ostream& out, std::ostream& err, int code, const std::string& command, const char* error,
         const char* module, const std::string& message) {
  err << message << '\n';
  emit(out, {{"command", command}, {"status", "error"}, {"error", error}, {"module", module}, {"message", message}});
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Stationary states, bifurcations and exceptional points of the continued PT-symmetric dimer"};
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--v", opt.v, "coupling")->check(CLI::PositiveNumber);
  app.add_option("--g", opt.g, "nonlinearity");
  app.add_option("--gamma", opt.gamma, "gain/loss strength");
  app.add_option("--gamma-j", opt.gamma_j, "j component of gamma");
  app.add_option("--s", opt.s, "asymmetry offset");
  app.add_option("--s-j", opt.s_j, "j component of s");
  app.add_option("--gamma-range", opt.gamma_range, "lo:hi:step");
  app.add_option("--g-range", opt.g_range, "lo:hi:step");
  app.add_option("--radius", opt.radius, "loop radius (default 1e-3 * max(1, |center|))");
  app.add_option("--steps", opt.steps, "loop steps")->check(CLI::Range(16, 1 << 20));
  app.add_option("--param", opt.param, "control for sweeps and loops")->check(CLI::IsMember({"gamma", "g", "s"}));
  app.add_option("--around", opt.around, "loop center")->check(CLI::IsMember({"tangent", "pitchfork", "merger"}));
  app.add_option("--out", opt.out_dir, "output directory");
  app.add_option("--format", opt.format, "artifact format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--tol", opt.tol, "Newton residual tolerance")->check(CLI::PositiveNumber);
  app.add_option("--seed-grid", opt.seed_grid, "multistart lattice")->check(CLI::IsMember({"coarse", "fine"}));

  const std::pair<const char*, const char*> commands[] = {
      {"solve", "all continued states at one parameter point"},
      {"sweep", "follow every state over a gamma or g range"},
      {"bifurcations", "locate tangent and pitchfork along gamma"},
      {"merger", "find g where tangent and pitchfork coincide"},
      {"encircle", "track states once around a loop in the j plane"},
      {"classify", "gamma, g and s loops plus a coalescence check"}};
  for (const auto& [name, about] : commands)
    app.add_subcommand(name, about)->callback([&opt, name = name] { opt.command = name; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    return fail(out, err, kUsage, opt.command, "UsageError", "cli", e.what());
  }

  try {
    // Malformed options are usage errors even for commands that ignore them.
    opt.gammas();
    opt.gs();
    opt.config();
    Artifacts art(opt);
    json summary = {{"command", opt.command}, {"status", "ok"}};
    summary.update(dispatch(opt, art));
    summary["files"] = art.files();
    emit(out, summary);
    return kOk;
  } catch (const NoConvergence& e) {
    return fail(out, err, kNumerical, opt.command, "NoConvergence", "solver", e.what());
  } catch (const GaugeDegenerate& e) {
    return fail(out, err, kNumerical, opt.command, "GaugeDegenerate", "solver", e.what());
  } catch (const TrackingLost& e) {
    return fail(out, err, kNumerical, opt.command, "TrackingLost", "ep_analysis", e.what());
  } catch (const AmbiguousMatch& e) {
    return fail(out, err, kNumerical, opt.command, "AmbiguousMatch", "ep_analysis", e.what());
  } catch (const NoMerger& e) {
    return fail(out, err, kNumerical, opt.command, "NoMerger", "continuation", e.what());
  } catch (const BranchTerminated& e) {
    return fail(out, err, kNumerical, opt.command, "BranchTerminated", "continuation", e.what());
  } catch (const std::invalid_argument& e) {
    return fail(out, err, kUsage, opt.command, "UsageError", "cli", e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(out, err, kUsage, opt.command, "UsageError", "cli", e.what());
  }
}

}  // namespace ptdimer::cli
