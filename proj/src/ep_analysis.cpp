#include "ptdimer/ep_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ptdimer {

namespace {

constexpr int kMaxHalvings = 8;
constexpr double kMarginThreshold = 2.0;

Eigen::VectorXd aligned(const StationaryState& s) { return pack_state(gauge_align(s)); }

// Ratio of the distance to the nearest "wrong" reference over the distance to
// the intended one. Infinite if the intended distance is exactly zero.
double margin_for(const StationaryState& x, const std::vector<StationaryState>& refs, std::size_t own) {
  const double d_own = state_distance(x, refs[own]);
  double d_other = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < refs.size(); ++j)
    if (j != own) d_other = std::min(d_other, state_distance(x, refs[j]));
  if (d_own == 0.0) return std::numeric_limits<double>::infinity();
  return d_other / d_own;
}

struct Tracker {
  const ContinuedSystem& system;
  const LoopSpec& spec;
  const SolveConfig& cfg;

  // One attempted move of every track from `last` to parameter `value`.
  std::optional<std::vector<StationaryState>> step(const std::vector<StationaryState>& older,
                                                   const std::vector<StationaryState>& last, double h,
                                                   double h_prev, const Bicomplex& value,
                                                   double& margin) const {
    const DimerParams at = spec.center.with(spec.which, value);
    std::vector<StationaryState> next;
    for (std::size_t i = 0; i < last.size(); ++i) {
      StationaryState seed = last[i];
      if (!older.empty() && h_prev != 0.0) {
        const Eigen::VectorXd x1 = aligned(last[i]);
        seed = unpack_state(x1 + (x1 - aligned(older[i])) * (h / h_prev));
      }
      try {
        next.push_back(newton_solve(system, at, seed, cfg));
      } catch (const NoConvergence&) {
        return std::nullopt;
      } catch (const GaugeDegenerate&) {
        return std::nullopt;
      }
    }
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < next.size(); ++i) m = std::min(m, margin_for(next[i], last, i));
    if (!(m > kMarginThreshold)) return std::nullopt;
    margin = std::min(margin, m);
    return next;
  }

  LoopTrace run(int steps) const {
    LoopTrace trace;
    trace.steps_used = steps;
    trace.match_margin = std::numeric_limits<double>::infinity();

    const DimerParams start = spec.center.with(spec.which, spec.value_at(0.0));
    std::vector<StationaryState> last;
    for (const auto& s : spec.states_to_track) {
      StationaryState solved;
      try {
        solved = newton_solve(system, start, s, cfg);
      } catch (const std::runtime_error& e) {
        throw TrackingLost(0.0, std::string("starting state does not solve: ") + e.what());
      }
      if (state_distance(solved, s) > 1e-6)
        throw TrackingLost(0.0, "starting state is not a solution at phi = 0");
      // A loop that starts on a coalescence lies in the exceptional set.
      if (jacobian_singularity(system, start, solved, cfg) < kSingularRatio)
        throw TrackingLost(0.0, "starting state sits on an exceptional point");
      last.push_back(std::move(solved));
    }
    trace.phis.push_back(0.0);
    trace.params.push_back(spec.value_at(0.0));
    trace.states.push_back(last);

    const double nominal = spec.orientation * 2.0 * std::numbers::pi / steps;
    const int total = steps * spec.turns;
    std::vector<StationaryState> older;
    double phi = 0.0;
    double h_prev = 0.0;
    for (int n = 1; n <= total; ++n) {
      const double target = n * nominal;
      double h = target - phi;
      int depth = 0;
      while (std::fabs(target - phi) > 1e-15) {
        h = std::copysign(std::min(std::fabs(h), std::fabs(target - phi)), nominal);
        const double next_phi = std::fabs(target - phi - h) < 1e-15 ? target : phi + h;
        auto next = step(older, last, next_phi - phi, h_prev, spec.value_at(next_phi), trace.match_margin);
        if (!next) {
          if (++depth > kMaxHalvings)
            throw TrackingLost(phi, "no unambiguous continuation after " + std::to_string(kMaxHalvings) +
                                        " step halvings");
          ++trace.halvings;
          h *= 0.5;
          continue;
        }
        h_prev = next_phi - phi;
        older = std::move(last);
        last = std::move(*next);
        phi = next_phi;
      }
      trace.phis.push_back(phi);
      trace.params.push_back(spec.value_at(phi));
      trace.states.push_back(last);
    }

    // Final match against the starting states.
    const auto& first = trace.states.front();
    trace.permutation.assign(last.size(), -1);
    for (std::size_t i = 0; i < last.size(); ++i) {
      std::size_t best = 0;
      double d_best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < first.size(); ++j) {
        const double d = state_distance(last[i], first[j]);
        if (d < d_best) {
          d_best = d;
          best = j;
        }
      }
      trace.permutation[i] = static_cast<int>(best);
      trace.match_margin = std::min(trace.match_margin, margin_for(last[i], first, best));
    }
    std::vector<int> sorted = trace.permutation;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) trace.match_margin = 0.0;
    else trace.cycle_type = cycle_type(trace.permutation);
    return trace;
  }
};

}  // namespace

double default_radius(double center_value) { return 1e-3 * std::max(1.0, std::fabs(center_value)); }

void LoopSpec::validate() const {
  if (!(radius > 0.0)) throw std::invalid_argument("loop radius must be positive");
  if (steps < 16) throw std::invalid_argument("loop needs at least 16 steps");
  if (turns < 1) throw std::invalid_argument("loop needs at least one turn");
  if (orientation != 1 && orientation != -1) throw std::invalid_argument("orientation must be +1 or -1");
  if (states_to_track.empty()) throw std::invalid_argument("no states to track");
}

Bicomplex LoopSpec::value_at(double phi) const {
  return center.get(which) + radius * phase_j(phi);
}

std::vector<int> cycle_type(const std::vector<int>& permutation) {
  std::vector<int> lengths;
  std::vector<bool> seen(permutation.size(), false);
  for (std::size_t i = 0; i < permutation.size(); ++i) {
    if (seen[i]) continue;
    int len = 0;
    for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(permutation[j])) {
      seen[j] = true;
      ++len;
    }
    lengths.push_back(len);
  }
  std::sort(lengths.rbegin(), lengths.rend());
  return lengths;
}

std::vector<int> inverse_permutation(const std::vector<int>& permutation) {
  std::vector<int> inv(permutation.size(), -1);
  for (std::size_t i = 0; i < permutation.size(); ++i) {
    const int j = permutation[i];
    if (j < 0 || static_cast<std::size_t>(j) >= permutation.size() || inv[static_cast<std::size_t>(j)] >= 0)
      throw std::invalid_argument("not a permutation");
    inv[static_cast<std::size_t>(j)] = static_cast<int>(i);
  }
  return inv;
}

std::vector<int> compose(const std::vector<int>& first, const std::vector<int>& second) {
  // Track i ends the first loop on start state first[i]; that state ends the
  // second loop on second[first[i]].
  std::vector<int> out(first.size());
  for (std::size_t i = 0; i < first.size(); ++i) out[i] = second.at(static_cast<std::size_t>(first[i]));
  return out;
}

LoopTrace encircle(const ContinuedSystem& system, const LoopSpec& spec, const SolveConfig& cfg) {
  spec.validate();
  cfg.validate();
  const Tracker tracker{system, spec, cfg};
  LoopTrace trace = tracker.run(spec.steps);
  if (trace.match_margin > kMarginThreshold) return trace;
  trace = tracker.run(2 * spec.steps);
  if (trace.match_margin > kMarginThreshold) return trace;
  throw AmbiguousMatch(trace.match_margin);
}

std::vector<StationaryState> participating_states(const ContinuedSystem& system,
                                                  const DimerParams& params,
                                                  const StationaryState& reference, std::size_t count,
                                                  const SolveConfig& cfg) {
  std::vector<StationaryState> all = find_all_states(system, params, cfg);
  if (all.size() <= count) return all;
  const auto dist = [&](const StationaryState& x) { return state_distance(x, reference); };
  std::stable_sort(all.begin(), all.end(),
                   [&](const StationaryState& a, const StationaryState& b) { return dist(a) < dist(b); });
  // Complex states are preferred among the states comparably close to the
  // reference, never over a clearly closer continued one.
  const double cutoff = 3.0 * dist(all[count - 1]);
  const auto near_end = std::find_if(all.begin(), all.end(), [&](const StationaryState& x) { return dist(x) > cutoff; });
  std::stable_partition(all.begin(), near_end, [](const StationaryState& x) { return x.is_complex_state; });
  all.resize(count);
  return all;
}

LoopSpec loop_around(const ContinuedSystem& system, const DimerParams& base, const BifurcationPoint& point,
                     ControlParameter which, double radius, int steps, const SolveConfig& cfg,
                     std::size_t count) {
  LoopSpec spec;
  spec.center = base.with(ControlParameter::gamma, Bicomplex{point.location});
  spec.which = which;
  spec.radius = radius > 0.0 ? radius : default_radius(spec.center.get(which).z0());
  spec.steps = steps;
  const DimerParams start = spec.center.with(which, spec.value_at(0.0));
  spec.states_to_track =
      participating_states(system, start, point.coalesced, count ? count : point.branch_ids.size(), cfg);
  return spec;
}

EpReport classify_ep(const ContinuedSystem& system, const std::vector<LoopSpec>& specs,
                     const std::vector<LoopTrace>& traces, const SolveConfig& cfg,
                     const ClassifyOptions& options) {
  if (specs.size() != traces.size()) throw std::invalid_argument("one spec per trace required");
  EpReport report;
  for (std::size_t t = 0; t < traces.size(); ++t) {
    report.traces.push_back({specs[t].which, traces[t].cycle_type, traces[t].match_margin});
    for (int len : traces[t].cycle_type) report.max_cycle_length = std::max(report.max_cycle_length, len);
  }
  if (specs.empty()) {
    report.verdict = "no traces";
    return report;
  }

  // Radial approach of the first loop's starting states into the center.
  const LoopSpec& spec = specs.front();
  const Bicomplex c = spec.center.get(spec.which);
  std::vector<StationaryState> current = traces.front().states.front();
  for (int h = 1; h <= options.radial_halvings + 1; ++h) {
    const double t = h <= options.radial_halvings ? std::ldexp(1.0, -h) : 0.0;
    const DimerParams at = spec.center.with(spec.which, c + Bicomplex{spec.radius * t});
    std::vector<StationaryState> next;
    try {
      for (const auto& s : current) next.push_back(newton_solve(system, at, s, cfg));
    } catch (const std::runtime_error&) {
      break;
    }
    current = std::move(next);
  }
  for (std::size_t a = 0; a < current.size(); ++a)
    for (std::size_t b = a + 1; b < current.size(); ++b)
      report.coalescence_distance = std::max(report.coalescence_distance, state_distance(current[a], current[b]));
  report.coalesced = report.coalescence_distance < options.coalescence_tol;

  const int n = report.max_cycle_length;
  if (n < 2) {
    report.verdict = "no exchange observed";
  } else {
    report.verdict = "EP order >= " + std::to_string(n);
    if (report.coalesced && static_cast<std::size_t>(n) == current.size())
      report.verdict += ", consistent with EP" + std::to_string(n);
    else if (!report.coalesced)
      report.verdict += ", tracked states do not coalesce";
  }
  return report;
}

}  // namespace ptdimer
