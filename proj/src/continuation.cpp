#include "ptdimer/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ptdimer {

namespace {

constexpr double kNewBranchSeparation = 1e-4;

Eigen::VectorXd aligned(const StationaryState& s) { return pack_state(gauge_align(s)); }

StationaryState seed_from(const Eigen::VectorXd& x) { return unpack_state(x); }

// Secant extrapolation of the gauge-aligned vectors to `p`.
StationaryState predict(const BranchSample* older, const BranchSample& last, double p) {
  if (older == nullptr || older->param == last.param) return last.state;
  const Eigen::VectorXd x1 = aligned(last.state);
  const Eigen::VectorXd x0 = aligned(older->state);
  return seed_from(x1 + (x1 - x0) * ((p - last.param) / (last.param - older->param)));
}

double slope_estimate(const Branch& b) {
  const auto n = b.samples.size();
  if (n < 2) return 0.0;
  const auto& s1 = b.samples[n - 1];
  const auto& s0 = b.samples[n - 2];
  return state_distance(s1.state, s0.state) / std::fabs(s1.param - s0.param);
}

std::optional<StationaryState> try_solve(const ContinuedSystem& system, const DimerParams& params,
                                         const StationaryState& seed, const SolveConfig& cfg) {
  try {
    return newton_solve(system, params, seed, cfg);
  } catch (const NoConvergence&) {
  } catch (const GaugeDegenerate&) {
  }
  return std::nullopt;
}

struct Assignment {
  std::vector<int> state_of_branch;  // -1 when unmatched
  std::vector<int> branch_of_state;
};

// Greedy matching on ascending distance.
Assignment greedy_match(const std::vector<StationaryState>& predictions,
                        const std::vector<StationaryState>& states) {
  struct Pair {
    double d;
    int b;
    int s;
  };
  std::vector<Pair> pairs;
  for (int b = 0; b < static_cast<int>(predictions.size()); ++b)
    for (int s = 0; s < static_cast<int>(states.size()); ++s)
      pairs.push_back({state_distance(predictions[b], states[s]), b, s});
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.d < y.d; });
  Assignment a{std::vector<int>(predictions.size(), -1), std::vector<int>(states.size(), -1)};
  for (const auto& p : pairs) {
    if (a.state_of_branch[p.b] >= 0 || a.branch_of_state[p.s] >= 0) continue;
    a.state_of_branch[p.b] = p.s;
    a.branch_of_state[p.s] = p.b;
  }
  return a;
}

// Index of a branch sample at grid index k, or -1.
struct GridView {
  const Scenario& sc;
  std::vector<std::ptrdiff_t> offset;

  explicit GridView(const Scenario& s) : sc(s) {
    for (const auto& b : sc.branches) {
      auto it = std::find(sc.grid.begin(), sc.grid.end(), b.samples.front().param);
      offset.push_back(it - sc.grid.begin());
    }
  }
  const StationaryState* state(std::size_t branch, std::ptrdiff_t k) const {
    const auto idx = k - offset[branch];
    const auto& samples = sc.branches[branch].samples;
    if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(samples.size())) return nullptr;
    return &samples[static_cast<std::size_t>(idx)].state;
  }
};

struct PairEvent {
  double location = 0.0;
  double distance = 0.0;
  StationaryState midpoint;
  int a = -1;
  int b = -1;
  std::ptrdiff_t grid_index = 0;
};

StationaryState midpoint(const StationaryState& a, const StationaryState& b) {
  StationaryState m = seed_from(0.5 * (aligned(a) + aligned(b)));
  classify(m);
  return m;
}

// Walks two states towards the parameter where they coalesce. The squared
// distance of two branches meeting at a square-root branch point is linear
// in the parameter, so each step extrapolates it to zero and moves part of
// the way there.
std::optional<PairEvent> approach_coalescence(const ContinuedSystem& system, const DimerParams& base,
                                              ControlParameter axis, double q0, StationaryState a0,
                                              StationaryState b0, double q1, StationaryState a1,
                                              StationaryState b1, double window_lo,
                                              double window_hi, const SolveConfig& cfg,
                                              const DetectionOptions& opt) {
  double d0 = state_distance(a0, b0);
  double d1 = state_distance(a1, b1);
  if (!(d0 > d1)) return std::nullopt;
  double fraction = 0.8;
  for (int it = 0; it < 400; ++it) {
    const double estimate = q1 + d1 * d1 * (q1 - q0) / (d0 * d0 - d1 * d1);
    if (estimate < window_lo || estimate > window_hi) return std::nullopt;
    if (std::fabs(estimate - q1) < opt.locate_tol || d1 < 1e-7) {
      if (d1 >= opt.coalescence_tol) return std::nullopt;
      return PairEvent{estimate, d1, midpoint(a1, b1)};
    }
    if (fraction < 1e-4) break;
    const double q2 = q1 + fraction * (estimate - q1);
    const DimerParams p2 = base.with(axis, Bicomplex{q2});
    auto a2 = try_solve(system, p2, a1, cfg);
    auto b2 = try_solve(system, p2, b1, cfg);
    if (!a2 || !b2) {
      fraction *= 0.5;
      continue;
    }
    const double d2 = state_distance(*a2, *b2);
    if (!(d2 < d1) || d2 < 1e-9) {
      fraction *= 0.5;
      continue;
    }
    q0 = q1;
    d0 = d1;
    q1 = q2;
    d1 = d2;
    a0 = std::move(a1);
    b0 = std::move(b1);
    a1 = std::move(*a2);
    b1 = std::move(*b2);
    fraction = 0.8;
  }
  // Locator stalled: accept only a pair that is already coalesced.
  if (d1 < opt.coalescence_tol) {
    const double estimate = q1 + d1 * d1 * (q1 - q0) / (d0 * d0 - d1 * d1);
    return PairEvent{estimate, d1, midpoint(a1, b1)};
  }
  return std::nullopt;
}

double re_mu(const StationaryState& s) { return real_imag_parts(s.mu).first.z0(); }

}  // namespace

bool Branch::has_complex_sample() const {
  return std::any_of(samples.begin(), samples.end(),
                     [](const BranchSample& s) { return s.state.is_complex_state; });
}

const BranchSample* Branch::at(double param) const {
  for (const auto& s : samples)
    if (s.param == param) return &s;
  return nullptr;
}

Branch sweep_branch(const ContinuedSystem& system, const DimerParams& params,
                    const StationaryState& seed, ControlParameter axis, double start, double stop,
                    double initial_step, const SolveConfig& cfg, double min_step) {
  if (!(initial_step > 0.0)) throw std::invalid_argument("initial_step must be positive");
  Branch branch;
  branch.axis = axis;
  branch.step.initial_step = initial_step;
  branch.step.min_step = min_step;

  auto first = try_solve(system, params.with(axis, Bicomplex{start}), seed, cfg);
  if (!first) throw BranchTerminated(start, "seed does not solve at the start of the range");
  branch.samples.push_back({start, *first});

  const double dir = stop >= start ? 1.0 : -1.0;
  double h = initial_step;
  double p = start;
  int streak = 0;
  while (dir * (stop - p) > 0.0) {
    const double h_eff = std::min(h, std::fabs(stop - p));
    const double next = (h_eff == std::fabs(stop - p)) ? stop : p + dir * h_eff;
    const auto n = branch.samples.size();
    const BranchSample* older = n >= 2 ? &branch.samples[n - 2] : nullptr;
    const StationaryState guess = predict(older, branch.samples.back(), next);

    auto solved = try_solve(system, params.with(axis, Bicomplex{next}), guess, cfg);
    bool ok = solved.has_value();
    if (ok && n >= 2) {
      const double bound = 10.0 * h_eff * std::max(slope_estimate(branch), 1.0);
      ok = state_distance(*solved, branch.samples.back().state) < bound;
    }
    if (ok) {
      branch.samples.push_back({next, std::move(*solved)});
      p = next;
      ++branch.step.accepted;
      if (++streak >= 3) {
        h = std::min(1.5 * h, initial_step);
        streak = 0;
      }
    } else {
      ++branch.step.rejected;
      streak = 0;
      h *= 0.5;
      if (h < min_step) {
        branch.termination = "step size underflow (fold or branch point)";
        branch.termination_param = p;
        break;
      }
    }
    branch.step.current_step = h;
  }
  return branch;
}

std::size_t Scenario::state_count(std::size_t k) const {
  const GridView view(*this);
  std::size_t count = 0;
  for (std::size_t b = 0; b < branches.size(); ++b)
    if (view.state(b, static_cast<std::ptrdiff_t>(k)) != nullptr) ++count;
  return count;
}

Scenario trace_scenario(const ContinuedSystem& system, const DimerParams& params,
                        ControlParameter axis, double lo, double hi, double step,
                        const SolveConfig& cfg, const ScenarioOptions& options) {
  if (!(step > 0.0) || !(hi > lo)) throw std::invalid_argument("empty parameter range");
  Scenario sc;
  sc.axis = axis;
  sc.base = params;
  const auto intervals = static_cast<std::size_t>(std::llround(std::ceil((hi - lo) / step - 1e-9)));
  for (std::size_t k = 0; k <= intervals; ++k)
    sc.grid.push_back(k == intervals ? hi : lo + static_cast<double>(k) * step);

  auto start_branch = [&](double p, StationaryState s) {
    Branch b;
    b.id = static_cast<int>(sc.branches.size());
    b.axis = axis;
    b.step.initial_step = step;
    b.step.current_step = step;
    b.samples.push_back({p, std::move(s)});
    sc.branches.push_back(std::move(b));
  };

  for (auto& s : find_all_states(system, params.with(axis, Bicomplex{sc.grid[0]}), cfg))
    start_branch(sc.grid[0], std::move(s));

  std::vector<std::size_t> active(sc.branches.size());
  std::iota(active.begin(), active.end(), 0);

  for (std::size_t k = 1; k < sc.grid.size(); ++k) {
    const double p = sc.grid[k];
    const DimerParams at = params.with(axis, Bicomplex{p});

    std::vector<StationaryState> predictions;
    std::vector<std::optional<StationaryState>> results;
    bool clean = true;
    for (auto b : active) {
      const auto& samples = sc.branches[b].samples;
      const BranchSample* older = samples.size() >= 2 ? &samples[samples.size() - 2] : nullptr;
      predictions.push_back(predict(older, samples.back(), p));
      results.push_back(try_solve(system, at, predictions.back(), cfg));
      if (!results.back()) clean = false;
    }
    // Each continued state must be nearest to its own prediction, and no two
    // branches may land on the same state.
    for (std::size_t i = 0; clean && i < results.size(); ++i) {
      const double own = state_distance(*results[i], predictions[i]);
      for (std::size_t j = 0; j < results.size(); ++j) {
        if (i == j) continue;
        if (state_distance(*results[i], *results[j]) < 10.0 * cfg.dedup_tol ||
            state_distance(*results[i], predictions[j]) < own) {
          clean = false;
          break;
        }
      }
    }
    const bool refresh = options.refresh_every > 0 && k % static_cast<std::size_t>(options.refresh_every) == 0;

    if (clean && !refresh) {
      for (std::size_t i = 0; i < active.size(); ++i)
        sc.branches[active[i]].samples.push_back({p, std::move(*results[i])});
      continue;
    }

    std::vector<StationaryState> states = find_all_states(system, at, cfg);
    for (auto& r : results)
      if (r) insert_unique(states, *r, cfg.dedup_tol);
    sort_states(states);
    const Assignment match = greedy_match(predictions, states);
    std::vector<std::size_t> next_active;
    for (std::size_t i = 0; i < active.size(); ++i) {
      const int s = match.state_of_branch[i];
      Branch& branch = sc.branches[active[i]];
      if (s < 0 && results[i]) {
        // Exactly at a coalescence two branches end on one state. Share it
        // when the branch's own corrector lands there and nothing else is free.
        const bool all_taken = std::all_of(match.branch_of_state.begin(), match.branch_of_state.end(),
                                           [](int b) { return b >= 0; });
        for (std::size_t t = 0; all_taken && t < states.size(); ++t)
          if (state_distance(*results[i], states[t]) < 10.0 * cfg.dedup_tol) {
            branch.samples.push_back({p, states[t]});
            next_active.push_back(active[i]);
            break;
          }
        if (!next_active.empty() && next_active.back() == active[i]) continue;
      }
      if (s < 0) {
        branch.termination = "no continued state left to match";
        branch.termination_param = branch.samples.back().param;
        continue;
      }
      branch.samples.push_back({p, states[static_cast<std::size_t>(s)]});
      next_active.push_back(active[i]);
    }
    // Near a coalescence the multistart can return one state several times
    // with spread well above dedup_tol; only clearly separate states start
    // new branches.
    std::vector<std::size_t> taken;
    for (std::size_t s = 0; s < states.size(); ++s)
      if (match.branch_of_state[s] >= 0) taken.push_back(s);
    for (std::size_t s = 0; s < states.size(); ++s) {
      if (match.branch_of_state[s] >= 0) continue;
      const bool near_known = std::any_of(taken.begin(), taken.end(), [&](std::size_t t) {
        return state_distance(states[s], states[t]) < kNewBranchSeparation;
      });
      if (near_known) continue;
      taken.push_back(s);
      start_branch(p, states[s]);
      next_active.push_back(sc.branches.size() - 1);
    }
    active = std::move(next_active);
  }
  return sc;
}

std::string_view to_string(BifurcationKind kind) {
  switch (kind) {
    case BifurcationKind::tangent: return "tangent";
    case BifurcationKind::pitchfork: return "pitchfork";
    case BifurcationKind::unclassified: return "unclassified";
  }
  return "?";
}

std::vector<BifurcationPoint> detect_bifurcations(const ContinuedSystem& system,
                                                  const Scenario& scenario, const SolveConfig& cfg,
                                                  const DetectionOptions& options) {
  const GridView view(scenario);
  const auto n_grid = static_cast<std::ptrdiff_t>(scenario.grid.size());
  std::vector<std::size_t> selected;
  for (std::size_t b = 0; b < scenario.branches.size(); ++b)
    if (!options.physical_only || scenario.branches[b].has_complex_sample()) selected.push_back(b);

  std::vector<PairEvent> pair_events;
  for (std::size_t x = 0; x < selected.size(); ++x) {
    for (std::size_t y = x + 1; y < selected.size(); ++y) {
      const std::size_t a = selected[x];
      const std::size_t b = selected[y];
      std::vector<double> d(static_cast<std::size_t>(n_grid), std::numeric_limits<double>::quiet_NaN());
      for (std::ptrdiff_t k = 0; k < n_grid; ++k) {
        const auto* sa = view.state(a, k);
        const auto* sb = view.state(b, k);
        if (sa && sb) d[static_cast<std::size_t>(k)] = state_distance(*sa, *sb);
      }
      for (std::ptrdiff_t k = 1; k + 1 < n_grid; ++k) {
        const double dl = d[static_cast<std::size_t>(k - 1)];
        const double dk = d[static_cast<std::size_t>(k)];
        const double dr = d[static_cast<std::size_t>(k + 1)];
        if (std::isnan(dl) || std::isnan(dk) || std::isnan(dr)) continue;
        if (!(dk <= dl && dk <= dr)) continue;
        // The meeting point lies on the side of the smaller neighbour; approach
        // it from the opposite side so both support points sit on one side.
        const std::ptrdiff_t far = dr < dl ? k - 1 : k + 1;
        const double p_far = scenario.grid[static_cast<std::size_t>(far)];
        const double p_k = scenario.grid[static_cast<std::size_t>(k)];
        const double p_near = scenario.grid[static_cast<std::size_t>(2 * k - far)];
        const double margin = 0.1 * std::fabs(p_k - p_far);
        auto ev = approach_coalescence(system, scenario.base, scenario.axis, p_far, *view.state(a, far),
                                       *view.state(b, far), p_k, *view.state(a, k), *view.state(b, k),
                                       std::min(p_k, p_near) - margin, std::max(p_k, p_near) + margin,
                                       cfg, options);
        if (!ev) continue;
        ev->a = static_cast<int>(a);
        ev->b = static_cast<int>(b);
        ev->grid_index = k;
        pair_events.push_back(std::move(*ev));
      }
    }
  }

  // Group pair events that share location and coalesced state.
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t e = 0; e < pair_events.size(); ++e) {
    bool placed = false;
    for (auto& g : groups) {
      const auto& ref = pair_events[g.front()];
      if (std::fabs(ref.location - pair_events[e].location) < options.merge_tol &&
          state_distance(ref.midpoint, pair_events[e].midpoint) < 1e-2) {
        g.push_back(e);
        placed = true;
        break;
      }
    }
    if (!placed) groups.push_back({e});
  }

  std::vector<BifurcationPoint> points;
  for (const auto& g : groups) {
    BifurcationPoint bp;
    std::vector<int> ids;
    double loc = 0.0;
    for (auto e : g) {
      ids.push_back(pair_events[e].a);
      ids.push_back(pair_events[e].b);
      loc += pair_events[e].location;
      bp.detection_residual = std::max(bp.detection_residual, pair_events[e].distance);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    bp.branch_ids = ids;
    bp.location = loc / static_cast<double>(g.size());
    bp.coalesced = pair_events[g.front()].midpoint;
    const std::ptrdiff_t k = pair_events[g.front()].grid_index;

    if (ids.size() == 2) {
      bp.kind = BifurcationKind::tangent;
    } else if (ids.size() == 3) {
      // Partners: the pair furthest apart next to the point.
      double widest = -1.0;
      int pa = -1, pb = -1;
      for (std::size_t x = 0; x < 3; ++x)
        for (std::size_t y = x + 1; y < 3; ++y) {
          const auto* sa = view.state(static_cast<std::size_t>(ids[x]), k);
          const auto* sb = view.state(static_cast<std::size_t>(ids[y]), k);
          if (!sa || !sb) continue;
          const double dist = state_distance(*sa, *sb);
          if (dist > widest) {
            widest = dist;
            pa = ids[x];
            pb = ids[y];
          }
        }
      if (pa >= 0) {
        bp.kind = BifurcationKind::pitchfork;
        for (int id : ids)
          if (id != pa && id != pb) bp.continuing_branch = id;
        const auto* sa = view.state(static_cast<std::size_t>(pa), k);
        const auto* sb = view.state(static_cast<std::size_t>(pb), k);
        bp.partners_pt_related = state_distance(pt_reflect(*sa), *sb) < 1e-6;
        // Upper/lower: compare with the other PT-symmetric physical states here.
        bool upper = true;
        for (std::size_t b = 0; b < scenario.branches.size(); ++b) {
          const auto* s = view.state(b, k);
          if (!s || !s->is_complex_state || !s->is_pt_symmetric) continue;
          if (std::find(ids.begin(), ids.end(), static_cast<int>(b)) != ids.end()) continue;
          if (re_mu(*s) > re_mu(bp.coalesced)) upper = false;
        }
        bp.on_upper_branch = upper;
      }
    }
    points.push_back(std::move(bp));
  }
  std::sort(points.begin(), points.end(),
            [](const BifurcationPoint& a, const BifurcationPoint& b) { return a.location < b.location; });
  return points;
}

namespace {

// Events of one grid scan, each re-traced on a finer window around itself so
// that neighbouring events closer than the grid spacing separate.
void refine_events(const ContinuedSystem& system, const DimerParams& params, const SolveConfig& cfg,
                   double lo, double hi, double step, int depth, std::vector<BifurcationPoint>& out) {
  const Scenario sc = trace_scenario(system, params, ControlParameter::gamma, lo, hi, step, cfg);
  const auto found = detect_bifurcations(system, sc, cfg);

  // A scan that shows one tangent and one pitchfork well apart needs no
  // closer look.
  const auto count = [&](BifurcationKind kind) {
    return std::count_if(found.begin(), found.end(), [&](const BifurcationPoint& b) { return b.kind == kind; });
  };
  bool settled = depth >= 2;
  if (!settled && found.size() == 2 && count(BifurcationKind::tangent) == 1 &&
      count(BifurcationKind::pitchfork) == 1)
    settled = std::fabs(found[0].location - found[1].location) > 4.0 * step;

  for (const auto& bp : found) {
    if (settled) {
      out.push_back(bp);
      continue;
    }
    // Off-centre window so the fine grid does not land on the event itself.
    const double w_lo = std::max(lo, bp.location - 2.037 * step);
    const double w_hi = std::min(hi, bp.location + 1.963 * step);
    std::vector<BifurcationPoint> sub;
    refine_events(system, params, cfg, w_lo, w_hi, step / 25.0, depth + 1, sub);
    if (sub.empty()) sub.push_back(bp);
    // The same event seen from overlapping windows, possibly with fewer
    // participants: keep the fullest view.
    for (auto& e : sub) {
      auto same = std::find_if(out.begin(), out.end(), [&](const BifurcationPoint& o) {
        return std::fabs(o.location - e.location) < 1e-7;
      });
      if (same == out.end())
        out.push_back(std::move(e));
      else if (e.branch_ids.size() > same->branch_ids.size())
        *same = std::move(e);
    }
  }
}

}  // namespace

GammaScenarioSummary analyze_gamma_scenario(const ContinuedSystem& system, const DimerParams& params,
                                            const SolveConfig& cfg, const GammaScanOptions& scan) {
  GammaScenarioSummary out;
  refine_events(system, params, cfg, scan.gamma_lo, scan.gamma_hi_factor * params.v, scan.step, 0, out.all);
  std::sort(out.all.begin(), out.all.end(),
            [](const BifurcationPoint& a, const BifurcationPoint& b) { return a.location < b.location; });
  for (const auto& bp : out.all) {
    if (bp.kind == BifurcationKind::tangent && !out.tangent) out.tangent = bp;
    if (bp.kind == BifurcationKind::pitchfork && !out.pitchfork) out.pitchfork = bp;
  }
  return out;
}

std::map<double, bool> pitchfork_existence(const ContinuedSystem& system,
                                           const std::vector<double>& g_values, double v,
                                           const SolveConfig& cfg, const GammaScanOptions& scan) {
  std::map<double, bool> out;
  for (double g : g_values) {
    DimerParams p;
    p.v = v;
    p.g = g;
    const auto summary = analyze_gamma_scenario(system, p, cfg, scan);
    bool found = false;
    for (const auto& bp : summary.all)
      if (bp.kind == BifurcationKind::pitchfork && bp.location > 0.0 && bp.location <= v + 1e-9)
        found = true;
    out[g] = found;
  }
  return out;
}

std::optional<double> signed_merger_gap(const GammaScenarioSummary& summary) {
  if (!summary.tangent || !summary.pitchfork) return std::nullopt;
  const double gap = summary.tangent->location - summary.pitchfork->location;
  return summary.pitchfork->on_upper_branch ? gap : -gap;
}

MergerResult find_merger(const ContinuedSystem& system, double v, double g_lo, double g_hi,
                         const SolveConfig& cfg, const MergerOptions& options,
                         const GammaScanOptions& scan) {
  if (!(g_hi > g_lo)) throw std::invalid_argument("empty g interval");
  MergerResult result;

  struct Eval {
    std::optional<double> gap;
    GammaScenarioSummary summary;
    // Tangent and pitchfork closer than the refinement can separate: only one
    // of them is reported.
    bool unresolved = false;
  };
  auto evaluate = [&](double g) {
    DimerParams p;
    p.v = v;
    p.g = g;
    Eval e;
    e.summary = analyze_gamma_scenario(system, p, cfg, scan);
    e.gap = signed_merger_gap(e.summary);
    e.unresolved = !e.gap && (e.summary.tangent || e.summary.pitchfork);
    ++result.evaluations;
    return e;
  };

  const auto n = static_cast<int>(std::ceil((g_hi - g_lo) / options.scan_step - 1e-9));
  std::optional<std::pair<double, double>> prev;  // (g, gap)
  std::optional<std::pair<double, double>> bracket_lo, bracket_hi;
  for (int k = 0; k <= n && !bracket_lo; ++k) {
    const double g = k == n ? g_hi : g_lo + k * options.scan_step;
    const Eval e = evaluate(g);
    if (!e.gap) continue;
    if (prev && (prev->second > 0.0) != (*e.gap > 0.0)) {
      bracket_lo = prev;
      bracket_hi = std::make_pair(g, *e.gap);
    }
    prev = std::make_pair(g, *e.gap);
  }
  if (!bracket_lo) throw NoMerger("signed tangent-pitchfork gap keeps its sign on the scanned g interval");

  auto [a, gap_a] = *bracket_lo;
  double b = bracket_hi->first;
  double g_mid = 0.5 * (a + b);
  Eval mid;
  while (true) {
    g_mid = 0.5 * (a + b);
    mid = evaluate(g_mid);
    if (mid.unresolved || (mid.gap && std::fabs(*mid.gap) < options.gap_tol) || (b - a) < options.g_tol)
      break;
    if (!mid.gap) throw NoMerger("bifurcations lost inside the bracket at g = " + std::to_string(g_mid));
    if ((*mid.gap > 0.0) == (gap_a > 0.0)) {
      a = g_mid;
      gap_a = *mid.gap;
    } else {
      b = g_mid;
    }
  }
  result.g_star = g_mid;
  result.bracket_lo = a;
  result.bracket_hi = b;
  if (mid.summary.tangent) result.gamma_tangent = mid.summary.tangent->location;
  if (mid.summary.pitchfork) result.gamma_pitchfork = mid.summary.pitchfork->location;
  if (mid.gap) {
    result.gap = std::fabs(*mid.gap);
  } else {
    // Collapsed into one reported event: use its location for both.
    const auto& one = mid.summary.tangent ? *mid.summary.tangent : *mid.summary.pitchfork;
    result.gamma_tangent = result.gamma_pitchfork = one.location;
    result.gap = 0.0;
  }
  return result;
}

}  // namespace ptdimer
