#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "ptdimer/continuation.hpp"

using namespace ptdimer;

namespace {

DimerParams at_g(double g) {
  DimerParams p;
  p.g = g;
  return p;
}

// The scenarios are the expensive part; share them between test cases.
const Scenario& scenario_at(double g) {
  static std::map<double, Scenario> cache;
  auto it = cache.find(g);
  if (it == cache.end())
    it = cache.emplace(g, trace_scenario(DimerModel{}, at_g(g), ControlParameter::gamma, 0.005, 1.2, 0.01)).first;
  return it->second;
}

const GammaScenarioSummary& summary_at(double g) {
  static std::map<double, GammaScenarioSummary> cache;
  auto it = cache.find(g);
  if (it == cache.end()) it = cache.emplace(g, analyze_gamma_scenario(DimerModel{}, at_g(g))).first;
  return it->second;
}

StationaryState upper_symmetric(double g, double gamma) {
  for (auto s : find_all_states(DimerModel{}, [&] {
         auto p = at_g(g);
         p.gamma = gamma;
         return p;
       }()))
    if (s.is_complex_state && s.is_pt_symmetric && s.mu.z0() > -g / 2) return s;
  throw std::runtime_error("no upper symmetric state");
}

}  // namespace

TEST_CASE("sweep along the linear symmetric branch") {
  const auto seed = upper_symmetric(0.0, 0.05);
  const auto b = sweep_branch(DimerModel{}, at_g(0.0), seed, ControlParameter::gamma, 0.05, 0.95, 0.01);
  CHECK_FALSE(b.termination);
  REQUIRE(b.samples.size() > 80);
  CHECK(b.samples.front().param == 0.05);
  CHECK(b.samples.back().param == doctest::Approx(0.95).epsilon(1e-12));
  double worst = 0;
  for (const auto& s : b.samples) {
    worst = std::max(worst, std::fabs(s.state.mu.z0() - oracle::symmetric_mu(1.0, 0.0, s.param)[1]));
    CHECK(s.state.is_complex_state);
    CHECK(s.state.is_pt_symmetric);
  }
  CHECK(worst < 1e-9);
  CHECK(b.has_complex_sample());
  CHECK(b.at(0.05) != nullptr);
  CHECK(b.at(0.0512345) == nullptr);
  CHECK(b.step.accepted > 0);
}

TEST_CASE("sweep reports where a branch ends") {
  const auto seed = upper_symmetric(-1.0, 0.9);
  const auto b = sweep_branch(DimerModel{}, at_g(-1.0), seed, ControlParameter::gamma, 0.9, 1.2, 0.01, {}, 1e-6);
  // The PT-symmetric state either stops at the tangent or leaves the
  // physical sector there.
  bool physical_beyond = false;
  for (const auto& s : b.samples)
    if (s.param > 1.0 + 1e-6 && s.state.is_complex_state) physical_beyond = true;
  CHECK_FALSE(physical_beyond);
  if (b.termination) CHECK(b.termination_param == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("sweep along g and along s") {
  const auto seed = upper_symmetric(-1.0, 0.3);
  auto p = at_g(-1.0);
  p.gamma = 0.3;
  const auto bg = sweep_branch(DimerModel{}, p, seed, ControlParameter::g, -1.0, 1.0, 0.05);
  CHECK_FALSE(bg.termination);
  for (const auto& s : bg.samples)
    CHECK(std::fabs(s.state.mu.z0() - oracle::symmetric_mu(1.0, s.param, 0.3)[1]) < 1e-9);
  const auto bs = sweep_branch(DimerModel{}, p, seed, ControlParameter::s, 0.0, 0.2, 0.02);
  CHECK_FALSE(bs.termination);
  CHECK(bs.samples.size() >= 11);
}

TEST_CASE("scenario keeps a constant number of states") {
  const auto& sc = scenario_at(-1.0);
  CHECK(sc.grid.front() == 0.005);
  CHECK(sc.grid.back() == doctest::Approx(1.2).epsilon(1e-12));
  for (std::size_t k = 1; k < sc.grid.size(); ++k) CHECK(sc.grid[k] - sc.grid[k - 1] <= 0.01 + 1e-12);
  CHECK(sc.branches.size() == 4);
  for (std::size_t k = 0; k < sc.grid.size(); ++k) CHECK(sc.state_count(k) == 4);
}

TEST_CASE("scenario is closed under PT reflection") {
  const auto& sc = scenario_at(-1.0);
  const DimerModel model;
  std::size_t checked = 0;
  for (std::size_t k = 0; k < sc.grid.size(); k += 7) {
    auto p = sc.base;
    p.gamma = sc.grid[k];
    for (const auto& b : sc.branches) {
      const auto* s = b.at(sc.grid[k]);
      if (!s) continue;
      const auto r = pt_reflect(s->state);
      double best = 1e9;
      for (const auto& c : sc.branches)
        if (const auto* t = c.at(sc.grid[k])) best = std::min(best, state_distance(r, t->state));
      CHECK(best < 1e-7);
      ++checked;
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("tangent and pitchfork at g = -1") {
  const auto& sum = summary_at(-1.0);
  REQUIRE(sum.tangent);
  REQUIRE(sum.pitchfork);
  CHECK(sum.tangent->location == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sum.tangent->branch_ids.size() == 2);
  CHECK(sum.pitchfork->location == doctest::Approx(oracle::pitchfork_gamma(1.0, -1.0)).epsilon(1e-5));
  CHECK(sum.pitchfork->branch_ids.size() == 3);
  CHECK(sum.pitchfork->on_upper_branch);
  CHECK(sum.pitchfork->partners_pt_related);
  CHECK(sum.pitchfork->continuing_branch >= 0);
  const auto gap = signed_merger_gap(sum);
  REQUIRE(gap);
  CHECK(*gap == doctest::Approx(1.0 - oracle::pitchfork_gamma(1.0, -1.0)).epsilon(1e-4));
}

TEST_CASE("pitchfork sits on the lower branch for repulsive coupling") {
  const auto& sum = summary_at(1.0);
  REQUIRE(sum.tangent);
  REQUIRE(sum.pitchfork);
  CHECK(sum.tangent->location == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sum.pitchfork->location == doctest::Approx(oracle::pitchfork_gamma(1.0, 1.0)).epsilon(1e-5));
  CHECK_FALSE(sum.pitchfork->on_upper_branch);
  const auto gap = signed_merger_gap(sum);
  REQUIRE(gap);
  CHECK(*gap < 0);
}

TEST_CASE("tangent location does not depend on the scan step") {
  GammaScanOptions fine;
  fine.step = 0.005;
  const auto a = summary_at(-1.0);
  const auto b = analyze_gamma_scenario(DimerModel{}, at_g(-1.0), {}, fine);
  REQUIRE(a.tangent);
  REQUIRE(b.tangent);
  CHECK(std::fabs(a.tangent->location - b.tangent->location) < 1e-8);
}

TEST_CASE("events coincide at g = 0") {
  const auto& sc = scenario_at(0.0);
  const auto events = detect_bifurcations(DimerModel{}, sc);
  REQUIRE_FALSE(events.empty());
  // At g = 0 tangent and pitchfork coincide at gamma = v.
  for (const auto& e : events) CHECK(e.location == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(to_string(BifurcationKind::tangent) == "tangent");
  CHECK(to_string(BifurcationKind::pitchfork) == "pitchfork");
}

TEST_CASE("pitchfork exists only for weak coupling") {
  const auto map = pitchfork_existence(DimerModel{}, {-2.5, -1.0, 1.5, 2.5}, 1.0);
  CHECK(map.at(-2.5) == false);
  CHECK(map.at(-1.0) == true);
  CHECK(map.at(1.5) == true);
  CHECK(map.at(2.5) == false);
}

TEST_CASE("signed gap without a pitchfork") {
  GammaScenarioSummary empty;
  CHECK_FALSE(signed_merger_gap(empty));
  const auto& far = summary_at(-2.5);
  CHECK(far.tangent);
  CHECK_FALSE(far.pitchfork);
  CHECK_FALSE(signed_merger_gap(far));
}

TEST_CASE("no merger on the attractive side away from g = 0") {
  MergerOptions coarse;
  coarse.scan_step = 0.4;
  CHECK_THROWS_AS(find_merger(DimerModel{}, 1.0, -2.5, -0.1, {}, coarse), NoMerger);
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(trace_scenario(DimerModel{}, at_g(0.0), ControlParameter::gamma, 1.0, 0.5, 0.01),
                  std::invalid_argument);
  CHECK_THROWS_AS(trace_scenario(DimerModel{}, at_g(0.0), ControlParameter::gamma, 0.0, 1.0, 0.0),
                  std::invalid_argument);
}
