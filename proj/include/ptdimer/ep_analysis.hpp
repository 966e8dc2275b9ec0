#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptdimer/continuation.hpp"

namespace ptdimer {

class TrackingLost : public std::runtime_error {
public:
  TrackingLost(double phi, const std::string& reason)
      : std::runtime_error("TrackingLost at phi = " + std::to_string(phi) + ": " + reason), phi_(phi) {}
  double phi() const { return phi_; }

private:
  double phi_;
};

class AmbiguousMatch : public std::runtime_error {
public:
  explicit AmbiguousMatch(double margin)
      : std::runtime_error("AmbiguousMatch: match margin " + std::to_string(margin) + " <= 2"),
        margin_(margin) {}
  double margin() const { return margin_; }

private:
  double margin_;
};

/// Radii used around critical points in practice.
inline constexpr std::array<double, 3> kRadiusPresets{1e-3, 2e-3, 1e-4};

/// 1e-3 * max(1, |center value|).
double default_radius(double center_value);

/// A closed loop  which = c + r e^{j phi}  around the real value c stored in
/// center.get(which). Tracking starts at phi = 0.
struct LoopSpec {
  DimerParams center;
  ControlParameter which = ControlParameter::gamma;
  double radius = 1e-3;
  int steps = 128;
  std::vector<StationaryState> states_to_track;
  /// Number of full traversals.
  int turns = 1;
  /// +1 counter-clockwise in the (real, j) plane, -1 clockwise.
  int orientation = 1;

  /// Throws std::invalid_argument unless radius > 0, steps >= 16, turns >= 1,
  /// orientation is +-1 and there is something to track.
  void validate() const;
  Bicomplex value_at(double phi) const;
};

struct LoopTrace {
  std::vector<double> phis;
  std::vector<Bicomplex> params;
  /// states[step][track]
  std::vector<std::vector<StationaryState>> states;
  /// permutation[i]: index of the starting state that track i ends on.
  std::vector<int> permutation;
  /// Cycle lengths of the permutation, fixed points included, descending.
  std::vector<int> cycle_type;
  /// Smallest ratio of second-nearest to nearest distance over all step and
  /// final matches.
  double match_margin = 0.0;
  /// Steps actually used per turn (doubled once if the first try was ambiguous).
  int steps_used = 0;
  int halvings = 0;
};

std::vector<int> cycle_type(const std::vector<int>& permutation);
/// Throws std::invalid_argument if `permutation` is not a bijection.
std::vector<int> inverse_permutation(const std::vector<int>& permutation);
std::vector<int> compose(const std::vector<int>& first, const std::vector<int>& second);

LoopTrace encircle(const ContinuedSystem& system, const LoopSpec& spec, const SolveConfig& cfg = {});

/// The `count` states at `params` nearest to `reference`, preferring complex
/// states among comparably close ones. Used to pick the states taking part in
/// a bifurcation.
std::vector<StationaryState> participating_states(const ContinuedSystem& system,
                                                  const DimerParams& params,
                                                  const StationaryState& reference, std::size_t count,
                                                  const SolveConfig& cfg = {});

/// Loop of the given parameter around a located bifurcation of a gamma
/// scenario, tracking `count` participants (0: one per branch of the point).
/// radius <= 0 selects default_radius.
LoopSpec loop_around(const ContinuedSystem& system, const DimerParams& base,
                     const BifurcationPoint& point, ControlParameter which, double radius = 0.0,
                     int steps = 128, const SolveConfig& cfg = {}, std::size_t count = 0);

struct EpTraceSummary {
  ControlParameter which = ControlParameter::gamma;
  std::vector<int> cycle_type;
  double match_margin = 0.0;
};

struct EpReport {
  std::vector<EpTraceSummary> traces;
  /// Longest cycle over all traces: a lower bound on the order.
  int max_cycle_length = 0;
  bool coalesced = false;
  /// Largest pairwise distance of the tracked states followed radially into
  /// the center.
  double coalescence_distance = 0.0;
  std::string verdict;
};

struct ClassifyOptions {
  double coalescence_tol = 1e-3;
  /// Radial approach stops at radius * 2^-halvings.
  int radial_halvings = 40;
};

/// Combines traces sharing one center. The coalescence check follows the
/// starting states of the first trace radially into the center.
EpReport classify_ep(const ContinuedSystem& system, const std::vector<LoopSpec>& specs,
                     const std::vector<LoopTrace>& traces, const SolveConfig& cfg = {},
                     const ClassifyOptions& options = {});

}  // namespace ptdimer
