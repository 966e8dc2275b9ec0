#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptdimer/solver.hpp"

namespace ptdimer {

/// A natural-parameter sweep could not shrink its step any further.
class BranchTerminated : public std::runtime_error {
public:
  BranchTerminated(double param, const std::string& reason)
      : std::runtime_error("BranchTerminated at " + std::to_string(param) + ": " + reason),
        param_(param) {}
  double param() const { return param_; }

private:
  double param_;
};

class NoMerger : public std::runtime_error {
public:
  explicit NoMerger(const std::string& what) : std::runtime_error("NoMerger: " + what) {}
};

struct BranchSample {
  double param = 0.0;
  StationaryState state;
};

struct StepControl {
  double initial_step = 0.0;
  double min_step = 1e-9;
  double current_step = 0.0;
  int accepted = 0;
  int rejected = 0;
};

/// One solution branch over a real control parameter. Samples are ordered
/// along the sweep direction.
struct Branch {
  int id = 0;
  ControlParameter axis = ControlParameter::gamma;
  std::vector<BranchSample> samples;
  StepControl step;
  /// Set when the sweep stopped before the end of its range.
  std::optional<std::string> termination;
  double termination_param = 0.0;

  bool has_complex_sample() const;
  /// Sample at exactly this parameter value, if present.
  const BranchSample* at(double param) const;
};

/// Follows `seed` from `start` towards `stop` along `axis`: secant predictor
/// (plain previous state for the first step), Newton corrector, step halving
/// on failure down to `min_step`, growth by 1.5 after three successes up to
/// `initial_step`. A sweep that cannot continue is returned with
/// `termination` set.
Branch sweep_branch(const ContinuedSystem& system, const DimerParams& params,
                    const StationaryState& seed, ControlParameter axis, double start, double stop,
                    double initial_step, const SolveConfig& cfg = {}, double min_step = 1e-9);

/// All continued states followed over a uniform grid. Every branch is sampled
/// at grid points only, so branches can be compared index by index.
struct Scenario {
  ControlParameter axis = ControlParameter::gamma;
  DimerParams base;
  std::vector<double> grid;
  std::vector<Branch> branches;

  /// Number of branches with a sample at grid index k.
  std::size_t state_count(std::size_t k) const;
};

struct ScenarioOptions {
  /// Grid points between full multistart searches for newly appearing states.
  int refresh_every = 25;
};

Scenario trace_scenario(const ContinuedSystem& system, const DimerParams& params,
                        ControlParameter axis, double lo, double hi, double step,
                        const SolveConfig& cfg = {}, const ScenarioOptions& options = {});

enum class BifurcationKind { tangent, pitchfork, unclassified };
std::string_view to_string(BifurcationKind kind);

struct BifurcationPoint {
  BifurcationKind kind = BifurcationKind::unclassified;
  double location = 0.0;
  std::vector<int> branch_ids;
  StationaryState coalesced;
  /// Largest pairwise distance between participants at the last refinement step.
  double detection_residual = 0.0;
  /// Pitchfork only: the branch that continues through the point, and whether
  /// it is the PT-symmetric branch with the larger real part of mu.
  int continuing_branch = -1;
  bool on_upper_branch = false;
  /// Pitchfork only: the two partner branches are PT images of each other.
  bool partners_pt_related = false;
};

struct DetectionOptions {
  /// Only consider branches that are physical somewhere on the grid.
  bool physical_only = true;
  /// Pairwise distance below which a refined pair counts as coalesced.
  double coalescence_tol = 1e-4;
  /// Parameter tolerance of the coalescence locator.
  double locate_tol = 1e-10;
  /// Events closer than this in parameter (and state) are one event.
  double merge_tol = 1e-6;
};

/// Locates parameter values where branches of a scenario coalesce and
/// classifies them as tangent (two branches) or pitchfork (a partner pair
/// meeting a branch that continues through the point).
std::vector<BifurcationPoint> detect_bifurcations(const ContinuedSystem& system,
                                                  const Scenario& scenario,
                                                  const SolveConfig& cfg = {},
                                                  const DetectionOptions& options = {});

/// Tangent and pitchfork of the gamma scenario at fixed g.
struct GammaScenarioSummary {
  std::optional<BifurcationPoint> tangent;
  std::optional<BifurcationPoint> pitchfork;
  std::vector<BifurcationPoint> all;
};

struct GammaScanOptions {
  double gamma_lo = 0.005;
  /// Upper end of the scan as a multiple of v.
  double gamma_hi_factor = 1.2;
  double step = 0.01;
};

GammaScenarioSummary analyze_gamma_scenario(const ContinuedSystem& system, const DimerParams& params,
                                            const SolveConfig& cfg = {},
                                            const GammaScanOptions& scan = {});

/// For each g: whether a pitchfork occurs at some gamma in (0, v].
std::map<double, bool> pitchfork_existence(const ContinuedSystem& system,
                                           const std::vector<double>& g_values, double v,
                                           const SolveConfig& cfg = {},
                                           const GammaScanOptions& scan = {});

struct MergerResult {
  double g_star = 0.0;
  double gamma_tangent = 0.0;
  double gamma_pitchfork = 0.0;
  /// |gamma_tangent - gamma_pitchfork| at g_star.
  double gap = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int evaluations = 0;
};

struct MergerOptions {
  /// Spacing of the bracketing scan over g.
  double scan_step = 0.1;
  double gap_tol = 1e-6;
  double g_tol = 1e-9;
};

/// Signed gap between tangent and pitchfork along g: (gamma_t - gamma_p),
/// positive when the pitchfork sits on the upper branch and negative on the
/// lower one. nullopt where no pitchfork exists.
std::optional<double> signed_merger_gap(const GammaScenarioSummary& summary);

/// Brackets a sign change of the signed gap on a scan over [g_lo, g_hi] and
/// bisects it. Throws NoMerger if the gap never changes sign.
MergerResult find_merger(const ContinuedSystem& system, double v, double g_lo, double g_hi,
                         const SolveConfig& cfg = {}, const MergerOptions& options = {},
                         const GammaScanOptions& scan = {});

}  // namespace ptdimer
