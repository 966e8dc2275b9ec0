#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ptdimer/dimer_model.hpp"

namespace ptdimer {

class NoConvergence : public std::runtime_error {
public:
  explicit NoConvergence(const std::string& what) : std::runtime_error("NoConvergence: " + what) {}
};

/// The gauge amplitude has a vanishing idempotent component, so the gauge
/// conditions cannot be imposed at this iterate.
class GaugeDegenerate : public std::runtime_error {
public:
  explicit GaugeDegenerate(std::size_t site)
      : std::runtime_error("GaugeDegenerate: amplitude " + std::to_string(site) +
                           " has a vanishing idempotent component"),
        site_(site) {}
  std::size_t site() const { return site_; }

private:
  std::size_t site_;
};

enum class JacobianMode { finite_difference, analytic };
enum class SeedGrid { coarse, fine };

struct SolveConfig {
  double residual_tol = 1e-11;
  int max_iter = 100;
  JacobianMode jacobian = JacobianMode::finite_difference;
  double fd_step = 1e-7;
  SeedGrid seed_grid = SeedGrid::coarse;
  double dedup_tol = 1e-7;
  double classification_tol = kDefaultClassificationTol;

  /// Throws std::invalid_argument on non-positive tolerances or max_iter < 1.
  void validate() const;
};

/// Unknown and equation vectors of the equivalent real system.
///
/// Unknowns: 4 reals per amplitude, then 4 for mu (4N + 4 total).
/// Equations: 4 reals per residual component, the j-free and j parts of the
/// normalization residual, then two gauge conditions on the gauge amplitude a:
///   Im(a+) = 0  and  |a+|^2 - |a-|^2 = 0.
struct RealSystemView {
  Eigen::VectorXd unknowns;
  Eigen::VectorXd equations;
  std::size_t gauge_site = 0;
};

Eigen::VectorXd pack_state(std::span<const Bicomplex> psi, const Bicomplex& mu);
Eigen::VectorXd pack_state(const StationaryState& state);
/// Inverse of pack_state; flags and residual are left default.
StationaryState unpack_state(const Eigen::VectorXd& x);

/// Throws GaugeDegenerate if |a+| or |a-| < 1e-12 for the gauge amplitude,
/// and std::logic_error if the i or k part of the normalization residual
/// fails to vanish.
RealSystemView assemble_real_system(const ContinuedSystem& system, const DimerParams& params,
                                    const Eigen::VectorXd& unknowns, std::size_t gauge_site = 0);

Eigen::MatrixXd real_jacobian(const ContinuedSystem& system, const DimerParams& params,
                              const Eigen::VectorXd& unknowns, std::size_t gauge_site,
                              const SolveConfig& cfg);

/// Applies the residual gauge freedom psi -> u psi (conj(u) u = 1) so that the
/// first usable amplitude a satisfies a+ > 0 real and |a+| = |a-|.
StationaryState gauge_align(const StationaryState& state);

/// Max-norm distance of the packed vectors after gauge alignment.
double state_distance(const StationaryState& a, const StationaryState& b);

/// Ratio of smallest to largest singular value of the real Jacobian at a
/// state. Near zero when the state sits on a coalescence of solutions.
double jacobian_singularity(const ContinuedSystem& system, const DimerParams& params,
                            const StationaryState& state, const SolveConfig& cfg = {});

/// Ratios below this mark a singular root.
inline constexpr double kSingularRatio = 1e-5;

/// Max-norm of all residual and normalization components, evaluated through
/// the model directly.
double residual_norm(const ContinuedSystem& system, const DimerParams& params,
                     const StationaryState& state);

/// Damped Newton on the real system. The seed only needs psi and mu.
/// Falls back to the next amplitude as gauge site on GaugeDegenerate.
StationaryState newton_solve(const ContinuedSystem& system, const DimerParams& params,
                             const StationaryState& seed, const SolveConfig& cfg = {});

/// The deterministic multistart lattice used by find_all_states.
std::vector<StationaryState> seed_lattice(const DimerParams& params, SeedGrid grid);

/// Adds `state` to `states` unless a duplicate within tol exists. Returns
/// whether it was added.
bool insert_unique(std::vector<StationaryState>& states, const StationaryState& state, double tol);

/// Orders states by the real part of mu, then its imaginary part.
void sort_states(std::vector<StationaryState>& states);

/// Multistart Newton over seed_lattice, deduplicated and sorted.
std::vector<StationaryState> find_all_states(const ContinuedSystem& system,
                                             const DimerParams& params, const SolveConfig& cfg = {});

}  // namespace ptdimer
