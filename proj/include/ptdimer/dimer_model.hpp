#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ptdimer/bicomplex.hpp"

namespace ptdimer {

/// Which scalar control a sweep or loop acts on.
enum class ControlParameter { gamma, g, s };

std::string_view to_string(ControlParameter which);
/// Parses "gamma", "g" or "s"; throws std::invalid_argument otherwise.
ControlParameter parse_control_parameter(std::string_view name);

/// Controls of the two-mode model. gamma, g and s may carry a j part when a
/// loop complexifies them; physical values are purely real.
struct DimerParams {
  double v = 1.0;
  Bicomplex g{0.0};
  Bicomplex gamma{0.0};
  Bicomplex s{0.0};

  Bicomplex get(ControlParameter which) const;
  DimerParams with(ControlParameter which, const Bicomplex& value) const;
  /// Real/j values only and v > 0.
  bool is_physical() const;
};

/// A converged solution of a continued system.
struct StationaryState {
  std::vector<Bicomplex> psi;
  Bicomplex mu;
  double residual_norm = 0.0;
  /// Exists without continuation: psi and mu have no j or k part.
  bool is_complex_state = false;
  /// Only meaningful when is_complex_state; equal site populations.
  bool is_pt_symmetric = false;

  const Bicomplex& psi1() const { return psi.at(0); }
  const Bicomplex& psi2() const { return psi.at(1); }
};

inline constexpr double kDefaultClassificationTol = 1e-8;

/// A system of bicomplex stationary equations H(psi) psi = mu psi continued
/// via conj(psi) psi in place of |psi|^2. Parameters are injected per call.
class ContinuedSystem {
public:
  virtual ~ContinuedSystem() = default;

  /// Number of bicomplex amplitudes.
  virtual std::size_t dimension() const = 0;
  virtual std::string name() const = 0;

  virtual void residual(std::span<const Bicomplex> psi, const Bicomplex& mu, const DimerParams& p,
                        std::span<Bicomplex> out) const = 0;

  /// Derivative of residual() along (dpsi, dmu). Returns false when the
  /// system has no analytic linearization.
  virtual bool linearized_residual(std::span<const Bicomplex> psi, const Bicomplex& mu,
                                   const DimerParams& p, std::span<const Bicomplex> dpsi,
                                   const Bicomplex& dmu, std::span<Bicomplex> out) const;

  /// sum_n conj(psi_n) psi_n - 1.
  virtual Bicomplex normalization_residual(std::span<const Bicomplex> psi) const;
};

/// The PT-symmetric double well:
///   [ -g conj(psi1)psi1 - i gamma + s      v                         ] [psi1]      [psi1]
///   [  v                                  -g conj(psi2)psi2 + i gamma - s ] [psi2] = mu [psi2]
class DimerModel final : public ContinuedSystem {
public:
  std::size_t dimension() const override { return 2; }
  std::string name() const override { return "dimer"; }
  void residual(std::span<const Bicomplex> psi, const Bicomplex& mu, const DimerParams& p,
                std::span<Bicomplex> out) const override;
  bool linearized_residual(std::span<const Bicomplex> psi, const Bicomplex& mu,
                           const DimerParams& p, std::span<const Bicomplex> dpsi,
                           const Bicomplex& dmu, std::span<Bicomplex> out) const override;
};

/// The g = 0 limit. Ignores p.g entirely; used as an independent reference.
class LinearTwoLevelModel final : public ContinuedSystem {
public:
  std::size_t dimension() const override { return 2; }
  std::string name() const override { return "linear"; }
  void residual(std::span<const Bicomplex> psi, const Bicomplex& mu, const DimerParams& p,
                std::span<Bicomplex> out) const override;

  /// Closed-form eigenvalues +-sqrt(v^2 + s^2 - gamma^2 - 2 i gamma s) for complex (C_i) gamma, s.
  static std::pair<Complex, Complex> eigenvalues(double v, Complex gamma, Complex s = {});
};

struct DimerResidual {
  Bicomplex r1;
  Bicomplex r2;
};

DimerResidual residual(const Bicomplex& psi1, const Bicomplex& psi2, const Bicomplex& mu,
                       const DimerParams& p);
Bicomplex normalization_residual(const Bicomplex& psi1, const Bicomplex& psi2);

struct Observables {
  Bicomplex mu;
  /// mu + (g/2) [ (conj(psi1)psi1)^2 + (conj(psi2)psi2)^2 ]
  Bicomplex e_mf;
  /// Real and imaginary parts of e_mf. Each is a complex number whose second
  /// component (stored in the i slot) is the j continuation of that part;
  /// both are real for states of the uncontinued model.
  Bicomplex re_part;
  Bicomplex im_part;
};

/// Real and imaginary parts of a continued quantity, built from its
/// idempotent components.
std::pair<Bicomplex, Bicomplex> real_imag_parts(const Bicomplex& z);

Observables observables(const StationaryState& state, const DimerParams& p);

/// True if the state has no j or k part anywhere (within tol).
bool is_complex_state(std::span<const Bicomplex> psi, const Bicomplex& mu,
                      double tol = kDefaultClassificationTol);

/// Equal site populations. nullopt when the state is not a complex state
/// (PT classification is not applicable).
std::optional<bool> pt_classify(const StationaryState& state,
                                double tol = kDefaultClassificationTol);

/// Fills the flags of a state from its amplitudes.
void classify(StationaryState& state, double tol = kDefaultClassificationTol);

/// PT image of a dimer state: (bar psi2, bar psi1, bar mu), bar = i-conjugation.
/// Maps solutions to solutions at physical gamma with s = 0.
StationaryState pt_reflect(const StationaryState& state);

}  // namespace ptdimer
