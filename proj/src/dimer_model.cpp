#include "ptdimer/dimer_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <tuple>

namespace ptdimer {

std::string_view to_string(ControlParameter which) {
  switch (which) {
    case ControlParameter::gamma: return "gamma";
    case ControlParameter::g: return "g";
    case ControlParameter::s: return "s";
  }
  return "?";
}

ControlParameter parse_control_parameter(std::string_view name) {
  if (name == "gamma") return ControlParameter::gamma;
  if (name == "g") return ControlParameter::g;
  if (name == "s") return ControlParameter::s;
  throw std::invalid_argument("unknown control parameter '" + std::string(name) + "'");
}

Bicomplex DimerParams::get(ControlParameter which) const {
  switch (which) {
    case ControlParameter::gamma: return gamma;
    case ControlParameter::g: return g;
    case ControlParameter::s: return s;
  }
  return {};
}

DimerParams DimerParams::with(ControlParameter which, const Bicomplex& value) const {
  DimerParams out = *this;
  switch (which) {
    case ControlParameter::gamma: out.gamma = value; break;
    case ControlParameter::g: out.g = value; break;
    case ControlParameter::s: out.s = value; break;
  }
  return out;
}

bool DimerParams::is_physical() const {
  auto real_or_j = [](const Bicomplex& z) { return z.z2() == 0.0 && z.z3() == 0.0; };
  return v > 0.0 && real_or_j(g) && real_or_j(gamma) && real_or_j(s);
}

bool ContinuedSystem::linearized_residual(std::span<const Bicomplex>, const Bicomplex&,
                                          const DimerParams&, std::span<const Bicomplex>,
                                          const Bicomplex&, std::span<Bicomplex>) const {
  return false;
}

Bicomplex ContinuedSystem::normalization_residual(std::span<const Bicomplex> psi) const {
  Bicomplex sum{-1.0};
  for (const auto& a : psi) sum += conj(a) * a;
  return sum;
}

void DimerModel::residual(std::span<const Bicomplex> psi, const Bicomplex& mu, const DimerParams& p,
                          std::span<Bicomplex> out) const {
  const Bicomplex i = Bicomplex::unit_i();
  const Bicomplex n1 = conj(psi[0]) * psi[0];
  const Bicomplex n2 = conj(psi[1]) * psi[1];
  out[0] = (-(p.g * n1) - i * p.gamma + p.s - mu) * psi[0] + p.v * psi[1];
  out[1] = p.v * psi[0] + (-(p.g * n2) + i * p.gamma - p.s - mu) * psi[1];
}

bool DimerModel::linearized_residual(std::span<const Bicomplex> psi, const Bicomplex& mu,
                                     const DimerParams& p, std::span<const Bicomplex> dpsi,
                                     const Bicomplex& dmu, std::span<Bicomplex> out) const {
  const Bicomplex i = Bicomplex::unit_i();
  const Bicomplex n1 = conj(psi[0]) * psi[0];
  const Bicomplex n2 = conj(psi[1]) * psi[1];
  const Bicomplex dn1 = conj(dpsi[0]) * psi[0] + conj(psi[0]) * dpsi[0];
  const Bicomplex dn2 = conj(dpsi[1]) * psi[1] + conj(psi[1]) * dpsi[1];
  out[0] = (-(p.g * dn1) - dmu) * psi[0] + (-(p.g * n1) - i * p.gamma + p.s - mu) * dpsi[0] +
           p.v * dpsi[1];
  out[1] = p.v * dpsi[0] + (-(p.g * dn2) - dmu) * psi[1] +
           (-(p.g * n2) + i * p.gamma - p.s - mu) * dpsi[1];
  return true;
}

void LinearTwoLevelModel::residual(std::span<const Bicomplex> psi, const Bicomplex& mu,
                                   const DimerParams& p, std::span<Bicomplex> out) const {
  const Bicomplex i = Bicomplex::unit_i();
  out[0] = (p.s - i * p.gamma - mu) * psi[0] + p.v * psi[1];
  out[1] = p.v * psi[0] + (i * p.gamma - p.s - mu) * psi[1];
}

std::pair<Complex, Complex> LinearTwoLevelModel::eigenvalues(double v, Complex gamma, Complex s) {
  const Complex diag = s - Complex{0.0, 1.0} * gamma;
  const Complex root = std::sqrt(diag * diag + v * v);
  return {root, -root};
}

DimerResidual residual(const Bicomplex& psi1, const Bicomplex& psi2, const Bicomplex& mu,
                       const DimerParams& p) {
  const Bicomplex psi[2] = {psi1, psi2};
  Bicomplex out[2];
  DimerModel{}.residual(psi, mu, p, out);
  return {out[0], out[1]};
}

Bicomplex normalization_residual(const Bicomplex& psi1, const Bicomplex& psi2) {
  return modulus_squared(psi1) + modulus_squared(psi2) - Bicomplex{1.0};
}

// Switching to the C_j representation, where the coefficients are
// (z0 + z3) + j(z1 - z2) and (z0 - z3) + j(z1 + z2), the half sum and the
// j-weighted half difference give z0 + j z1 and z2 + j z3.
std::pair<Bicomplex, Bicomplex> real_imag_parts(const Bicomplex& z) {
  const Complex plus = z.plus();
  const Complex minus = z.minus();
  const Complex plus_j{plus.real(), -plus.imag()};
  const Complex minus_j{minus.real(), minus.imag()};
  const Complex re = 0.5 * (plus_j + minus_j);
  const Complex im = Complex{0.0, 0.5} * (plus_j - minus_j);
  return {Bicomplex::from_complex_i(re), Bicomplex::from_complex_i(im)};
}

Observables observables(const StationaryState& state, const DimerParams& p) {
  Observables obs;
  obs.mu = state.mu;
  Bicomplex quartic{0.0};
  for (const auto& a : state.psi) {
    const Bicomplex n = modulus_squared(a);
    quartic += n * n;
  }
  obs.e_mf = state.mu + 0.5 * (p.g * quartic);
  std::tie(obs.re_part, obs.im_part) = real_imag_parts(obs.e_mf);
  return obs;
}

bool is_complex_state(std::span<const Bicomplex> psi, const Bicomplex& mu, double tol) {
  auto ok = [tol](const Bicomplex& z) { return std::fabs(z.z1()) < tol && std::fabs(z.z3()) < tol; };
  if (!ok(mu)) return false;
  for (const auto& a : psi)
    if (!ok(a)) return false;
  return true;
}

std::optional<bool> pt_classify(const StationaryState& state, double tol) {
  if (!state.is_complex_state || state.psi.size() != 2) return std::nullopt;
  const Bicomplex diff = modulus_squared(state.psi[0]) - modulus_squared(state.psi[1]);
  return max_abs(diff) < tol;
}

void classify(StationaryState& state, double tol) {
  state.is_complex_state = is_complex_state(state.psi, state.mu, tol);
  state.is_pt_symmetric = pt_classify(state, tol).value_or(false);
}

StationaryState pt_reflect(const StationaryState& state) {
  StationaryState out = state;
  out.psi = {conj(state.psi.at(1)), conj(state.psi.at(0))};
  out.mu = conj(state.mu);
  return out;
}

}  // namespace ptdimer
