#include "ptdimer/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ptdimer {

namespace {

constexpr double kGaugeFloor = 1e-12;
constexpr int kMaxHalvings = 30;
constexpr double kDivergence = 1e8;

std::size_t amplitude_count(const Eigen::VectorXd& x) { return static_cast<std::size_t>(x.size() / 4 - 1); }

Bicomplex component(const Eigen::VectorXd& x, std::size_t slot) {
  return {x[4 * slot], x[4 * slot + 1], x[4 * slot + 2], x[4 * slot + 3]};
}

void put(Eigen::VectorXd& x, std::size_t slot, const Bicomplex& z) {
  for (int c = 0; c < 4; ++c) x[4 * slot + c] = z[c];
}

bool gauge_usable(const Bicomplex& a) {
  return std::abs(a.plus()) >= kGaugeFloor && std::abs(a.minus()) >= kGaugeFloor;
}

// Im(a+) and |a+|^2 - |a-|^2 written in components.
double gauge_phase(const Bicomplex& a) { return a.z2() - a.z1(); }
double gauge_modulus(const Bicomplex& a) { return 4.0 * (a.z0() * a.z3() - a.z1() * a.z2()); }

double max_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Eigen::VectorXd solve_linear(const Eigen::MatrixXd& J, const Eigen::VectorXd& rhs) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(J);
  if (qr.isInvertible()) return qr.solve(rhs);
  return J.completeOrthogonalDecomposition().solve(rhs);
}

StationaryState finalize(const ContinuedSystem& system, const DimerParams& params,
                         const Eigen::VectorXd& x, const SolveConfig& cfg) {
  StationaryState state = gauge_align(unpack_state(x));
  state.residual_norm = residual_norm(system, params, state);
  classify(state, cfg.classification_tol);
  return state;
}

// At a root where the Jacobian is singular (parameters exactly at an
// exceptional point) Newton converges linearly and stalls near sqrt(eps).
// With d near-zero singular values, the bordered system
//   F(x) = 0,  J(x) Phi = 0,  C^T Phi = I   (Phi: m x d)
// is regular there and is solved by Gauss-Newton. Returns x unchanged unless
// the polish reduces the residual.
Eigen::VectorXd polish_singular(const ContinuedSystem& system, const DimerParams& params,
                                const Eigen::VectorXd& x, std::size_t site, const SolveConfig& cfg) {
  SolveConfig exact = cfg;
  exact.jacobian = JacobianMode::analytic;
  const Eigen::Index m = x.size();
  const Eigen::MatrixXd J0 = real_jacobian(system, params, x, site, exact);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J0, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  Eigen::Index d = 0;
  while (d < m && sv[m - 1 - d] < kSingularRatio * sv[0]) ++d;
  if (d == 0) return x;

  const Eigen::MatrixXd C = svd.matrixV().rightCols(d);
  const Eigen::Index n_unknowns = m + m * d;
  auto G = [&](const Eigen::VectorXd& y) {
    const Eigen::VectorXd xx = y.head(m);
    const Eigen::Map<const Eigen::MatrixXd> Phi(y.data() + m, m, d);
    Eigen::VectorXd out(m + m * d + d * d);
    out.head(m) = assemble_real_system(system, params, xx, site).equations;
    const Eigen::MatrixXd JP = real_jacobian(system, params, xx, site, exact) * Phi;
    out.segment(m, m * d) = Eigen::Map<const Eigen::VectorXd>(JP.data(), m * d);
    const Eigen::MatrixXd B = C.transpose() * Phi - Eigen::MatrixXd::Identity(d, d);
    out.tail(d * d) = Eigen::Map<const Eigen::VectorXd>(B.data(), d * d);
    return out;
  };

  Eigen::VectorXd y(n_unknowns);
  y.head(m) = x;
  y.tail(m * d) = Eigen::Map<const Eigen::VectorXd>(C.data(), m * d);
  try {
    Eigen::VectorXd g = G(y);
    for (int it = 0; it < 20 && max_norm(g) > 1e-15; ++it) {
      Eigen::MatrixXd D(g.size(), n_unknowns);
      for (Eigen::Index col = 0; col < n_unknowns; ++col) {
        const double h = 1e-7 * std::max(1.0, std::fabs(y[col]));
        Eigen::VectorXd yp = y, ym = y;
        yp[col] += h;
        ym[col] -= h;
        D.col(col) = (G(yp) - G(ym)) / (2.0 * h);
      }
      const Eigen::VectorXd trial = y - D.colPivHouseholderQr().solve(g);
      const Eigen::VectorXd gt = G(trial);
      if (!gt.allFinite() || !(gt.norm() < g.norm())) break;
      y = trial;
      g = gt;
    }
  } catch (const GaugeDegenerate&) {
    return x;
  }
  const Eigen::VectorXd polished = y.head(m);
  const double before = max_norm(assemble_real_system(system, params, x, site).equations);
  const double after = max_norm(assemble_real_system(system, params, polished, site).equations);
  if (after <= before && max_norm(polished - x) < 1e-3) return polished;
  return x;
}

StationaryState converged(const ContinuedSystem& system, const DimerParams& params,
                          const Eigen::VectorXd& x, std::size_t site, const SolveConfig& cfg) {
  return finalize(system, params, polish_singular(system, params, x, site, cfg), cfg);
}

StationaryState newton_at_site(const ContinuedSystem& system, const DimerParams& params,
                               Eigen::VectorXd x, std::size_t site, const SolveConfig& cfg) {
  Eigen::VectorXd F = assemble_real_system(system, params, x, site).equations;
  for (int it = 0; it < cfg.max_iter; ++it) {
    if (!F.allFinite()) throw NoConvergence("non-finite residual");
    if (max_norm(F) < cfg.residual_tol) {
      StationaryState state = converged(system, params, x, site, cfg);
      if (state.residual_norm < cfg.residual_tol) return state;
    }
    const Eigen::MatrixXd J = real_jacobian(system, params, x, site, cfg);
    const Eigen::VectorXd dx = solve_linear(J, -F);
    if (!dx.allFinite()) throw NoConvergence("singular Newton system");

    const double f0 = F.norm();
    double lambda = 1.0;
    bool accepted = false;
    for (int h = 0; h <= kMaxHalvings; ++h, lambda *= 0.5) {
      Eigen::VectorXd trial = x + lambda * dx;
      Eigen::VectorXd Ft;
      try {
        Ft = assemble_real_system(system, params, trial, site).equations;
      } catch (const GaugeDegenerate&) {
        continue;
      }
      if (Ft.allFinite() && Ft.norm() < f0 * (1.0 - 1e-4 * lambda)) {
        x = std::move(trial);
        F = std::move(Ft);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (max_norm(F) < cfg.residual_tol) return converged(system, params, x, site, cfg);
      throw NoConvergence("step size underflow after " + std::to_string(kMaxHalvings) + " halvings");
    }
    if (max_norm(x) > kDivergence) throw NoConvergence("iterate diverged");
  }
  if (max_norm(F) < cfg.residual_tol) {
    StationaryState state = converged(system, params, x, site, cfg);
    if (state.residual_norm < cfg.residual_tol) return state;
  }
  throw NoConvergence("iteration cap of " + std::to_string(cfg.max_iter) + " reached");
}

// Total order with a small dead band so that numerically equal keys fall back
// to the next key instead of flipping on rounding noise.
bool key_less(double a, double b, bool& decided) {
  constexpr double band = 1e-9;
  if (a < b - band) {
    decided = true;
    return true;
  }
  if (b < a - band) {
    decided = true;
    return false;
  }
  return false;
}

}  // namespace

void SolveConfig::validate() const {
  if (!(residual_tol > 0.0)) throw std::invalid_argument("residual_tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (!(fd_step > 0.0)) throw std::invalid_argument("fd_step must be positive");
  if (!(dedup_tol > 0.0)) throw std::invalid_argument("dedup_tol must be positive");
  if (!(classification_tol > 0.0)) throw std::invalid_argument("classification_tol must be positive");
}

Eigen::VectorXd pack_state(std::span<const Bicomplex> psi, const Bicomplex& mu) {
  Eigen::VectorXd x(4 * psi.size() + 4);
  for (std::size_t n = 0; n < psi.size(); ++n) put(x, n, psi[n]);
  put(x, psi.size(), mu);
  return x;
}

Eigen::VectorXd pack_state(const StationaryState& state) { return pack_state(state.psi, state.mu); }

StationaryState unpack_state(const Eigen::VectorXd& x) {
  StationaryState state;
  const std::size_t n = amplitude_count(x);
  state.psi.resize(n);
  for (std::size_t k = 0; k < n; ++k) state.psi[k] = component(x, k);
  state.mu = component(x, n);
  return state;
}

RealSystemView assemble_real_system(const ContinuedSystem& system, const DimerParams& params,
                                    const Eigen::VectorXd& unknowns, std::size_t gauge_site) {
  const std::size_t n = system.dimension();
  if (static_cast<std::size_t>(unknowns.size()) != 4 * n + 4)
    throw std::invalid_argument("unknown vector has wrong length");
  if (gauge_site >= n) throw std::invalid_argument("gauge site out of range");

  std::vector<Bicomplex> psi(n);
  for (std::size_t k = 0; k < n; ++k) psi[k] = component(unknowns, k);
  const Bicomplex mu = component(unknowns, n);
  const Bicomplex& a = psi[gauge_site];
  if (!gauge_usable(a)) throw GaugeDegenerate(gauge_site);

  std::vector<Bicomplex> r(n);
  system.residual(psi, mu, params, r);
  const Bicomplex norm = system.normalization_residual(psi);

  double scale = 1.0;
  for (const auto& z : psi) scale += max_abs(z) * max_abs(z);
  if (std::fabs(norm.z2()) > 1e-12 * scale || std::fabs(norm.z3()) > 1e-12 * scale)
    throw std::logic_error("normalization residual has a non-vanishing i or k part");

  RealSystemView view;
  view.unknowns = unknowns;
  view.gauge_site = gauge_site;
  view.equations.resize(static_cast<Eigen::Index>(4 * n + 4));
  for (std::size_t k = 0; k < n; ++k) put(view.equations, k, r[k]);
  const auto base = static_cast<Eigen::Index>(4 * n);
  view.equations[base] = norm.z0();
  view.equations[base + 1] = norm.z1();
  view.equations[base + 2] = gauge_phase(a);
  view.equations[base + 3] = gauge_modulus(a);
  return view;
}

Eigen::MatrixXd real_jacobian(const ContinuedSystem& system, const DimerParams& params,
                              const Eigen::VectorXd& unknowns, std::size_t gauge_site,
                              const SolveConfig& cfg) {
  const Eigen::Index m = unknowns.size();
  Eigen::MatrixXd J(m, m);
  const std::size_t n = system.dimension();

  if (cfg.jacobian == JacobianMode::analytic) {
    std::vector<Bicomplex> psi(n), dpsi(n), out(n);
    for (std::size_t k = 0; k < n; ++k) psi[k] = component(unknowns, k);
    const Bicomplex mu = component(unknowns, n);
    const Bicomplex& a = psi[gauge_site];
    bool available = true;
    for (Eigen::Index col = 0; col < m && available; ++col) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
      e[col] = 1.0;
      for (std::size_t k = 0; k < n; ++k) dpsi[k] = component(e, k);
      const Bicomplex dmu = component(e, n);
      available = system.linearized_residual(psi, mu, params, dpsi, dmu, out);
      if (!available) break;
      Bicomplex dnorm{0.0};
      for (std::size_t k = 0; k < n; ++k) dnorm += conj(dpsi[k]) * psi[k] + conj(psi[k]) * dpsi[k];
      const Bicomplex& da = dpsi[gauge_site];
      Eigen::VectorXd column(m);
      for (std::size_t k = 0; k < n; ++k) put(column, k, out[k]);
      const auto base = static_cast<Eigen::Index>(4 * n);
      column[base] = dnorm.z0();
      column[base + 1] = dnorm.z1();
      column[base + 2] = da.z2() - da.z1();
      column[base + 3] =
          4.0 * (da.z0() * a.z3() + a.z0() * da.z3() - da.z1() * a.z2() - a.z1() * da.z2());
      J.col(col) = column;
    }
    if (available) return J;
  }

  const double h = cfg.fd_step;
  for (Eigen::Index col = 0; col < m; ++col) {
    Eigen::VectorXd xp = unknowns, xm = unknowns;
    xp[col] += h;
    xm[col] -= h;
    J.col(col) = (assemble_real_system(system, params, xp, gauge_site).equations -
                  assemble_real_system(system, params, xm, gauge_site).equations) /
                 (2.0 * h);
  }
  return J;
}

StationaryState gauge_align(const StationaryState& state) {
  auto site = std::find_if(state.psi.begin(), state.psi.end(), gauge_usable);
  if (site == state.psi.end()) return state;
  const Complex ap = site->plus();
  const Complex am = site->minus();
  const double rho = std::sqrt(std::abs(am) / std::abs(ap));
  const Complex phase = std::polar(1.0, -std::arg(ap));
  const IdempotentPair u{rho * phase, phase / rho};

  StationaryState out = state;
  for (auto& z : out.psi) z = Bicomplex::from_idempotent({u.plus * z.plus(), u.minus * z.minus()});
  // The aligned component is real by construction; drop the rounding residue.
  const auto idx = static_cast<std::size_t>(site - state.psi.begin());
  const Complex p = out.psi[idx].plus();
  const Complex m = out.psi[idx].minus();
  out.psi[idx] = Bicomplex::from_idempotent({{p.real(), 0.0}, m});
  return out;
}

double state_distance(const StationaryState& a, const StationaryState& b) {
  if (a.psi.size() != b.psi.size()) return INFINITY;
  return max_norm(pack_state(gauge_align(a)) - pack_state(gauge_align(b)));
}

double jacobian_singularity(const ContinuedSystem& system, const DimerParams& params,
                            const StationaryState& state, const SolveConfig& cfg) {
  SolveConfig exact = cfg;
  exact.jacobian = JacobianMode::analytic;
  const auto site = std::find_if(state.psi.begin(), state.psi.end(), gauge_usable);
  if (site == state.psi.end()) return 0.0;
  const Eigen::MatrixXd J = real_jacobian(system, params, pack_state(state),
                                          static_cast<std::size_t>(site - state.psi.begin()), exact);
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(J).singularValues();
  return sv[sv.size() - 1] / sv[0];
}

double residual_norm(const ContinuedSystem& system, const DimerParams& params,
                     const StationaryState& state) {
  std::vector<Bicomplex> r(state.psi.size());
  system.residual(state.psi, state.mu, params, r);
  double worst = max_abs(system.normalization_residual(state.psi));
  for (const auto& z : r) worst = std::max(worst, max_abs(z));
  return worst;
}

StationaryState newton_solve(const ContinuedSystem& system, const DimerParams& params,
                             const StationaryState& seed, const SolveConfig& cfg) {
  if (seed.psi.size() != system.dimension())
    throw std::invalid_argument("seed has wrong number of amplitudes");
  const Eigen::VectorXd x0 = pack_state(seed);
  if (!x0.allFinite()) throw std::invalid_argument("seed has non-finite entries");

  for (std::size_t site = 0;; ++site) {
    try {
      return newton_at_site(system, params, x0, site, cfg);
    } catch (const GaugeDegenerate& e) {
      if (site + 1 >= system.dimension()) throw;
    }
  }
}

std::vector<StationaryState> seed_lattice(const DimerParams& params, SeedGrid grid) {
  using std::numbers::pi;
  std::vector<double> pops;
  std::vector<double> phases;
  if (grid == SeedGrid::coarse) {
    pops = {0.1, 0.3, 0.5, 0.7, 0.9};
    phases = {0.0, pi / 2, -pi / 2, pi};
  } else {
    for (int k = 1; k <= 9; ++k) pops.push_back(0.1 * k);
    for (int k = -3; k <= 4; ++k) phases.push_back(k * pi / 4);
  }

  const Bicomplex i = Bicomplex::unit_i();
  const double v = params.v;
  // Linear eigenvalues per idempotent component, shifted by the mean nonlinear term.
  auto linear_roots = [&](const Complex& gamma, const Complex& s) {
    const Complex d = s - Complex{0.0, 1.0} * gamma;
    const Complex r = std::sqrt(d * d + v * v);
    return std::array<Complex, 2>{r, -r};
  };
  const auto rp = linear_roots(params.gamma.plus(), params.s.plus());
  const auto rm = linear_roots(params.gamma.minus(), params.s.minus());
  const Bicomplex shift = -0.5 * params.g;

  std::vector<StationaryState> base;
  std::vector<StationaryState> seeds;
  for (double a : pops) {
    for (double theta : phases) {
      const Bicomplex psi1{std::sqrt(a)};
      const Complex c2 = std::polar(std::sqrt(1.0 - a), theta);
      const Bicomplex psi2 = Bicomplex::from_complex_i(c2);
      // mu from each row of the matrix equation, and their mean.
      const Bicomplex mu1 = -(params.g * a) - i * params.gamma + params.s + params.v * psi2 / psi1;
      const Bicomplex mu2 =
          -(params.g * (1.0 - a)) + i * params.gamma - params.s + params.v * psi1 / psi2;
      const Bicomplex mean = 0.5 * (mu1 + mu2);
      base.push_back({{psi1, psi2}, mean});
      seeds.push_back({{psi1, psi2}, mu1});
      seeds.push_back({{psi1, psi2}, mu2});
      for (const auto& lp : rp)
        for (const auto& lm : rm)
          seeds.push_back({{psi1, psi2}, shift + Bicomplex::from_idempotent({lp, lm})});
    }
  }

  const Bicomplex kicks[] = {0.1 * Bicomplex::unit_j(), 0.1 * Bicomplex::unit_k(),
                             -0.1 * Bicomplex::unit_j(), -0.1 * Bicomplex::unit_k()};
  for (const auto& b : base) {
    seeds.push_back(b);
    for (const auto& kick : kicks) {
      seeds.push_back({{b.psi[0], b.psi[1] + kick}, b.mu});
      seeds.push_back({{b.psi[0], b.psi[1]}, b.mu + kick});
    }
  }
  // Mixed seeds: plus component from one physical guess, minus from another.
  for (const auto& p : base)
    for (const auto& q : base) {
      if (&p == &q) continue;
      auto mix = [](const Bicomplex& x, const Bicomplex& y) {
        return Bicomplex::from_idempotent({x.plus(), y.minus()});
      };
      seeds.push_back({{mix(p.psi[0], q.psi[0]), mix(p.psi[1], q.psi[1])}, mix(p.mu, q.mu)});
    }
  return seeds;
}

bool insert_unique(std::vector<StationaryState>& states, const StationaryState& state, double tol) {
  for (const auto& s : states)
    if (state_distance(s, state) < tol) return false;
  states.push_back(state);
  return true;
}

void sort_states(std::vector<StationaryState>& states) {
  auto keys = [](const StationaryState& s) {
    const auto [re, im] = real_imag_parts(s.mu);
    const Eigen::VectorXd x = pack_state(s);
    std::vector<double> k{re.z0(), re.z2(), im.z0(), im.z2()};
    k.insert(k.end(), x.data(), x.data() + x.size());
    return k;
  };
  std::stable_sort(states.begin(), states.end(), [&](const StationaryState& a, const StationaryState& b) {
    const auto ka = keys(a);
    const auto kb = keys(b);
    for (std::size_t n = 0; n < ka.size(); ++n) {
      bool decided = false;
      const bool less = key_less(ka[n], kb[n], decided);
      if (decided) return less;
    }
    return false;
  });
}

std::vector<StationaryState> find_all_states(const ContinuedSystem& system,
                                             const DimerParams& params, const SolveConfig& cfg) {
  cfg.validate();
  std::vector<StationaryState> states;
  for (const auto& seed : seed_lattice(params, cfg.seed_grid)) {
    try {
      insert_unique(states, newton_solve(system, params, seed, cfg), cfg.dedup_tol);
    } catch (const NoConvergence&) {
    } catch (const GaugeDegenerate&) {
    }
  }
  sort_states(states);
  return states;
}

}  // namespace ptdimer
