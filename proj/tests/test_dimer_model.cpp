#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "ptdimer/solver.hpp"

using namespace ptdimer;

namespace {

const Bicomplex I = Bicomplex::unit_i();

double norm(const DimerResidual& r) { return std::max(max_abs(r.r1), max_abs(r.r2)); }

// The model equations written out with the unit-table product.
DimerResidual reference_residual(const Bicomplex& a, const Bicomplex& b, const Bicomplex& mu, const DimerParams& p) {
  using oracle::table_multiply;
  const Bicomplex n1 = table_multiply(conj(a), a), n2 = table_multiply(conj(b), b);
  const Bicomplex d1 = -1.0 * table_multiply(p.g, n1) - table_multiply(I, p.gamma) + p.s - mu;
  const Bicomplex d2 = -1.0 * table_multiply(p.g, n2) + table_multiply(I, p.gamma) - p.s - mu;
  return {table_multiply(d1, a) + p.v * b, p.v * a + table_multiply(d2, b)};
}

StationaryState make_state(Bicomplex a, Bicomplex b, Bicomplex mu) {
  StationaryState s;
  s.psi = {a, b};
  s.mu = mu;
  classify(s);
  return s;
}

// PT-symmetric state on the branch mu = -g/2 + sign * sqrt(v^2 - gamma^2).
StationaryState symmetric_state(double v, double g, double gamma, int sign) {
  const double m = sign * std::sqrt(v * v - gamma * gamma);
  const Complex ratio = Complex(m, gamma) / v;
  const double a = 1.0 / std::sqrt(2.0);
  return make_state(Bicomplex{a}, Bicomplex::from_complex_i(a * ratio), Bicomplex{-g / 2 + m});
}

}  // namespace

TEST_CASE("control parameter names") {
  CHECK(parse_control_parameter("gamma") == ControlParameter::gamma);
  CHECK(parse_control_parameter("g") == ControlParameter::g);
  CHECK(parse_control_parameter("s") == ControlParameter::s);
  CHECK_THROWS_AS(parse_control_parameter("v"), std::invalid_argument);
  CHECK(to_string(ControlParameter::s) == "s");

  DimerParams p;
  CHECK(p.is_physical());
  CHECK(p.with(ControlParameter::gamma, Bicomplex{0.5, 0.1, 0, 0}).is_physical());
  CHECK_FALSE(p.with(ControlParameter::gamma, I).is_physical());
  CHECK(p.with(ControlParameter::s, Bicomplex{0.3}).get(ControlParameter::s) == Bicomplex{0.3});
}

TEST_CASE("residual examples") {
  const double a = 1.0 / std::sqrt(2.0);
  for (double g : {-1.5, 0.0, 0.7}) {
    DimerParams p;
    p.g = g;
    CHECK(norm(residual(Bicomplex{a}, Bicomplex{a}, Bicomplex{-g / 2 + 1.0}, p)) < 1e-15);
    CHECK(norm(residual(Bicomplex{a}, Bicomplex{-a}, Bicomplex{-g / 2 - 1.0}, p)) < 1e-15);
  }
  const auto s = symmetric_state(1.0, 0.0, 0.5, +1);
  DimerParams p;
  p.gamma = 0.5;
  CHECK(s.mu.z0() == doctest::Approx(std::sqrt(0.75)).epsilon(1e-15));
  CHECK(norm(residual(s.psi1(), s.psi2(), s.mu, p)) < 1e-15);
}

TEST_CASE("residual matches the written-out equations") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  auto draw = [&] { return Bicomplex{u(rng), u(rng), u(rng), u(rng)}; };
  const DimerModel model;
  for (int n = 0; n < 200; ++n) {
    DimerParams p;
    p.v = 1.0 + 0.5 * u(rng);
    p.g = draw();
    p.gamma = draw();
    p.s = draw();
    const Bicomplex a = draw(), b = draw(), mu = draw();
    const auto ref = reference_residual(a, b, mu, p);
    const auto got = residual(a, b, mu, p);
    CHECK(max_abs(got.r1 - ref.r1) < 1e-13);
    CHECK(max_abs(got.r2 - ref.r2) < 1e-13);

    std::array<Bicomplex, 2> psi{a, b}, out;
    model.residual(psi, mu, p, out);
    CHECK(out[0] == got.r1);
    CHECK(out[1] == got.r2);
  }
}

TEST_CASE("analytic linearization matches finite differences") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  auto draw = [&] { return Bicomplex{u(rng), u(rng), u(rng), u(rng)}; };
  const DimerModel model;
  for (int n = 0; n < 50; ++n) {
    DimerParams p;
    p.g = draw();
    p.gamma = draw();
    p.s = draw();
    std::array<Bicomplex, 2> psi{draw(), draw()}, dpsi{draw(), draw()}, lin, rp, rm;
    const Bicomplex mu = draw(), dmu = draw();
    REQUIRE(model.linearized_residual(psi, mu, p, dpsi, dmu, lin));
    const double h = 1e-6;
    std::array<Bicomplex, 2> pp{psi[0] + h * dpsi[0], psi[1] + h * dpsi[1]};
    std::array<Bicomplex, 2> pm{psi[0] - h * dpsi[0], psi[1] - h * dpsi[1]};
    model.residual(pp, mu + h * dmu, p, rp);
    model.residual(pm, mu - h * dmu, p, rm);
    for (int k = 0; k < 2; ++k) CHECK(max_abs((rp[k] - rm[k]) * (0.5 / h) - lin[k]) < 1e-7);
  }
  const LinearTwoLevelModel linear;
  std::array<Bicomplex, 2> psi{Bicomplex{1.0}, Bicomplex{0.0}}, out;
  CHECK_FALSE(linear.linearized_residual(psi, Bicomplex{}, DimerParams{}, psi, Bicomplex{}, out));
}

TEST_CASE("complex inputs keep j and k parts of the residual at zero") {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  auto draw = [&] { return Bicomplex{u(rng), 0.0, u(rng), 0.0}; };
  for (int n = 0; n < 200; ++n) {
    DimerParams p;
    p.g = u(rng);
    p.gamma = u(rng);
    p.s = u(rng);
    const auto r = residual(draw(), draw(), draw(), p);
    CHECK(r.r1.z1() == 0.0);
    CHECK(r.r1.z3() == 0.0);
    CHECK(r.r2.z1() == 0.0);
    CHECK(r.r2.z3() == 0.0);
  }
}

TEST_CASE("normalization residual") {
  const double a = 1.0 / std::sqrt(2.0);
  CHECK(normalization_residual(Bicomplex{1.0}, Bicomplex{0.0}) == Bicomplex{0.0});
  CHECK(max_abs(normalization_residual(Bicomplex{a}, Bicomplex{a})) < 1e-15);
  CHECK(normalization_residual(Bicomplex::e_plus(), Bicomplex{0.0}) == Bicomplex{-1.0});
  const DimerModel model;
  std::array<Bicomplex, 2> psi{Bicomplex{0.3, 0.2, -0.1, 0.4}, Bicomplex{-0.5, 0.1, 0.6, 0.2}};
  CHECK(max_abs(model.normalization_residual(psi) - normalization_residual(psi[0], psi[1])) < 1e-15);
}

TEST_CASE("symmetric branch closed form") {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> ug(-2.5, 2.5), uf(0.0, 0.999);
  for (int n = 0; n < 200; ++n) {
    DimerParams p;
    p.v = 1.0;
    p.g = ug(rng);
    p.gamma = uf(rng);
    for (int sign : {-1, 1}) {
      const auto s = symmetric_state(1.0, p.g.z0(), p.gamma.z0(), sign);
      CHECK(norm(residual(s.psi1(), s.psi2(), s.mu, p)) < 1e-12);
      CHECK(max_abs(normalization_residual(s.psi1(), s.psi2())) < 1e-15);
      CHECK(pt_classify(s) == std::optional<bool>(true));
    }
  }
  // At gamma = v both branches reach mu = -g/2.
  const auto up = oracle::symmetric_mu(1.0, -1.0, 1.0);
  CHECK(up[0] == up[1]);
}

TEST_CASE("observables") {
  const double a = 1.0 / std::sqrt(2.0);
  DimerParams p;
  auto s = make_state(Bicomplex{a}, Bicomplex{a}, Bicomplex{1.0});
  auto o = observables(s, p);
  CHECK(max_abs(o.e_mf - Bicomplex{1.0}) < 1e-15);
  CHECK(o.mu == s.mu);

  p.g = -1.0;
  s = make_state(Bicomplex{a}, Bicomplex{a}, Bicomplex{1.5});
  o = observables(s, p);
  CHECK(o.e_mf.z0() == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(o.re_part.z0() == doctest::Approx(1.25).epsilon(1e-15));
  CHECK(std::fabs(o.im_part.z0()) < 1e-15);

  // A state with complex mu: both parts come out real.
  p.g = 0.0;
  p.gamma = 1.5;
  const double m = std::sqrt(1.5 * 1.5 - 1.0);
  const Complex ratio = Complex(0.0, m + 1.5);  // psi2/psi1 = (mu + i gamma)/v for mu = i m
  const double n1 = 1.0 / (1.0 + std::norm(ratio));
  s = make_state(Bicomplex{std::sqrt(n1)}, Bicomplex::from_complex_i(std::sqrt(n1) * ratio),
                 Bicomplex{0.0, 0.0, m, 0.0});
  REQUIRE(norm(residual(s.psi1(), s.psi2(), s.mu, p)) < 1e-14);
  REQUIRE(s.is_complex_state);
  o = observables(s, p);
  CHECK(std::fabs(o.re_part.z2()) < 1e-10);
  CHECK(std::fabs(o.im_part.z2()) < 1e-10);
  CHECK(o.im_part.z0() == doctest::Approx(m).epsilon(1e-14));
  CHECK(o.re_part.is_complex_in_i());
  CHECK(o.im_part.is_complex_in_i());
}

TEST_CASE("real and imaginary parts of a continued number") {
  const auto [re, im] = real_imag_parts(Bicomplex{1.0, 2.0, 3.0, 4.0});
  CHECK(max_abs(re - Bicomplex{1.0, 0.0, 2.0, 0.0}) < 1e-15);
  CHECK(max_abs(im - Bicomplex{3.0, 0.0, 4.0, 0.0}) < 1e-15);
  const auto [r2, i2] = real_imag_parts(Bicomplex{-0.5, 0.0, 0.25, 0.0});
  CHECK(r2 == Bicomplex{-0.5});
  CHECK(i2 == Bicomplex{0.25});
}

TEST_CASE("complex-state test and PT classification") {
  const double a = 1.0 / std::sqrt(2.0);
  const auto sym = make_state(Bicomplex{a}, Bicomplex{a}, Bicomplex{0.5});
  CHECK(sym.is_complex_state);
  CHECK(pt_classify(sym) == std::optional<bool>(true));

  const auto unequal = make_state(Bicomplex{0.9}, Bicomplex{std::sqrt(0.19)}, Bicomplex{0.5});
  CHECK(pt_classify(unequal) == std::optional<bool>(false));

  const auto cont = make_state(Bicomplex{a}, Bicomplex{a, 0.1, 0.0, 0.0}, Bicomplex{0.5});
  CHECK_FALSE(cont.is_complex_state);
  CHECK_FALSE(pt_classify(cont).has_value());
  CHECK_FALSE(cont.is_pt_symmetric);

  std::array<Bicomplex, 2> psi{Bicomplex{a}, Bicomplex{a}};
  CHECK(is_complex_state(psi, Bicomplex{0.0, 1e-9, 0.0, 0.0}));
  CHECK_FALSE(is_complex_state(psi, Bicomplex{0.0, 1e-7, 0.0, 0.0}));
  CHECK_FALSE(is_complex_state(psi, Bicomplex{0.0, 1e-9, 0.0, 0.0}, 1e-10));
}

TEST_CASE("broken states just above the pitchfork") {
  DimerParams p;
  p.g = -1.0;
  p.gamma = oracle::pitchfork_gamma(1.0, -1.0) + 0.02;
  const auto states = find_all_states(DimerModel{}, p);
  const auto dense = oracle::dense_states(p, 2000);
  int broken = 0;
  for (const auto& s : states) {
    if (!s.is_complex_state || s.is_pt_symmetric) continue;
    ++broken;
    CHECK(pt_classify(s) == std::optional<bool>(false));
    // The reference populations of the same state differ as well.
    const auto f = oracle::fingerprint(s.psi1(), s.psi2(), s.mu);
    double best = 1e9;
    const oracle::Fingerprint* match = nullptr;
    for (const auto& d : dense)
      if (oracle::distance(f, d) < best) {
        best = oracle::distance(f, d);
        match = &d;
      }
    REQUIRE(match);
    CHECK(best < 1e-6);
    CHECK(std::fabs((*match)[4] - (*match)[8]) > 1e-3);
  }
  CHECK(broken == 2);
}

TEST_CASE("PT reflection maps solutions to solutions") {
  for (double g : {-1.0, 0.5}) {
    for (double gamma : {0.3, 0.95, 1.3}) {
      DimerParams p;
      p.g = g;
      p.gamma = gamma;
      for (const auto& s : find_all_states(DimerModel{}, p)) {
        const auto r = pt_reflect(s);
        CHECK(norm(residual(r.psi1(), r.psi2(), r.mu, p)) < 1e-10);
      }
    }
  }
}

TEST_CASE("linear two-level model") {
  for (double gamma : {0.0, 0.5, 1.0, 1.5}) {
    for (Complex s : {Complex(0.0), Complex(0.2, 0.0), Complex(0.1, 0.3)}) {
      const auto [l1, l2] = LinearTwoLevelModel::eigenvalues(1.0, gamma, s);
      const auto ref = oracle::linear_eigenvalues(1.0, gamma, s);
      const bool same = std::abs(l1 - ref[0]) < 1e-14 && std::abs(l2 - ref[1]) < 1e-14;
      const bool swapped = std::abs(l1 - ref[1]) < 1e-14 && std::abs(l2 - ref[0]) < 1e-14;
      CHECK((same || swapped));
    }
  }
  // Its residual ignores g.
  const LinearTwoLevelModel linear;
  const auto s = symmetric_state(1.0, 0.0, 0.5, -1);
  DimerParams p;
  p.gamma = 0.5;
  p.g = 3.0;
  std::array<Bicomplex, 2> out;
  linear.residual(s.psi, s.mu, p, out);
  CHECK(std::max(max_abs(out[0]), max_abs(out[1])) < 1e-15);
}
