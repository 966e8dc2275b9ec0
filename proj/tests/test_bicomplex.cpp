#include "doctest.h"

#include <numbers>

#include "bicomplex_properties.hpp"
#include "oracles.hpp"

using ptdimer::Bicomplex;
using ptdimer::Complex;

namespace {

const Bicomplex one{1.0};
const Bicomplex I = Bicomplex::unit_i();
const Bicomplex J = Bicomplex::unit_j();
const Bicomplex K = Bicomplex::unit_k();
const Bicomplex Ep = Bicomplex::e_plus();
const Bicomplex Em = Bicomplex::e_minus();

bool near(const Bicomplex& a, const Bicomplex& b, double tol = 1e-15) { return ptdimer::max_abs(a - b) <= tol; }

}  // namespace

TEST_CASE("unit products") {
  CHECK(I * J == K);
  CHECK(J * I == K);
  CHECK(I * I == Bicomplex{-1.0});
  CHECK(J * J == Bicomplex{-1.0});
  CHECK(K * K == one);
  CHECK(I * K == -J);
  CHECK(J * K == -I);
  CHECK((one + J) * (one + J) == 2.0 * J);
}

TEST_CASE("product agrees with the unit table") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int n = 0; n < 500; ++n) {
    const Bicomplex a{u(rng), u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng), u(rng)};
    CHECK(near(a * b, oracle::table_multiply(a, b), 1e-12));
  }
}

TEST_CASE("idempotent elements") {
  CHECK(Ep * Ep == Ep);
  CHECK(Em * Em == Em);
  CHECK(Ep * Em == Bicomplex{0.0});
  CHECK(Ep + Em == one);

  const auto p = Bicomplex{1.0, 2.0, 3.0, 4.0}.to_idempotent();
  CHECK(p.plus == Complex(1.0 + 4.0, 3.0 - 2.0));
  CHECK(p.minus == Complex(1.0 - 4.0, 3.0 + 2.0));
  CHECK(Bicomplex::from_idempotent(p) == Bicomplex{1.0, 2.0, 3.0, 4.0});

  CHECK(Bicomplex{2.0, 0.0, -1.5, 0.0}.is_complex_in_i());
  CHECK_FALSE(J.is_complex_in_i());
  const auto q = Bicomplex{2.0, 0.0, -1.5, 0.0}.to_idempotent();
  CHECK(q.plus == q.minus);
}

TEST_CASE("division") {
  CHECK(K / K == one);
  CHECK_THROWS_AS(one / Ep, ptdimer::ZeroDivisor);
  CHECK_THROWS_AS(one / Em, ptdimer::ZeroDivisor);
  CHECK_THROWS_AS(one / Bicomplex{0.0}, ptdimer::ZeroDivisor);
  CHECK(near((2.0 * Ep + 4.0 * Em) / (Ep + 2.0 * Em), Bicomplex{2.0}));
  // Tiny but nonzero components are not the algebra's business.
  CHECK_NOTHROW(one / (Ep + 1e-10 * Em));
}

TEST_CASE("conjugation") {
  CHECK(ptdimer::conj(I) == -I);
  CHECK(ptdimer::conj(J) == J);
  CHECK(ptdimer::conj(K) == -K);
  // (1/2, 0, 0, 1/2) -> (1/2, 0, 0, -1/2)
  CHECK(ptdimer::conj(Ep) == Em);
  CHECK(ptdimer::conj(Em) == Ep);
  CHECK(ptdimer::conj(Bicomplex{1, 2, 3, 4}) == Bicomplex{1, 2, -3, -4});
}

TEST_CASE("modulus squared") {
  CHECK(ptdimer::modulus_squared(I) == one);
  CHECK(ptdimer::modulus_squared(Ep) == Bicomplex{0.0});
  CHECK(ptdimer::modulus_squared(one + I) == Bicomplex{2.0});
  const Bicomplex a{0.3, -1.1, 0.7, 2.0};
  CHECK(near(ptdimer::modulus_squared(a), oracle::table_multiply(ptdimer::conj(a), a), 1e-14));
}

TEST_CASE("phase_j") {
  CHECK(ptdimer::phase_j(0.0) == one);
  CHECK(near(ptdimer::phase_j(std::numbers::pi / 2), J));
  CHECK(near(ptdimer::phase_j(std::numbers::pi), Bicomplex{-1.0}));
}

TEST_CASE("lift_real_control") {
  using ptdimer::lift_real_control;
  CHECK(lift_real_control(1, 0).plus == Complex(1, 0));
  CHECK(lift_real_control(1, 0).minus == Complex(1, 0));
  CHECK(lift_real_control(0, 1).plus == Complex(0, -1));
  CHECK(lift_real_control(0, 1).minus == Complex(0, 1));
  const auto p = lift_real_control(2, 3);
  CHECK(p.plus == Complex(2, -3));
  CHECK(p.minus == Complex(2, 3));
  CHECK(std::conj(p.plus) == p.minus);
  // The lift of c0 + j c1 is the idempotent form of that bicomplex number.
  CHECK(Bicomplex{2, 3, 0, 0}.to_idempotent() == p);
}

TEST_CASE("randomized ring, homomorphism and conjugation properties") {
  const auto rep = props::run(10000);
  INFO("worst normalized error " << rep.worst);
  for (const auto& f : rep.failures) FAIL_CHECK(f);
  CHECK(rep.failures.empty());
  CHECK(rep.checks >= 10000);
}
