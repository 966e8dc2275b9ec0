#pragma once

#include <cmath>
#include <complex>
#include <ostream>
#include <stdexcept>

namespace ptdimer {

using Complex = std::complex<double>;

/// Thrown when dividing by a bicomplex number with a vanishing idempotent
/// component (a zero divisor of the ring).
class ZeroDivisor : public std::domain_error {
public:
  ZeroDivisor() : std::domain_error("bicomplex division by a zero divisor") {}
};

/// Coefficients of e+ and e- in the C_i representation.
struct IdempotentPair {
  Complex plus;
  Complex minus;

  friend bool operator==(const IdempotentPair&, const IdempotentPair&) = default;
};

/// A bicomplex number z0 + j z1 + i z2 + k z3 with i^2 = j^2 = -1, k = ij, k^2 = 1.
///
/// The four real components are the canonical storage. The idempotent pair
/// is derived on demand:
///   plus  = (z0 + z3) + (z2 - z1) i
///   minus = (z0 - z3) + (z2 + z1) i
/// Ring operations act independently on plus and minus; conjugation (the one
/// that flips the sign of the i and k parts) swaps and complex-conjugates them.
class Bicomplex {
public:
  constexpr Bicomplex() = default;
  constexpr Bicomplex(double real) : z_{real, 0.0, 0.0, 0.0} {}  // NOLINT(implicit)
  constexpr Bicomplex(double z0, double z1, double z2, double z3) : z_{z0, z1, z2, z3} {}

  /// Embeds an ordinary complex number a + b i (no j or k part).
  static constexpr Bicomplex from_complex_i(Complex c) { return {c.real(), 0.0, c.imag(), 0.0}; }

  static Bicomplex from_idempotent(const IdempotentPair& p) {
    const double z0 = 0.5 * (p.plus.real() + p.minus.real());
    const double z3 = 0.5 * (p.plus.real() - p.minus.real());
    const double z2 = 0.5 * (p.plus.imag() + p.minus.imag());
    const double z1 = 0.5 * (p.minus.imag() - p.plus.imag());
    return {z0, z1, z2, z3};
  }

  static constexpr Bicomplex unit_i() { return {0.0, 0.0, 1.0, 0.0}; }
  static constexpr Bicomplex unit_j() { return {0.0, 1.0, 0.0, 0.0}; }
  static constexpr Bicomplex unit_k() { return {0.0, 0.0, 0.0, 1.0}; }
  static constexpr Bicomplex e_plus() { return {0.5, 0.0, 0.0, 0.5}; }
  static constexpr Bicomplex e_minus() { return {0.5, 0.0, 0.0, -0.5}; }

  constexpr double operator[](int idx) const { return z_[idx]; }
  constexpr double z0() const { return z_[0]; }
  constexpr double z1() const { return z_[1]; }
  constexpr double z2() const { return z_[2]; }
  constexpr double z3() const { return z_[3]; }

  Complex plus() const { return {z_[0] + z_[3], z_[2] - z_[1]}; }
  Complex minus() const { return {z_[0] - z_[3], z_[2] + z_[1]}; }
  IdempotentPair to_idempotent() const { return {plus(), minus()}; }

  /// True iff the j and k parts vanish, i.e. the number lives in C_i.
  constexpr bool is_complex_in_i() const { return z_[1] == 0.0 && z_[3] == 0.0; }
  /// The C_i part z0 + z2 i, discarding j and k.
  constexpr Complex complex_part() const { return {z_[0], z_[2]}; }

  constexpr Bicomplex operator-() const { return {-z_[0], -z_[1], -z_[2], -z_[3]}; }

  constexpr Bicomplex& operator+=(const Bicomplex& o) {
    for (int n = 0; n < 4; ++n) z_[n] += o.z_[n];
    return *this;
  }
  constexpr Bicomplex& operator-=(const Bicomplex& o) {
    for (int n = 0; n < 4; ++n) z_[n] -= o.z_[n];
    return *this;
  }
  constexpr Bicomplex& operator*=(double s) {
    for (double& c : z_) c *= s;
    return *this;
  }
  constexpr Bicomplex& operator*=(const Bicomplex& o) { return *this = *this * o; }
  Bicomplex& operator/=(const Bicomplex& o) { return *this = *this / o; }

  friend constexpr Bicomplex operator+(Bicomplex a, const Bicomplex& b) { return a += b; }
  friend constexpr Bicomplex operator-(Bicomplex a, const Bicomplex& b) { return a -= b; }
  friend constexpr Bicomplex operator*(Bicomplex a, double s) { return a *= s; }
  friend constexpr Bicomplex operator*(double s, Bicomplex a) { return a *= s; }

  // Expanded with ij = k, ik = -j, jk = -i, k^2 = 1. Keeps C_i inputs exactly in C_i.
  friend constexpr Bicomplex operator*(const Bicomplex& a, const Bicomplex& b) {
    const auto& x = a.z_;
    const auto& y = b.z_;
    return {x[0] * y[0] - x[1] * y[1] - x[2] * y[2] + x[3] * y[3],
            x[0] * y[1] + x[1] * y[0] - x[2] * y[3] - x[3] * y[2],
            x[0] * y[2] + x[2] * y[0] - x[1] * y[3] - x[3] * y[1],
            x[0] * y[3] + x[3] * y[0] + x[1] * y[2] + x[2] * y[1]};
  }

  /// Component-wise in the idempotent basis. Throws ZeroDivisor if either
  /// idempotent component of the divisor is exactly zero.
  friend Bicomplex operator/(const Bicomplex& a, const Bicomplex& b) {
    const Complex bp = b.plus();
    const Complex bm = b.minus();
    if (bp == Complex{} || bm == Complex{}) throw ZeroDivisor();
    return from_idempotent({a.plus() / bp, a.minus() / bm});
  }

  friend constexpr bool operator==(const Bicomplex&, const Bicomplex&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Bicomplex& z) {
    return os << '(' << z.z_[0] << ", " << z.z_[1] << ", " << z.z_[2] << ", " << z.z_[3] << ')';
  }

private:
  double z_[4]{0.0, 0.0, 0.0, 0.0};
};

/// Physical conjugation: flips the sign of the i and k components.
/// In the idempotent basis: conj(z)+ = bar(z-), conj(z)- = bar(z+).
constexpr Bicomplex conj(const Bicomplex& a) { return {a.z0(), a.z1(), -a.z2(), -a.z3()}; }

/// conj(a) * a. Always has vanishing i and k parts.
constexpr Bicomplex modulus_squared(const Bicomplex& a) {
  const double p = a.z0() * a.z0() - a.z1() * a.z1() + a.z2() * a.z2() - a.z3() * a.z3();
  const double q = 2.0 * (a.z0() * a.z1() + a.z2() * a.z3());
  return {p, q, 0.0, 0.0};
}

/// cos(phi) + j sin(phi).
inline Bicomplex phase_j(double phi) { return {std::cos(phi), std::sin(phi), 0.0, 0.0}; }

/// A real control continued into j, c0 + j c1, written in the idempotent basis.
inline IdempotentPair lift_real_control(double c0, double c1) { return {{c0, -c1}, {c0, c1}}; }

/// Largest absolute component.
inline double max_abs(const Bicomplex& a) {
  return std::fmax(std::fmax(std::fabs(a.z0()), std::fabs(a.z1())),
                   std::fmax(std::fabs(a.z2()), std::fabs(a.z3())));
}

}  // namespace ptdimer
