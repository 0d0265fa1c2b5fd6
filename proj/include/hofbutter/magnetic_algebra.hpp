#pragma once

// Rational fluxes, the clock-and-shift pair (S, T) and the q x q Bloch
// Hamiltonian of the triangular-lattice Hofstadter model
//
//   H(k) = t1 e^{ik2} T + t3 w_u e^{i(k1+k2)} T S + t2 e^{ik1} S + h.c.
//
// with S = diag(w, w^2, ..., w^q), T the cyclic shift, w = exp(2 pi i p/q).
// Setting t3 = 0 gives the square (rectangular for t1 != t2) model.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

#include "hofbutter/eigensolver.hpp"

namespace hofbutter {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Reduces an angle to [-pi, pi).
inline double wrap_angle(double x) {
  double r = std::fmod(x + std::numbers::pi, two_pi);
  if (r < 0) r += two_pi;
  return r - std::numbers::pi;
}

/// s in [1, q] with s*p = 1 (mod q); s = 1 when q = 1.
inline std::int64_t modular_inverse(std::int64_t p, std::int64_t q) {
  if (p <= 0 || q <= 0) throw std::invalid_argument("modular_inverse: p and q must be positive");
  if (std::gcd(p, q) != 1) {
    throw std::invalid_argument("modular_inverse: gcd(" + std::to_string(p) + ", " +
                                std::to_string(q) + ") != 1");
  }
  if (q == 1) return 1;
  // extended Euclid on (p mod q, q)
  std::int64_t r0 = q, r1 = p % q, s0 = 0, s1 = 1;
  while (r1 != 0) {
    const std::int64_t quot = r0 / r1;
    std::tie(r0, r1) = std::make_pair(r1, r0 - quot * r1);
    std::tie(s0, s1) = std::make_pair(s1, s0 - quot * s1);
  }
  std::int64_t s = s0 % q;
  if (s <= 0) s += q;
  return s;
}

/// Reduced flux 2 pi p / q with 1 <= p <= q, gcd(p, q) = 1.
class Flux {
 public:
  Flux(std::int64_t p, std::int64_t q) : p_(p), q_(q) {
    if (q < 1 || p < 1 || p > q) {
      throw std::invalid_argument("Flux: need 1 <= p <= q, got p=" + std::to_string(p) +
                                  " q=" + std::to_string(q));
    }
    if (std::gcd(p, q) != 1) {
      throw std::invalid_argument("Flux: p/q not reduced: " + std::to_string(p) + "/" +
                                  std::to_string(q));
    }
    s_ = modular_inverse(p, q);
  }

  std::int64_t p() const { return p_; }
  std::int64_t q() const { return q_; }
  std::int64_t s() const { return s_; }
  double phi() const { return two_pi * static_cast<double>(p_) / static_cast<double>(q_); }

  /// w^m, evaluated from the exact residue p*m mod q.
  cplx omega_power(std::int64_t m) const {
    std::int64_t r = (p_ * (m % q_)) % q_;
    if (r < 0) r += q_;
    return std::polar(1.0, two_pi * static_cast<double>(r) / static_cast<double>(q_));
  }
  cplx omega() const { return omega_power(1); }

  /// The flux -Phi, i.e. (q - p)/q; 1/1 maps to itself.
  Flux inverted() const { return p_ == q_ ? *this : Flux(q_ - p_, q_); }

  friend bool operator==(const Flux& a, const Flux& b) { return a.p_ == b.p_ && a.q_ == b.q_; }

 private:
  std::int64_t p_, q_, s_;
};

struct BlochMomentum {
  double k1 = 0.0;
  double k2 = 0.0;
};

struct Hopping {
  double t1 = 1.0;  // T
  double t2 = 1.0;  // S
  double t3 = 1.0;  // w_u T S
};

struct HofstadterModel {
  Flux flux;
  double phi_d = std::numbers::pi / 2;  // flux through the down triangle
  Hopping t{};

  HofstadterModel(Flux f, double phid = std::numbers::pi / 2, Hopping hop = {})
      : flux(f), phi_d(phid), t(hop) {
    if (t.t1 < 0 || t.t2 < 0 || t.t3 < 0) throw std::invalid_argument("hopping amplitudes must be >= 0");
  }

  // w_d is the phase accumulated clockwise around a down triangle, exp(-i phi_d).
  cplx omega_d() const { return std::polar(1.0, -phi_d); }
  // w_u = w / w_d, always derived
  cplx omega_u() const { return std::polar(1.0, wrap_angle(flux.phi() + phi_d)); }
  /// w_u^q, computed from the reduced angle q*phi_d (w^q = 1 exactly).
  cplx omega_u_pow_q() const {
    return std::polar(1.0, wrap_angle(static_cast<double>(flux.q()) * phi_d));
  }

  bool isotropic() const { return t.t1 == 1.0 && t.t2 == 1.0 && t.t3 == 1.0; }
  /// phi_d = +-pi/2 (mod 2 pi) within 1e-12.
  bool inversion_symmetric() const {
    return std::abs(std::abs(wrap_angle(phi_d)) - std::numbers::pi / 2) < 1e-12;
  }
  /// Upper bound on the spectral radius: six unitary hopping terms.
  double energy_bound() const { return 2.0 * (t.t1 + t.t2 + t.t3); }
};

/// S = diag(w, ..., w^q) and T with ones on the subdiagonal and top-right corner.
inline std::pair<HermitianMatrix, HermitianMatrix> clock_shift(const Flux& f) {
  const auto q = static_cast<Eigen::Index>(f.q());
  HermitianMatrix s = HermitianMatrix::Zero(q, q);
  HermitianMatrix t = HermitianMatrix::Zero(q, q);
  for (Eigen::Index m = 0; m < q; ++m) s(m, m) = f.omega_power(m + 1);
  for (Eigen::Index m = 1; m < q; ++m) t(m, m - 1) = 1.0;
  t(0, q - 1) += 1.0;
  return {s, t};
}

namespace detail {

// Coefficients of the non-Hermitian half A, H = A + A^dagger:
//   A(i, i-1) = t1 e^{ik2} + t3 w_u e^{i(k1+k2)} w^i,   A(i, i) = t2 e^{ik1} w^{i+1}.
struct HalfTerms {
  cplx shift;     // t1 e^{ik2}
  cplx shift_s;   // t3 w_u e^{i(k1+k2)}
  cplx clock;     // t2 e^{ik1}
};

inline HalfTerms half_terms(const HofstadterModel& m, BlochMomentum k) {
  const cplx e1 = std::polar(1.0, wrap_angle(k.k1));
  const cplx e2 = std::polar(1.0, wrap_angle(k.k2));
  return {m.t.t1 * e2, m.t.t3 * m.omega_u() * e1 * e2, m.t.t2 * e1};
}

inline HermitianMatrix assemble(const Flux& f, const HalfTerms& c) {
  const auto q = static_cast<Eigen::Index>(f.q());
  HermitianMatrix a = HermitianMatrix::Zero(q, q);
  for (Eigen::Index i = 0; i < q; ++i) {
    const Eigen::Index j = (i + q - 1) % q;
    a(i, j) += c.shift + c.shift_s * f.omega_power(i);
    a(i, i) += c.clock * f.omega_power(i + 1);
  }
  return a + a.adjoint();
}

}  // namespace detail

/// H(k) for any real k; momenta are reduced modulo 2 pi.
inline HermitianMatrix build_hamiltonian(const HofstadterModel& m, BlochMomentum k) {
  return detail::assemble(m.flux, detail::half_terms(m, k));
}

/// The same H(k) in cyclic-tridiagonal form, for the O(q^2) eigenvalue path.
inline CyclicTridiagonal build_cyclic(const HofstadterModel& m, BlochMomentum k) {
  const auto c = detail::half_terms(m, k);
  const std::int64_t q = m.flux.q();
  CyclicTridiagonal out;
  out.diag.resize(static_cast<std::size_t>(q));
  out.lower.resize(static_cast<std::size_t>(q));
  for (std::int64_t i = 0; i < q; ++i) {
    out.diag[i] = 2.0 * std::real(c.clock * m.flux.omega_power(i + 1));
    out.lower[i] = c.shift + c.shift_s * m.flux.omega_power(i);
  }
  if (q == 1) out.diag[0] += 2.0 * std::real(out.lower[0]);
  return out;
}

/// Exact partial derivatives dH/dk1 and dH/dk2 (every hopping carries its own k-phase).
inline std::pair<HermitianMatrix, HermitianMatrix> hamiltonian_derivatives(const HofstadterModel& m,
                                                                           BlochMomentum k) {
  const auto c = detail::half_terms(m, k);
  const cplx i{0.0, 1.0};
  const detail::HalfTerms d1{0.0, i * c.shift_s, i * c.clock};
  const detail::HalfTerms d2{i * c.shift, i * c.shift_s, 0.0};
  return {detail::assemble(m.flux, d1), detail::assemble(m.flux, d2)};
}

/// H in the gauge G = diag(e^{-i k2 m}) where k2 enters only through e^{i q k2}
/// in the corner, so the matrix is periodic on the magnetic Brillouin zone.
inline HermitianMatrix build_hamiltonian_bz(const HofstadterModel& m, BlochMomentum k) {
  HermitianMatrix h = build_hamiltonian(m, k);
  const auto q = h.rows();
  for (Eigen::Index r = 0; r < q; ++r) {
    for (Eigen::Index c = 0; c < q; ++c) {
      h(r, c) *= std::polar(1.0, -wrap_angle(k.k2 * static_cast<double>(r - c)));
    }
  }
  return h;
}

inline double max_abs(const HermitianMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline double hermiticity_residual(const HermitianMatrix& h) { return max_abs(h - h.adjoint()); }

/// Residuals of H(k) = T^{s*} H(k1 - 2pi/q, k2) T^s and H(k) = S^{s*} H(k1, k2 + 2pi/q) S^s.
inline std::pair<double, double> magnetic_symmetry_residual(const HofstadterModel& m, BlochMomentum k) {
  const auto [s, t] = clock_shift(m.flux);
  const double step = two_pi / static_cast<double>(m.flux.q());
  HermitianMatrix ts = HermitianMatrix::Identity(t.rows(), t.cols());
  HermitianMatrix ss = ts;
  for (std::int64_t n = 0; n < m.flux.s(); ++n) {
    ts = ts * t;
    ss = ss * s;
  }
  const HermitianMatrix h = build_hamiltonian(m, k);
  const double r1 = max_abs(h - ts.adjoint() * build_hamiltonian(m, {k.k1 - step, k.k2}) * ts);
  const double r2 = max_abs(h - ss.adjoint() * build_hamiltonian(m, {k.k1, k.k2 + step}) * ss);
  return {r1, r2};
}

}  // namespace hofbutter
