#include <catch_amalgamated.hpp>

#include <numbers>
#include <numeric>
#include <random>

#include "hofbutter/magnetic_algebra.hpp"
#include "oracles.hpp"

using namespace hofbutter;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double pi = std::numbers::pi;

HermitianMatrix identity(Eigen::Index n) { return HermitianMatrix::Identity(n, n); }

HermitianMatrix power(const HermitianMatrix& a, std::int64_t n) {
  HermitianMatrix r = identity(a.rows());
  for (std::int64_t i = 0; i < n; ++i) r = r * a;
  return r;
}

}  // namespace

TEST_CASE("modular inverse of small fluxes", "[algebra]") {
  CHECK(modular_inverse(1, 7) == 1);
  CHECK(modular_inverse(2, 5) == 3);
  CHECK(modular_inverse(5, 13) == 8);
  CHECK(modular_inverse(1, 1) == 1);
  CHECK(modular_inverse(3, 7) == 5);
}

TEST_CASE("modular inverse agrees with brute force up to q = 64", "[algebra]") {
  for (std::int64_t q = 1; q <= 64; ++q) {
    for (std::int64_t p = 1; p <= q; ++p) {
      if (std::gcd(p, q) != 1) continue;
      const auto s = modular_inverse(p, q);
      INFO(p << "/" << q);
      CHECK(s == oracle::modular_inverse(p, q));
      CHECK(s >= 1);
      CHECK(s <= q);
    }
  }
}

TEST_CASE("modular inverse and flux reject bad input", "[algebra]") {
  CHECK_THROWS_AS(modular_inverse(2, 4), std::invalid_argument);
  CHECK_THROWS_AS(modular_inverse(1, 0), std::invalid_argument);
  CHECK_THROWS_AS(Flux(2, 4), std::invalid_argument);
  CHECK_THROWS_AS(Flux(0, 3), std::invalid_argument);
  CHECK_THROWS_AS(Flux(4, 3), std::invalid_argument);
  CHECK_THROWS_AS(HofstadterModel(Flux(1, 3), pi / 2, {1, -1, 1}), std::invalid_argument);
}

TEST_CASE("flux carries its inverse and root of unity", "[algebra]") {
  const Flux f(3, 7);
  CHECK(f.s() == 5);
  CHECK((f.s() * f.p()) % f.q() == 1);
  CHECK_THAT(std::abs(f.omega()), WithinAbs(1.0, 1e-15));
  CHECK_THAT(std::abs(std::pow(f.omega(), 7) - 1.0), WithinAbs(0.0, 1e-12));
  CHECK(f.inverted() == Flux(4, 7));
  CHECK(Flux(1, 1).inverted() == Flux(1, 1));
}

TEST_CASE("clock and shift for q = 1 and q = 2", "[algebra]") {
  {
    const auto [s, t] = clock_shift(Flux(1, 1));
    CHECK_THAT(std::abs(s(0, 0) - 1.0), WithinAbs(0.0, 1e-15));
    CHECK_THAT(std::abs(t(0, 0) - 1.0), WithinAbs(0.0, 1e-15));
  }
  const auto [s, t] = clock_shift(Flux(1, 2));
  HermitianMatrix s_ref(2, 2), t_ref(2, 2);
  s_ref << -1, 0, 0, 1;
  t_ref << 0, 1, 1, 0;
  CHECK(max_abs(s - s_ref) < 1e-15);
  CHECK(max_abs(t - t_ref) < 1e-15);
}

TEST_CASE("clock and shift obey ST = w TS and S^q = T^q = 1 up to q = 64", "[algebra]") {
  double worst = 0;
  for (std::int64_t q = 1; q <= 64; ++q) {
    for (std::int64_t p = 1; p <= q; ++p) {
      if (std::gcd(p, q) != 1) continue;
      const Flux f(p, q);
      const auto [s, t] = clock_shift(f);
      worst = std::max({worst, max_abs(s * t - f.omega() * t * s), max_abs(power(s, q) - identity(q)),
                        max_abs(power(t, q) - identity(q))});
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("1x1 Hamiltonians", "[algebra]") {
  const HofstadterModel square(Flux(1, 1), pi / 2, {1, 1, 0});
  CHECK_THAT(build_hamiltonian(square, {0, 0})(0, 0).real(), WithinAbs(4.0, 1e-14));

  for (double phi_d : {0.0, 0.4, pi / 2, -1.3}) {
    const HofstadterModel tri(Flux(1, 1), phi_d);
    CHECK_THAT(std::abs(tri.omega_u() * tri.omega_d() - tri.flux.omega()), WithinAbs(0.0, 1e-12));
    const auto h = build_hamiltonian(tri, {0, 0});
    CHECK_THAT(h(0, 0).real(), WithinAbs(4.0 + 2.0 * tri.omega_u().real(), 1e-14));
    CHECK_THAT(h(0, 0).imag(), WithinAbs(0.0, 1e-14));
  }
}

TEST_CASE("Hamiltonian is Hermitian and bounded by the hopping sum", "[algebra]") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(-pi, pi), hop(0.0, 2.0);
  std::uniform_int_distribution<std::int64_t> dq(1, 17);
  for (int n = 0; n < 100; ++n) {
    const auto q = dq(rng);
    std::uniform_int_distribution<std::int64_t> dp(1, q);
    auto p = dp(rng);
    while (std::gcd(p, q) != 1) p = dp(rng);
    const HofstadterModel m(Flux(p, q), angle(rng), {hop(rng), hop(rng), hop(rng)});
    const BlochMomentum k{angle(rng), angle(rng)};
    const auto h = build_hamiltonian(m, k);
    CHECK(hermiticity_residual(h) <= 1e-12);
    const auto e = eigenvalues_dense(h);
    CHECK(std::max(std::abs(e.front()), std::abs(e.back())) <= m.energy_bound() + 1e-12);
  }
}

TEST_CASE("magnetic translations", "[algebra]") {
  const auto q1 = magnetic_symmetry_residual(HofstadterModel(Flux(1, 1)), {0.3, -1.1});
  CHECK(q1.first <= 1e-14);
  CHECK(q1.second <= 1e-14);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-pi, pi);
  for (auto f : {Flux(1, 3), Flux(3, 7), Flux(5, 13), Flux(7, 64)}) {
    for (int n = 0; n < 10; ++n) {
      const auto [r1, r2] = magnetic_symmetry_residual(HofstadterModel(f), {u(rng), u(rng)});
      CHECK(r1 <= 1e-12);
      CHECK(r2 <= 1e-12);
    }
  }
}

TEST_CASE("square model spectrum ignores the down-triangle flux", "[algebra]") {
  const BlochMomentum k{0.37, -0.81};
  const auto ref = eigenvalues_dense(build_hamiltonian(HofstadterModel(Flux(2, 7), 0.0, {1, 0.7, 0}), k));
  for (double phi_d : {0.5, pi / 2, 2.9}) {
    const auto e = eigenvalues_dense(build_hamiltonian(HofstadterModel(Flux(2, 7), phi_d, {1, 0.7, 0}), k));
    for (std::size_t i = 0; i < e.size(); ++i) CHECK_THAT(e[i], WithinAbs(ref[i], 1e-12));
  }
}

TEST_CASE("cyclic tridiagonal form reproduces the dense matrix", "[algebra]") {
  for (auto f : {Flux(1, 1), Flux(1, 2), Flux(2, 3), Flux(4, 9), Flux(11, 32)}) {
    const HofstadterModel m(f, 0.7, {1.0, 0.8, 0.6});
    const BlochMomentum k{1.3, -0.4};
    CHECK(max_abs(build_cyclic(m, k).dense() - build_hamiltonian(m, k)) <= 1e-14);
    const auto dense = eigenvalues_dense(build_hamiltonian(m, k));
    const auto banded = eigenvalues(build_cyclic(m, k));
    REQUIRE(dense.size() == banded.size());
    for (std::size_t i = 0; i < dense.size(); ++i) CHECK_THAT(banded[i], WithinAbs(dense[i], 1e-11));
  }
}

TEST_CASE("analytic derivatives match central differences", "[algebra]") {
  const HofstadterModel m(Flux(3, 8), 0.9, {1.0, 1.2, 0.5});
  const BlochMomentum k{0.2, 0.9};
  const double h = 1e-5;
  const auto [d1, d2] = hamiltonian_derivatives(m, k);
  const HermitianMatrix f1 = (build_hamiltonian(m, {k.k1 + h, k.k2}) - build_hamiltonian(m, {k.k1 - h, k.k2})) / (2 * h);
  const HermitianMatrix f2 = (build_hamiltonian(m, {k.k1, k.k2 + h}) - build_hamiltonian(m, {k.k1, k.k2 - h})) / (2 * h);
  CHECK(max_abs(d1 - f1) <= 1e-8);
  CHECK(max_abs(d2 - f2) <= 1e-8);
}

TEST_CASE("magnetic-zone gauge is unitarily equivalent and periodic", "[algebra]") {
  const HofstadterModel m(Flux(2, 5));
  const BlochMomentum k{0.3, 0.1};
  const auto a = eigenvalues_dense(build_hamiltonian(m, k));
  const auto b = eigenvalues_dense(build_hamiltonian_bz(m, k));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK_THAT(a[i], WithinAbs(b[i], 1e-12));
  const double period = 2 * pi / 5;
  CHECK(max_abs(build_hamiltonian_bz(m, k) - build_hamiltonian_bz(m, {k.k1, k.k2 + period})) <= 1e-12);
}
