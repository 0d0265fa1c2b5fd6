#pragma once

// Invariant suites behind `hofbutter verify`. Each check is cheap (the whole
// set runs in seconds) and seeded, so a failure reproduces.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hofbutter/chern.hpp"
#include "hofbutter/diophantine.hpp"
#include "hofbutter/magnetic_algebra.hpp"
#include "hofbutter/spectrum.hpp"

namespace hofbutter {

struct Check {
  std::string suite;
  std::string name;
  bool passed = false;
  std::string detail;
};

namespace detail {

inline constexpr std::uint64_t verify_seed = 20240917;

inline Flux random_flux(std::mt19937_64& rng, std::int64_t q_lo, std::int64_t q_hi) {
  std::uniform_int_distribution<std::int64_t> dq(q_lo, q_hi);
  for (;;) {
    const auto q = dq(rng);
    std::uniform_int_distribution<std::int64_t> dp(1, q);
    const auto p = dp(rng);
    if (std::gcd(p, q) == 1) return {p, q};
  }
}

inline BlochMomentum random_k(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
  const double k1 = u(rng);
  return {k1, u(rng)};
}

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}

inline Check bound_check(std::string suite, std::string name, double worst, double tol) {
  return {std::move(suite), std::move(name), worst <= tol, "worst " + fmt(worst) + " (tol " + fmt(tol) + ")"};
}

}  // namespace detail

inline std::vector<Check> verify_algebra() {
  std::vector<Check> out;
  std::mt19937_64 rng(detail::verify_seed);

  double worst = 0.0;
  for (std::int64_t q = 1; q <= 16; ++q) {
    for (std::int64_t p = 1; p <= q; ++p) {
      if (std::gcd(p, q) != 1) continue;
      const Flux f(p, q);
      const auto [s, t] = clock_shift(f);
      const HermitianMatrix id = HermitianMatrix::Identity(q, q);
      HermitianMatrix sq = id, tq = id;
      for (std::int64_t n = 0; n < q; ++n) sq = sq * s, tq = tq * t;
      worst = std::max({worst, max_abs(s * t - f.omega() * t * s), max_abs(sq - id), max_abs(tq - id)});
    }
  }
  out.push_back(detail::bound_check("algebra", "clock_shift_relations", worst, 1e-12));

  double herm = 0.0, sym = 0.0, cyc = 0.0;
  for (int n = 0; n < 40; ++n) {
    const auto f = detail::random_flux(rng, 1, 13);
    std::uniform_real_distribution<double> phi(-std::numbers::pi, std::numbers::pi), hop(0.2, 1.5);
    const double phi_d = phi(rng);
    const Hopping t{hop(rng), hop(rng), hop(rng)};
    const HofstadterModel m(f, phi_d, t);
    const auto k = detail::random_k(rng);
    const auto h = build_hamiltonian(m, k);
    herm = std::max(herm, hermiticity_residual(h));
    const auto [r1, r2] = magnetic_symmetry_residual(m, k);
    sym = std::max({sym, r1, r2});
    const auto dense = eigenvalues_dense(h);
    const auto banded = eigenvalues(build_cyclic(m, k));
    for (std::size_t i = 0; i < dense.size(); ++i) cyc = std::max(cyc, std::abs(dense[i] - banded[i]));
  }
  out.push_back(detail::bound_check("algebra", "hermiticity", herm, 1e-12));
  out.push_back(detail::bound_check("algebra", "magnetic_translation_symmetry", sym, 1e-12));
  out.push_back(detail::bound_check("algebra", "banded_vs_dense_eigenvalues", cyc, 1e-10));
  return out;
}

inline std::vector<Check> verify_chambers() {
  std::vector<Check> out;
  std::mt19937_64 rng(detail::verify_seed + 1);
  std::uniform_real_distribution<double> phi(-std::numbers::pi, std::numbers::pi);

  double dev = 0.0;
  for (int n = 0; n < 20; ++n) {
    const HofstadterModel m(detail::random_flux(rng, 1, 12), phi(rng));
    dev = std::max(dev, chambers_polynomial(m, 5, rng()).max_deviation);
  }
  out.push_back(detail::bound_check("chambers", "polynomial_k_independent", dev, 1e-9));

  double det = 0.0;
  for (int n = 0; n < 100; ++n) {
    const HofstadterModel m(detail::random_flux(rng, 1, 12));
    const auto k = detail::random_k(rng);
    det = std::max(det, std::abs(det_closed_form(m, k) - direct_determinant(m, k)));
  }
  out.push_back(detail::bound_check("chambers", "closed_form_determinant", det, 1e-9));

  double edge = 0.0;
  for (std::int64_t q : {3, 4, 5, 7, 8}) {
    for (std::int64_t p = 1; p < q; ++p) {
      if (std::gcd(p, q) != 1) continue;
      const HofstadterModel m({p, q});
      const auto a = compute_bands(m).bands;
      const auto b = compute_bands_dense(m, 64).bands;
      for (std::size_t i = 0; i < a.size(); ++i) {
        edge = std::max({edge, std::abs(a[i].first - b[i].first), std::abs(a[i].second - b[i].second)});
      }
    }
  }
  out.push_back(detail::bound_check("chambers", "band_edge_kpoints_vs_dense_scan", edge, 1e-6));

  double inv = 0.0;
  for (auto [p, q] : std::vector<std::pair<std::int64_t, std::int64_t>>{
           {1, 3}, {1, 4}, {2, 5}, {1, 6}, {3, 7}, {3, 8}, {4, 9}, {3, 10}, {5, 11}, {5, 13}}) {
    inv = std::max(inv, inversion_check(HofstadterModel({p, q})));
  }
  out.push_back(detail::bound_check("chambers", "inversion_negates_spectrum", inv, 1e-10));
  return out;
}

inline std::vector<Check> verify_chern() {
  std::vector<Check> out;
  const std::vector<HofstadterModel> models{
      HofstadterModel({1, 3}), HofstadterModel({2, 5}), HofstadterModel({1, 4}), HofstadterModel({3, 7}),
      HofstadterModel({2, 3}, std::numbers::pi / 2, {1, 1, 0}), HofstadterModel({2, 5}, std::numbers::pi / 2, {1, 1, 0})};

  bool dioph = true, zero = true, residue = true, agree = true;
  std::string where;
  for (const auto& m : models) {
    const auto f = m.flux;
    const auto tag = std::to_string(f.p()) + "/" + std::to_string(f.q()) + (m.t.t3 == 0 ? " square" : "");
    const auto gaps = compute_gaps(compute_bands_checked(m));
    for (const auto& g : gaps) {
      if (g.outer() || g.closed) continue;
      const auto sigma = gap_cherns_fhs(m, {g.j}).front().value;
      if (!solve_residue(g.j, f).contains(sigma)) dioph = false, where += " dioph@" + tag;
    }
    const auto groups = band_group_cherns(m, gaps);
    std::int64_t sum = 0;
    for (const auto& b : groups) sum += b.result.value;
    if (sum != 0) zero = false, where += " sum@" + tag;
    if (f.q() > 5) continue;  // transport is the expensive part
    for (const auto& b : groups) {
      if (b.first != b.last) continue;  // isolated bands only
      const auto tr = band_chern_transport(m, b.first);
      const auto want = ((f.s() % f.q()) + f.q()) % f.q();
      if (tr.residue != want) residue = false, where += " residue@" + tag;
      const auto fhs = ((b.result.value % f.q()) + f.q()) % f.q();
      if (fhs != tr.residue) agree = false, where += " methods@" + tag;
    }
  }
  out.push_back({"chern", "gap_chern_diophantine_identity", dioph, where});
  out.push_back({"chern", "band_cherns_sum_to_zero", zero, where});
  out.push_back({"chern", "transport_residue_equals_s", residue, where});
  out.push_back({"chern", "fhs_mod_q_matches_transport", agree, where});
  return out;
}

inline std::vector<Check> verify_diophantine() {
  std::vector<Check> out;
  bool round_trip = true, chain_agrees = true, distinct = true;
  for (std::int64_t q = 1; q <= 64; ++q) {
    const auto sw = square_window(q);
    const auto tw = triangular_window(q);
    for (std::int64_t p = 1; p <= q; ++p) {
      if (std::gcd(p, q) != 1) continue;
      const Flux f(p, q);
      for (std::int64_t sigma = -(q - 1) / 2; sigma <= (q - 1) / 2; ++sigma) {
        if (!sw.admits(sigma)) continue;
        const auto r = resolve_in_window(ResidueClass(sigma, q), sw);
        if (!r || *r != sigma) round_trip = false;
      }
      std::set<std::int64_t> seen;
      for (std::int64_t j = 1; j < q; ++j) {
        const auto v = resolve_in_window(solve_residue(j, f), tw);
        if (v && !seen.insert(*v).second) distinct = false;
        if (q > 13) continue;
        const auto c = chain_assign(j, f);
        const auto w = resolve_in_window(solve_residue(j, f), sw);
        if (c && w && *c != *w) chain_agrees = false;
      }
    }
  }
  out.push_back({"diophantine", "window_round_trip", round_trip, "q <= 64"});
  out.push_back({"diophantine", "chain_agrees_with_square_window", chain_agrees, "q <= 13"});
  out.push_back({"diophantine", "distinct_gaps_distinct_labels", distinct, "triangular window, q <= 64"});

  GapRecord a{1, 3, 1, -1.0, -0.5, 0.5, false, 1, ChernSource::computed_fhs};
  GapRecord b{2, 5, 2, -0.9, -0.6, 0.3, false, 1, ChernSource::computed_fhs};
  GapRecord c = b;
  c.chern = -2;
  const bool ok = streda_check(a, a) == StredaVerdict::consistent &&
                  streda_check(a, b) == StredaVerdict::consistent &&
                  streda_check(b, a) == StredaVerdict::consistent &&
                  streda_check(a, c) == StredaVerdict::inconsistent &&
                  streda_check(c, a) == StredaVerdict::inconsistent;
  out.push_back({"diophantine", "streda_reflexive_symmetric", ok, "1/3 j=1 vs 2/5 j=2"});
  return out;
}

inline const std::vector<std::string_view>& verify_suites() {
  static const std::vector<std::string_view> names{"algebra", "chambers", "chern", "diophantine", "all"};
  return names;
}

inline std::vector<Check> run_verify(std::string_view suite) {
  const std::vector<std::pair<std::string_view, std::function<std::vector<Check>()>>> all{
      {"algebra", verify_algebra}, {"chambers", verify_chambers}, {"chern", verify_chern}, {"diophantine", verify_diophantine}};
  std::vector<Check> out;
  bool known = false;
  for (const auto& [name, fn] : all) {
    if (suite != "all" && suite != name) continue;
    known = true;
    auto part = fn();
    out.insert(out.end(), part.begin(), part.end());
  }
  if (!known) throw std::invalid_argument("unknown verify suite: " + std::string(suite));
  return out;
}

}  // namespace hofbutter
