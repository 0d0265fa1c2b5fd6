#include <catch_amalgamated.hpp>

#include <map>
#include <numbers>
#include <numeric>
#include <random>

#include "hofbutter/chern.hpp"
#include "hofbutter/diophantine.hpp"
#include "oracles.hpp"

using namespace hofbutter;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double pi = std::numbers::pi;

const HofstadterModel square13(Flux(1, 3), pi / 2, {1, 1, 0});

std::vector<std::int64_t> open_gap_cherns(const HofstadterModel& m) {
  std::vector<std::int64_t> js;
  for (const auto& g : compute_gaps(compute_bands_checked(m))) {
    if (!g.outer() && !g.closed) js.push_back(g.j);
  }
  std::vector<std::int64_t> out;
  for (const auto& r : gap_cherns_fhs(m, js)) out.push_back(r.value);
  return out;
}

// The full 2 pi torus covers the magnetic zone q times with the opposite
// orientation, so its sum is -q sigma.
std::int64_t torus_gap_chern(const HofstadterModel& m, std::int64_t j) {
  const auto q = m.flux.q();
  const double raw = oracle::torus_fhs(m, j, static_cast<int>(16 * q));
  const auto total = std::llround(raw);
  REQUIRE(std::abs(raw - static_cast<double>(total)) < 1e-6);
  REQUIRE(total % q == 0);
  return -total / q;
}

}  // namespace

TEST_CASE("curvature of a single band vanishes", "[chern]") {
  CHECK(berry_curvature(HofstadterModel(Flux(1, 1)), 1, {0.4, 0.2}) == 0.0);
}

TEST_CASE("curvatures of all bands sum to zero pointwise", "[chern]") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-pi, pi);
  for (auto f : {Flux(1, 3), Flux(2, 5), Flux(3, 8)}) {
    const HofstadterModel m(f);
    for (int n = 0; n < 5; ++n) {
      const BlochMomentum k{u(rng), u(rng)};
      double sum = 0;
      for (std::int64_t b = 1; b <= f.q(); ++b) sum += berry_curvature(m, b, k);
      CHECK_THAT(sum, WithinAbs(0.0, 1e-10));
    }
  }
}

TEST_CASE("curvature integral of the lowest square-model band at 1/3", "[chern]") {
  const int n = 48;
  const double cell = 2 * pi / 3;
  double integral = 0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      integral += berry_curvature(square13, 1, {(a + 0.5) * 2 * pi / n, (b + 0.5) * cell / n});
    }
  }
  // [0, 2 pi) x [0, 2 pi / q) is q magnetic cells, so the q / 2 pi weight of
  // one cell becomes 1 / 2 pi here
  integral *= (2 * pi / n) * (cell / n) / (2 * pi);
  CHECK_THAT(integral, WithinAbs(1.0, 1e-3));
}

TEST_CASE("band Chern numbers from link variables", "[chern]") {
  CHECK(band_chern_fhs(HofstadterModel(Flux(1, 1)), 1).value == 0);

  const auto sq = band_cherns_fhs(square13);
  REQUIRE(sq.size() == 3);
  CHECK(sq[0].value == 1);
  CHECK(sq[1].value == -2);
  CHECK(sq[2].value == 1);

  const auto b25 = band_cherns_fhs(HofstadterModel(Flux(2, 5)));
  const std::vector<std::int64_t> want25{-2, 3, -2, 3, -2};
  for (std::size_t i = 0; i < want25.size(); ++i) CHECK(b25[i].value == want25[i]);

  const auto b14 = band_cherns_fhs(HofstadterModel(Flux(1, 4)));
  const std::vector<std::int64_t> want14{1, 1, -3, 1};
  for (std::size_t i = 0; i < want14.size(); ++i) CHECK(b14[i].value == want14[i]);
}

TEST_CASE("touching bands only carry a joint Chern number", "[chern]") {
  const HofstadterModel m(Flux(1, 3));
  const auto gaps = compute_gaps(compute_bands(m));
  const auto groups = band_group_cherns(m, gaps);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].first == 1);
  CHECK(groups[0].last == 1);
  CHECK(groups[0].result.value == 1);
  CHECK(groups[1].first == 2);
  CHECK(groups[1].last == 3);
  CHECK(groups[1].result.value == -1);
}

TEST_CASE("gap Chern numbers at phi_d = pi/2", "[chern]") {
  CHECK(open_gap_cherns(square13) == std::vector<std::int64_t>{1, -1});
  CHECK(open_gap_cherns(HofstadterModel(Flux(2, 5))) == std::vector<std::int64_t>{-2, 1, -1, 2});
  CHECK(open_gap_cherns(HofstadterModel(Flux(3, 7))) == std::vector<std::int64_t>{-2, -4, 1, -1, 4, 2});
  CHECK(open_gap_cherns(HofstadterModel(Flux(4, 9))) == std::vector<std::int64_t>{-2, -4, 3, 1, -1, 6, 4, 2});
  CHECK(open_gap_cherns(HofstadterModel(Flux(5, 13))) ==
        std::vector<std::int64_t>{-5, 3, -2, -7, 1, 9, 4, -1, 7, 2, -3, 5});
}

TEST_CASE("gap Chern numbers agree with a naive full-torus computation", "[chern]") {
  for (auto f : {Flux(2, 5), Flux(3, 7), Flux(1, 6)}) {
    const HofstadterModel m(f);
    const auto gaps = compute_gaps(compute_bands_checked(m));
    for (const auto& g : gaps) {
      if (g.outer() || g.closed) continue;
      INFO(f.p() << "/" << f.q() << " gap " << g.j);
      CHECK(gap_chern(m, g.j) == torus_gap_chern(m, g.j));
    }
  }
}

TEST_CASE("gap labels satisfy the Diophantine identity", "[chern]") {
  for (auto m : {HofstadterModel(Flux(3, 7)), HofstadterModel(Flux(5, 9)), HofstadterModel(Flux(3, 8)),
                 HofstadterModel(Flux(2, 7), pi / 2, {1, 1, 0}), HofstadterModel(Flux(3, 5), 0.8, {1.0, 0.9, 0.7})}) {
    const auto gaps = compute_gaps(compute_bands_checked(m));
    for (const auto& g : gaps) {
      if (g.outer() || g.closed) continue;
      const auto sigma = gap_chern(m, g.j);
      INFO(m.flux.p() << "/" << m.flux.q() << " gap " << g.j << " sigma " << sigma);
      CHECK(solve_residue(g.j, m.flux).contains(sigma));
      CHECK(std::abs(static_cast<double>(sigma)) <= chern_bound(g.j, m.flux.q(), g.width));
    }
  }
}

TEST_CASE("inversion pairs gap j at p/q with gap q - j at (q - p)/q", "[chern]") {
  const auto a = open_gap_cherns(HofstadterModel(Flux(3, 7)));
  const auto b = open_gap_cherns(HofstadterModel(Flux(4, 7)));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[a.size() - 1 - i]);
}

TEST_CASE("gap_chern edge cases", "[chern]") {
  const HofstadterModel m(Flux(1, 3));
  CHECK(gap_chern(m, 0) == 0);
  CHECK(gap_chern(m, 3) == 0);
  CHECK_THROWS_AS(gap_chern(m, 2), GapClosed);
  CHECK_THROWS_AS(gap_chern(m, 1, ChernMethod::transport), std::invalid_argument);
  CHECK_THROWS_AS(gap_chern(m, 4), std::out_of_range);
}

TEST_CASE("parallel transport holonomy is 2 pi s / q", "[chern]") {
  const auto t1 = band_chern_transport(HofstadterModel(Flux(1, 1)), 1);
  CHECK(t1.holonomy == 0.0);
  CHECK(t1.residue == 0);

  const HofstadterModel m(Flux(2, 5));
  for (std::int64_t n = 1; n <= 5; ++n) {
    const auto r = band_chern_transport(m, n);
    CHECK(r.residue == 3);
    CHECK_THAT(std::abs(wrap_angle(r.holonomy - 2 * pi * 3 / 5)), WithinAbs(0.0, 1e-6));
  }

  const auto sq = band_chern_transport(square13, 1);
  CHECK(sq.residue == 1);
  CHECK(((band_chern_fhs(square13, 1).value % 3) + 3) % 3 == sq.residue);
}

TEST_CASE("curvature bound", "[chern]") {
  CHECK(chern_bound(0, 5, 1.0) == 0.0);
  CHECK_THAT(chern_bound(2, 5, 2.0), WithinAbs(4 * pi * 36 * 6 / 20.0, 1e-9));
  CHECK_THAT(chern_bound(2, 5, 2.0), WithinAbs(135.717, 1e-3));
  CHECK_THROWS_AS(chern_bound(1, 5, 0.0), std::invalid_argument);
}

TEST_CASE("method names round-trip", "[chern]") {
  for (auto m : {ChernMethod::fhs, ChernMethod::transport}) CHECK(chern_method_from_string(to_string(m)) == m);
  CHECK_THROWS(chern_method_from_string("simpson"));
}
