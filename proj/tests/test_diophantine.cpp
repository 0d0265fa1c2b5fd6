#include <catch_amalgamated.hpp>

#include <numeric>
#include <random>

#include "hofbutter/diophantine.hpp"

using namespace hofbutter;

namespace {

GapRecord labelled(std::int64_t p, std::int64_t q, std::int64_t j, double lo, double hi, std::int64_t sigma) {
  GapRecord g;
  g.p = p;
  g.q = q;
  g.j = j;
  g.lo = lo;
  g.hi = hi;
  g.width = hi - lo;
  g.chern = sigma;
  g.source = ChernSource::computed_fhs;
  return g;
}

}  // namespace

TEST_CASE("residues", "[diophantine]") {
  CHECK(solve_residue(0, Flux(3, 7)).r == 0);
  CHECK(solve_residue(2, Flux(3, 7)).r == 3);
  CHECK(solve_residue(4, Flux(2, 5)).r == 2);
  CHECK(solve_residue(1, Flux(5, 13)).r == 8);
  CHECK(ResidueClass(-2, 5).r == 3);
  CHECK(ResidueClass(-2, 5).contains(8));
  CHECK_THROWS_AS(solve_residue(8, Flux(3, 7)), std::out_of_range);
  CHECK_THROWS_AS(ResidueClass(1, 0), std::invalid_argument);
}

TEST_CASE("square window", "[diophantine]") {
  CHECK(square_window(5).lo() == -2);
  CHECK(square_window(5).hi() == 2);
  CHECK(square_window(4).lo() == -1);
  CHECK(square_window(4).hi() == 1);
  CHECK(square_window(1).lo() == 0);
  CHECK(square_window(1).hi() == 0);
}

TEST_CASE("triangular window", "[diophantine]") {
  CHECK(triangular_window(512).lo() == -255);
  CHECK(triangular_window(512).hi() == 256);
  CHECK(triangular_window(2).lo() == 0);
  CHECK(triangular_window(2).hi() == 1);
  CHECK(triangular_window(4).lo() == -1);
  CHECK(triangular_window(4).hi() == 2);
  CHECK(triangular_window(5).lo() == -1);
  CHECK(triangular_window(5).hi() == 3);
  CHECK(triangular_window(1).lo() == 0);
  CHECK(triangular_window(1).hi() == 0);
}

TEST_CASE("windows refuse ambiguous ranges", "[diophantine]") {
  CHECK_THROWS_AS(Window(-3, 3, 5), std::invalid_argument);
  CHECK_THROWS_AS(Window(0, 7, 5), std::invalid_argument);
  CHECK_THROWS_AS(Window(2, 1, 5), std::invalid_argument);
  // length q + 1 is fine once one of the colliding members is excluded
  CHECK_NOTHROW(Window(-2, 3, 5, {-2}));
  CHECK_THROWS_AS(Window(-2, 3, 5, {0}), std::invalid_argument);
}

TEST_CASE("window representatives", "[diophantine]") {
  CHECK(resolve_in_window(ResidueClass(3, 5), square_window(5)) == -2);
  CHECK(resolve_in_window(ResidueClass(3, 5), Window(-1, 3, 5)) == 3);
  CHECK(resolve_in_window(ResidueClass(1, 1), square_window(1)) == 0);
  CHECK_FALSE(resolve_in_window(ResidueClass(2, 4), square_window(4)).has_value());
  CHECK_FALSE(resolve_in_window(ResidueClass(3, 5), Window(-2, 2, 5, {-2})).has_value());
  CHECK_THROWS_AS(resolve_in_window(ResidueClass(1, 4), square_window(5)), std::invalid_argument);
}

TEST_CASE("window round trip up to q = 64", "[diophantine]") {
  for (std::int64_t q = 1; q <= 64; ++q) {
    const auto w = square_window(q);
    for (std::int64_t sigma = -(q - 1) / 2; sigma <= (q - 1) / 2; ++sigma) {
      if (!w.admits(sigma)) continue;
      for (std::int64_t p = 1; p <= q; ++p) {
        if (std::gcd(p, q) != 1) continue;
        CHECK(resolve_in_window(ResidueClass(sigma, q), w) == sigma);
      }
    }
  }
}

TEST_CASE("chain walk", "[diophantine]") {
  const Flux f(3, 11);
  CHECK(chain_assign(3, f) == 1);
  CHECK(chain_assign(8, f) == -1);
  CHECK(chain_assign(0, f) == 0);
  CHECK(chain_assign(11, f) == 0);
  CHECK(chain_assign(6, f) == 2);
  CHECK_FALSE(chain_assign(1, f).has_value());  // 1 = 4 * 3 mod 11, beyond the cutoff 2
  CHECK(chain_assign(1, f, 4) == 4);
}

TEST_CASE("chain agrees with the square window wherever both resolve", "[diophantine]") {
  for (std::int64_t q = 1; q <= 13; ++q) {
    for (std::int64_t p = 1; p <= q; ++p) {
      if (std::gcd(p, q) != 1) continue;
      const Flux f(p, q);
      for (std::int64_t j = 0; j <= q; ++j) {
        const auto c = chain_assign(j, f);
        const auto w = resolve_in_window(solve_residue(j, f), square_window(q));
        if (c && w) CHECK(*c == *w);
      }
    }
  }
}

TEST_CASE("distinct gaps receive distinct window labels", "[diophantine]") {
  for (std::int64_t q = 2; q <= 64; ++q) {
    for (std::int64_t p = 1; p < q; ++p) {
      if (std::gcd(p, q) != 1) continue;
      std::set<std::int64_t> seen;
      for (std::int64_t j = 1; j < q; ++j) {
        const auto v = resolve_in_window(solve_residue(j, Flux(p, q)), triangular_window(q));
        REQUIRE(v);
        CHECK(seen.insert(*v).second);
      }
    }
  }
}

TEST_CASE("Streda relation", "[diophantine]") {
  const auto a = labelled(1, 3, 1, -1.0, -0.5, 1);
  const auto b = labelled(2, 5, 2, -0.9, -0.6, 1);
  auto c = b;
  c.chern = -2;
  CHECK(streda_check(a, a) == StredaVerdict::consistent);
  CHECK(streda_check(a, b) == StredaVerdict::consistent);
  CHECK(streda_check(a, c) == StredaVerdict::inconsistent);
  CHECK(streda_check(a, labelled(2, 5, 2, 0.0, 0.5, 1)) == StredaVerdict::not_comparable);
  CHECK(streda_check(a, labelled(2, 5, 2, -0.5, 0.5, 1)) == StredaVerdict::not_comparable);  // touching only
  auto closed = b;
  closed.closed = true;
  CHECK(streda_check(a, closed) == StredaVerdict::not_comparable);
  auto unlabelled = b;
  unlabelled.chern.reset();
  CHECK(streda_check(a, unlabelled) == StredaVerdict::not_comparable);
}

TEST_CASE("Streda relation is symmetric and transitive along a wing", "[diophantine]") {
  // sigma = 1, j = p + 0 q: 1/3, 2/5, 3/7, 4/9 all on one line
  std::vector<GapRecord> wing;
  for (std::int64_t k = 1; k <= 4; ++k) wing.push_back(labelled(k, 2 * k + 1, k, -1.0 + 0.01 * k, -0.5, 1));
  for (const auto& x : wing) {
    for (const auto& y : wing) {
      CHECK(streda_check(x, y) == streda_check(y, x));
      CHECK(streda_check(x, y) == StredaVerdict::consistent);
    }
  }
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::int64_t> sig(-4, 4);
  for (int n = 0; n < 200; ++n) {
    const auto x = labelled(2, 7, 3, -1, 1, sig(rng));
    const auto y = labelled(3, 10, 4, -0.5, 0.5, sig(rng));
    CHECK(streda_check(x, y) == streda_check(y, x));
  }
}

TEST_CASE("resolving every gap at one flux", "[diophantine]") {
  std::vector<GapRecord> gaps;
  for (std::int64_t j = 0; j <= 4; ++j) {
    GapRecord g;
    g.p = 1;
    g.q = 4;
    g.j = j;
    g.closed = j == 2;
    gaps.push_back(g);
  }
  const auto sq = resolve_gaps(gaps, Flux(1, 4), Strategy::square);
  CHECK(sq.violations.empty());
  std::map<std::int64_t, std::int64_t> got;
  for (const auto& a : sq.assigned) got[a.j] = a.chern;
  CHECK(got == std::map<std::int64_t, std::int64_t>{{0, 0}, {1, 1}, {3, -1}, {4, 0}});

  gaps[2].closed = false;
  const auto open = resolve_gaps(gaps, Flux(1, 4), Strategy::square);
  REQUIRE(open.violations.size() == 1);
  CHECK(open.violations[0].first == 2);

  const auto tri = resolve_gaps(gaps, Flux(1, 4), Strategy::triangular);
  CHECK(tri.violations.empty());
  for (const auto& a : tri.assigned) {
    if (a.j == 2) CHECK(a.chern == 2);
  }
  CHECK_THROWS_AS(resolve_gaps(gaps, Flux(1, 4), Strategy::computed), std::invalid_argument);
}

TEST_CASE("fragmented Chern sets", "[diophantine]") {
  SECTION("q = 5") {
    const auto r = fragmentation_report({{1, -1}, {2, 3}, {3, 2}, {4, 1}}, 5);
    CHECK(r.contiguous);
    CHECK(r.lo == -1);
    CHECK(r.hi == 3);
    CHECK(r.struck == std::vector<std::int64_t>{-2});
  }
  SECTION("q = 7") {
    const auto r = fragmentation_report({{1, -2}, {2, -4}, {3, 1}, {4, -1}, {5, 4}, {6, 2}}, 7);
    CHECK_FALSE(r.contiguous);
    CHECK(r.lo == -4);
    CHECK(r.hi == 4);
    CHECK(r.struck == std::vector<std::int64_t>{-3, 3});
    CHECK(r.residues_distinct);
  }
  SECTION("q = 1") {
    const auto r = fragmentation_report({}, 1);
    CHECK(r.contiguous);
    CHECK(r.values == std::vector<std::int64_t>{0});
    CHECK(r.struck.empty());
  }
}

TEST_CASE("strategy names round-trip", "[diophantine]") {
  for (auto s : {Strategy::square, Strategy::triangular, Strategy::chain, Strategy::computed}) {
    CHECK(strategy_from_string(to_string(s)) == s);
  }
  CHECK_THROWS(strategy_from_string("hexagonal"));
}
