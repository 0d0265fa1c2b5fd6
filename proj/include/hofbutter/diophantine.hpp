#pragma once

// Gap labels from sigma_j = s j (mod q): residues, windows that pick one
// representative, the chain walk from the outer gaps, the Streda relation
// 2 pi d(rho) = sigma d(Phi) and the fragmentation of realized Chern sets.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hofbutter/magnetic_algebra.hpp"
#include "hofbutter/rational.hpp"
#include "hofbutter/spectrum.hpp"

namespace hofbutter {

struct ResidueClass {
  std::int64_t r = 0;
  std::int64_t q = 1;

  ResidueClass(std::int64_t value, std::int64_t modulus) : q(modulus) {
    if (modulus < 1) throw std::invalid_argument("ResidueClass: modulus must be positive");
    r = ((value % q) + q) % q;
  }
  bool contains(std::int64_t x) const { return ((x % q) + q) % q == r; }
  friend bool operator==(const ResidueClass&, const ResidueClass&) = default;
};

/// Integers [lo, hi] minus `excluded`, read modulo q. Construction fails if
/// two admissible members share a residue class.
class Window {
 public:
  Window(std::int64_t lo, std::int64_t hi, std::int64_t q, std::set<std::int64_t> excluded = {})
      : lo_(lo), hi_(hi), q_(q), excluded_(std::move(excluded)) {
    if (q < 1) throw std::invalid_argument("Window: modulus must be positive");
    if (lo > hi) throw std::invalid_argument("Window: lo > hi");
    if (hi - lo > q) {
      throw std::invalid_argument("Window: [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                  "] is longer than the modulus " + std::to_string(q));
    }
    std::set<std::int64_t> seen;
    for (std::int64_t x = lo; x <= hi; ++x) {
      if (excluded_.count(x)) continue;
      if (!seen.insert(((x % q) + q) % q).second) {
        throw std::invalid_argument("Window: two members congruent to " + std::to_string(x) + " mod " +
                                    std::to_string(q));
      }
    }
  }

  std::int64_t lo() const { return lo_; }
  std::int64_t hi() const { return hi_; }
  std::int64_t modulus() const { return q_; }
  const std::set<std::int64_t>& excluded() const { return excluded_; }
  bool admits(std::int64_t x) const { return lo_ <= x && x <= hi_ && !excluded_.count(x); }

 private:
  std::int64_t lo_, hi_, q_;
  std::set<std::int64_t> excluded_;
};

inline ResidueClass solve_residue(std::int64_t j, const Flux& f) {
  if (j < 0 || j > f.q()) throw std::out_of_range("solve_residue: j out of range");
  return {(f.s() % f.q()) * j, f.q()};
}

/// [1 - q/2, q/2 - 1] for even q, [-(q-1)/2, (q-1)/2] for odd q.
inline Window square_window(std::int64_t q) {
  if (q < 1) throw std::invalid_argument("square_window: q must be positive");
  if (q % 2 == 0) return {1 - q / 2, q / 2 - 1, q};
  return {-(q - 1) / 2, (q - 1) / 2, q};
}

/// [-q/2 + 1, q/2] for even q; odd q uses [-(q-3)/2, (q+1)/2], the same
/// upward shift by one half.
inline Window triangular_window(std::int64_t q, std::set<std::int64_t> excluded = {}) {
  if (q < 1) throw std::invalid_argument("triangular_window: q must be positive");
  if (q == 1) return {0, 0, 1, std::move(excluded)};
  if (q % 2 == 0) return {-q / 2 + 1, q / 2, q, std::move(excluded)};
  return {-(q - 3) / 2, (q + 1) / 2, q, std::move(excluded)};
}

/// The admissible member of w congruent to r, if any.
inline std::optional<std::int64_t> resolve_in_window(const ResidueClass& r, const Window& w) {
  if (r.q != w.modulus()) throw std::invalid_argument("resolve_in_window: modulus mismatch");
  const std::int64_t q = r.q;
  std::int64_t x = w.lo() + (((r.r - w.lo()) % q) + q) % q;
  for (; x <= w.hi(); x += q) {
    if (!w.excluded().count(x)) return x;
  }
  return std::nullopt;
}

/// Walks sigma = m along gap m p (mod q) and sigma = -m along -m p (mod q),
/// m = 0..cutoff. Unresolved when neither walk reaches j or they disagree.
inline std::optional<std::int64_t> chain_assign(std::int64_t j, const Flux& f, std::optional<std::int64_t> cutoff = {}) {
  const std::int64_t q = f.q();
  if (j < 0 || j > q) throw std::out_of_range("chain_assign: j out of range");
  if (j == 0 || j == q) return 0;
  const std::int64_t c = cutoff.value_or(q / 4);
  std::optional<std::int64_t> up, down;
  for (std::int64_t m = 1; m <= c; ++m) {
    const std::int64_t fwd = (m * f.p()) % q;
    const std::int64_t bwd = ((q - fwd) % q);
    if (fwd == j && !up) up = m;
    if (bwd == j && !down) down = -m;
  }
  if (up && down) return *up == *down ? up : std::nullopt;
  return up ? up : down;
}

enum class StredaVerdict { consistent, inconsistent, not_comparable };

inline std::string_view to_string(StredaVerdict v) {
  switch (v) {
    case StredaVerdict::consistent: return "consistent";
    case StredaVerdict::inconsistent: return "inconsistent";
    case StredaVerdict::not_comparable: return "not_comparable";
  }
  return "not_comparable";
}

/// Length of the common part of two energy intervals (negative if disjoint).
inline double interval_overlap(std::pair<double, double> a, std::pair<double, double> b) {
  return std::min(a.second, b.second) - std::max(a.first, b.first);
}

/// Streda relation between two labelled gaps whose energies overlap by more
/// than eps. Exact rational arithmetic in rho = j/q and Phi/2pi = p/q.
inline StredaVerdict streda_check(const GapRecord& a, const GapRecord& b, double eps = default_gap_epsilon) {
  if (a.closed || b.closed || !a.chern || !b.chern) return StredaVerdict::not_comparable;
  if (!(interval_overlap({a.lo, a.hi}, {b.lo, b.hi}) > eps)) return StredaVerdict::not_comparable;
  if (*a.chern != *b.chern) return StredaVerdict::inconsistent;
  const Fraction sigma(*a.chern);
  return b.rho() - a.rho() == sigma * (b.flux_fraction() - a.flux_fraction()) ? StredaVerdict::consistent
                                                                             : StredaVerdict::inconsistent;
}

enum class Strategy { square, triangular, chain, computed };

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::square: return "square";
    case Strategy::triangular: return "triangular";
    case Strategy::chain: return "chain";
    case Strategy::computed: return "computed";
  }
  return "computed";
}

inline Strategy strategy_from_string(std::string_view s) {
  if (s == "square") return Strategy::square;
  if (s == "triangular") return Strategy::triangular;
  if (s == "chain") return Strategy::chain;
  if (s == "computed") return Strategy::computed;
  throw std::invalid_argument("unknown strategy: " + std::string(s));
}

struct Assignment {
  std::int64_t j = 0;
  std::int64_t chern = 0;
  ChernSource source = ChernSource::unresolved;
};

struct ResolutionReport {
  std::vector<Assignment> assigned;
  std::vector<std::pair<std::int64_t, std::string>> violations;  // (j, reason)
};

/// Labels every open interior gap from its residue by a window or the chain.
/// Gaps that get no value appear in `violations` instead.
inline ResolutionReport resolve_gaps(const std::vector<GapRecord>& gaps, const Flux& f, Strategy strategy,
                                     const std::set<std::int64_t>& excluded_values = {}) {
  if (strategy == Strategy::computed) throw std::invalid_argument("resolve_gaps: computed is not a window rule");
  ResolutionReport rep;
  std::optional<Window> w;
  ChernSource tag = ChernSource::chain;
  if (strategy == Strategy::square) {
    w = square_window(f.q());
    if (!excluded_values.empty()) w = Window(w->lo(), w->hi(), f.q(), excluded_values);
    tag = ChernSource::window_square;
  } else if (strategy == Strategy::triangular) {
    w = triangular_window(f.q(), excluded_values);
    tag = ChernSource::window_triangular;
  }
  for (const auto& g : gaps) {
    if (g.outer()) {
      rep.assigned.push_back({g.j, 0, ChernSource::trivial});
      continue;
    }
    if (g.closed) continue;
    const auto r = solve_residue(g.j, f);
    const auto v = w ? resolve_in_window(r, *w) : chain_assign(g.j, f);
    if (v) {
      rep.assigned.push_back({g.j, *v, tag});
    } else {
      rep.violations.emplace_back(g.j, w ? "no window representative of residue " + std::to_string(r.r)
                                         : std::string("chain does not reach this gap"));
    }
  }
  return rep;
}

struct FragmentationReport {
  std::vector<std::int64_t> values;  // realized, sorted, including 0
  std::int64_t lo = 0, hi = 0;       // extremes
  bool contiguous = false;           // some window of length <= q holds them all
  bool residues_distinct = true;
  std::vector<std::int64_t> struck;  // integers of the symmetric span that are not realized
};

/// Realized Chern values at one flux against contiguous windows. The span is
/// the symmetric window +-floor((q-1)/2) widened to the extremes; every
/// integer of the span that does not occur is struck.
inline FragmentationReport fragmentation_report(const std::map<std::int64_t, std::int64_t>& computed, std::int64_t q) {
  if (q < 1) throw std::invalid_argument("fragmentation_report: q must be positive");
  std::set<std::int64_t> vals{0};
  for (auto [j, sigma] : computed) {
    if (j != 0 && j != q) vals.insert(sigma);
  }
  FragmentationReport rep;
  rep.values.assign(vals.begin(), vals.end());
  rep.lo = *vals.begin();
  rep.hi = *vals.rbegin();
  rep.contiguous = rep.hi - rep.lo + 1 <= q;
  // residues of distinct interior values must differ (0 is shared by the outer gaps)
  std::set<std::int64_t> seen;
  for (auto [j, sigma] : computed) {
    if (j == 0 || j == q) continue;
    if (!seen.insert(((sigma % q) + q) % q).second) rep.residues_distinct = false;
  }
  const std::int64_t half = (q - 1) / 2;
  for (std::int64_t x = std::min(-half, rep.lo); x <= std::max(half, rep.hi); ++x) {
    if (!vals.count(x)) rep.struck.push_back(x);
  }
  return rep;
}

}  // namespace hofbutter
