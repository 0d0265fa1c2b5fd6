#pragma once

// Chern numbers of bands and gaps.
//
// Orientation: curvature is Omega = -2 Im <d1 psi | d2 psi> in the (k1, k2)
// of H(k), which makes every gap satisfy sigma_j = s j (mod q).
//
// The integer comes from lattice field strengths of overlap links on the
// magnetic zone k1 in [0, 2pi), k2 in [0, 2pi/q). Kato transport around the
// 2pi/q cell gives an independent check of the value mod q.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hofbutter/eigensolver.hpp"
#include "hofbutter/error.hpp"
#include "hofbutter/magnetic_algebra.hpp"
#include "hofbutter/spectrum.hpp"

namespace hofbutter {

enum class ChernMethod { fhs, transport };

inline std::string_view to_string(ChernMethod m) { return m == ChernMethod::fhs ? "fhs" : "transport"; }

inline ChernMethod chern_method_from_string(std::string_view s) {
  if (s == "fhs") return ChernMethod::fhs;
  if (s == "transport") return ChernMethod::transport;
  throw std::invalid_argument("unknown chern method: " + std::string(s));
}

struct ChernResult {
  std::int64_t index = 0;  // band n (1-based) or gap j
  std::int64_t value = 0;
  ChernMethod method = ChernMethod::fhs;
  int grid = 0;           // points per 2pi/q along each axis
  double residual = 0.0;  // distance of the raw sum from the reported integer
  double max_plaquette = 0.0;
  double min_link = 1.0;
};

struct TransportResult {
  double holonomy = 0.0;  // in [0, 2pi)
  std::int64_t residue = 0;
  int steps = 0;          // per edge, finer of the two extrapolated runs
  double extrapolation_change = 0.0;
};

inline constexpr double degeneracy_tolerance = 1e-10;

/// Curvature of band n (1-based) at k from the spectral sum with exact dH/dk.
inline double berry_curvature(const HofstadterModel& m, std::int64_t n, BlochMomentum k,
                              double tol = degeneracy_tolerance) {
  const auto q = m.flux.q();
  if (n < 1 || n > q) throw std::out_of_range("berry_curvature: band index out of range");
  const auto es = eigensystem(build_hamiltonian(m, k));
  const auto [d1, d2] = hamiltonian_derivatives(m, k);
  const Eigen::MatrixXcd a1 = es.vectors.adjoint() * d1 * es.vectors;
  const Eigen::MatrixXcd a2 = es.vectors.adjoint() * d2 * es.vectors;
  const auto i = static_cast<Eigen::Index>(n - 1);
  double sum = 0.0;
  for (Eigen::Index l = 0; l < static_cast<Eigen::Index>(q); ++l) {
    if (l == i) continue;
    const double de = es.values[i] - es.values[l];
    if (std::abs(de) < tol) throw Degeneracy(k.k1, k.k2, "berry_curvature: band " + std::to_string(n) + " is degenerate");
    sum += std::imag(a1(i, l) * a2(l, i)) / (de * de);
  }
  return -2.0 * sum;
}

/// Column range [first, last) of the eigenvector matrix.
struct Subspace {
  std::int64_t first = 0;
  std::int64_t last = 0;
};

struct SubspaceFlux {
  double total = 0.0;  // sum of plaquette field strengths
  double max_plaquette = 0.0;
  double min_link = std::numeric_limits<double>::infinity();
  double min_separation = std::numeric_limits<double>::infinity();  // to the levels outside
  BlochMomentum tightest{};
};

namespace detail {

inline constexpr double max_plaquette_accept = 1.0;
inline constexpr double min_link_accept = 0.05;
inline constexpr int max_grid = 256;
inline constexpr int max_refine_depth = 20;

inline cplx subspace_link(const Eigensystem& a, const Eigensystem& b, const Subspace& s) {
  const auto lo = static_cast<Eigen::Index>(s.first);
  const auto len = static_cast<Eigen::Index>(s.last - s.first);
  return (a.vectors.middleCols(lo, len).adjoint() * b.vectors.middleCols(lo, len)).determinant();
}

inline void note_separation(const Eigensystem& es, const Subspace& s, BlochMomentum k, SubspaceFlux& acc) {
  const auto& e = es.values;
  double sep = std::numeric_limits<double>::infinity();
  if (s.first > 0) sep = std::min(sep, e[s.first] - e[s.first - 1]);
  if (s.last < e.size()) sep = std::min(sep, e[s.last] - e[s.last - 1]);
  if (sep < acc.min_separation) {
    acc.min_separation = sep;
    acc.tightest = k;
  }
}

// Field strength through the cell [k0, k0 + (h1, h2)] with corner states
// e00, e10, e11, e01, bisected recursively while the phase is large.
inline double refined_flux(const HofstadterModel& m, const Subspace& s, BlochMomentum k0, double h1, double h2,
                           const Eigensystem& e00, const Eigensystem& e10, const Eigensystem& e11,
                           const Eigensystem& e01, int depth, SubspaceFlux& acc) {
  const cplx u1 = subspace_link(e00, e10, s), u2 = subspace_link(e10, e11, s);
  const cplx u3 = subspace_link(e01, e11, s), u4 = subspace_link(e00, e01, s);
  const double f = std::arg(u1 * u2 * std::conj(u3) * std::conj(u4));
  if (std::abs(f) <= max_plaquette_accept || depth == 0) {
    acc.max_plaquette = std::max(acc.max_plaquette, std::abs(f));
    acc.min_link = std::min({acc.min_link, std::abs(u1), std::abs(u2), std::abs(u3), std::abs(u4)});
    return f;
  }
  auto at = [&](double a, double b) {
    const BlochMomentum k{k0.k1 + a * h1, k0.k2 + b * h2};
    auto es = eigensystem(build_hamiltonian_bz(m, k));
    note_separation(es, s, k, acc);
    return es;
  };
  const auto em0 = at(0.5, 0.0), e1m = at(1.0, 0.5), em1 = at(0.5, 1.0), e0m = at(0.0, 0.5), emm = at(0.5, 0.5);
  const double g1 = h1 / 2, g2 = h2 / 2;
  return refined_flux(m, s, k0, g1, g2, e00, em0, emm, e0m, depth - 1, acc) +
         refined_flux(m, s, {k0.k1 + g1, k0.k2}, g1, g2, em0, e10, e1m, emm, depth - 1, acc) +
         refined_flux(m, s, {k0.k1, k0.k2 + g2}, g1, g2, e0m, emm, em1, e01, depth - 1, acc) +
         refined_flux(m, s, {k0.k1 + g1, k0.k2 + g2}, g1, g2, emm, e1m, e11, em1, depth - 1, acc);
}

}  // namespace detail

/// Field-strength sums of several subspaces on a (q n) x n grid of the
/// magnetic zone, offset by half a plaquette. Rows are streamed so memory is
/// O(q^3 n) regardless of the grid height.
///
/// A plaquette whose phase exceeds 1 rad is bisected until every piece is
/// below it; the pieces only choose the 2 pi branch of the coarse phase, so
/// neighbouring plaquettes still telescope and the total stays a multiple
/// of 2 pi.
inline std::vector<SubspaceFlux> fhs_sweep(const HofstadterModel& m, const std::vector<Subspace>& subs, int n) {
  const auto q = static_cast<Eigen::Index>(m.flux.q());
  const int n1 = static_cast<int>(q) * n;
  const int n2 = n;
  const double h1 = two_pi / n1;
  const double h2 = two_pi / static_cast<double>(q) / n2;

  using Row = std::vector<Eigensystem>;
  std::vector<SubspaceFlux> out(subs.size());
  auto solve_row = [&](int l) {
    Row r;
    r.reserve(static_cast<std::size_t>(n1));
    for (int i = 0; i < n1; ++i) {
      const BlochMomentum k{(i + 0.5) * h1, (l + 0.5) * h2};
      r.push_back(eigensystem(build_hamiltonian_bz(m, k)));
      for (std::size_t s = 0; s < subs.size(); ++s) detail::note_separation(r.back(), subs[s], k, out[s]);
    }
    return r;
  };
  // determinant of every subspace block of va^dagger vb
  auto links = [&](const Eigensystem& a, const Eigensystem& b) {
    const Eigen::MatrixXcd o = a.vectors.adjoint() * b.vectors;
    std::vector<cplx> z(subs.size());
    for (std::size_t s = 0; s < subs.size(); ++s) {
      const auto lo = static_cast<Eigen::Index>(subs[s].first);
      const auto len = static_cast<Eigen::Index>(subs[s].last - subs[s].first);
      z[s] = o.block(lo, lo, len, len).determinant();
    }
    return z;
  };
  auto horizontal = [&](const Row& r) {
    std::vector<std::vector<cplx>> hl;
    hl.reserve(static_cast<std::size_t>(n1));
    for (int i = 0; i < n1; ++i) hl.push_back(links(r[i], r[(i + 1) % n1]));
    return hl;
  };

  const Row first = solve_row(0);
  Row cur = first;
  auto h_cur = horizontal(cur);
  const auto h_first = h_cur;
  for (int l = 0; l < n2; ++l) {
    const bool wrap = l + 1 == n2;
    Row next = wrap ? first : solve_row(l + 1);
    auto h_next = wrap ? h_first : horizontal(next);
    std::vector<std::vector<cplx>> v;
    v.reserve(static_cast<std::size_t>(n1));
    for (int i = 0; i < n1; ++i) v.push_back(links(cur[i], next[i]));
    for (int i = 0; i < n1; ++i) {
      const int ip = (i + 1) % n1;
      for (std::size_t s = 0; s < subs.size(); ++s) {
        const cplx u1 = h_cur[i][s], u2 = v[ip][s], u3 = h_next[i][s], u4 = v[i][s];
        double f = std::arg(u1 * u2 * std::conj(u3) * std::conj(u4));
        auto& acc = out[s];
        if (std::abs(f) > detail::max_plaquette_accept) {
          const BlochMomentum k0{(i + 0.5) * h1, (l + 0.5) * h2};
          const double fine = detail::refined_flux(m, subs[s], k0, h1, h2, cur[i], cur[ip], next[ip], next[i],
                                                   detail::max_refine_depth, acc);
          f += two_pi * std::round((fine - f) / two_pi);
        } else {
          acc.max_plaquette = std::max(acc.max_plaquette, std::abs(f));
          acc.min_link = std::min({acc.min_link, std::abs(u1), std::abs(u2), std::abs(u3), std::abs(u4)});
        }
        acc.total += f;
      }
    }
    cur = std::move(next);
    h_cur = std::move(h_next);
  }
  return out;
}

namespace detail {

inline bool fhs_converged(const SubspaceFlux& f) {
  return f.max_plaquette <= max_plaquette_accept && f.min_link >= min_link_accept;
}

inline std::int64_t chern_value(const SubspaceFlux& f) { return std::llround(-f.total / two_pi); }

// Two successive grids that both stay clear of phase wrapping.
inline bool stable_pair(const SubspaceFlux& coarse, const SubspaceFlux& fine) {
  constexpr double wrap_margin = 3.0;
  return coarse.min_link >= min_link_accept && fine.min_link >= min_link_accept &&
         coarse.max_plaquette < wrap_margin && fine.max_plaquette < wrap_margin;
}

inline ChernResult to_result(std::int64_t index, const SubspaceFlux& f, int n) {
  const double raw = -f.total / two_pi;
  ChernResult r;
  r.index = index;
  r.value = std::llround(raw);
  r.method = ChernMethod::fhs;
  r.grid = n;
  r.residual = std::abs(raw - static_cast<double>(r.value));
  r.max_plaquette = f.max_plaquette;
  r.min_link = f.min_link;
  return r;
}

}  // namespace detail

/// Chern numbers of several subspaces on an n-point grid, doubled as needed.
/// A subspace is accepted when its plaquette phases are all small and its
/// links well conditioned, or when a second grid gives the same integer with
/// links still well conditioned and no plaquette near +-pi (narrow gaps
/// concentrate curvature and would otherwise need very fine grids).
inline std::vector<ChernResult> subspace_cherns(const HofstadterModel& m, const std::vector<Subspace>& subs,
                                                const std::vector<std::int64_t>& labels, int n = 32) {
  if (subs.empty()) return {};
  auto sweep = [&](int grid) {
    auto flux = fhs_sweep(m, subs, grid);
    for (const auto& f : flux) {
      if (f.min_separation < degeneracy_tolerance) {
        throw Degeneracy(f.tightest.k1, f.tightest.k2, "subspace not isolated on the Chern grid");
      }
    }
    return flux;
  };
  int grid = std::max(4, n);
  auto flux = sweep(grid);
  std::vector<SubspaceFlux> other;  // a second grid to compare against
  auto accepted = [&](std::size_t s) {
    if (detail::fhs_converged(flux[s])) return true;
    return !other.empty() && detail::chern_value(flux[s]) == detail::chern_value(other[s]) &&
           detail::stable_pair(other[s], flux[s]);
  };
  auto all_accepted = [&] {
    for (std::size_t s = 0; s < subs.size(); ++s) {
      if (!accepted(s)) return false;
    }
    return true;
  };
  // the half grid is a cheap second opinion before refining
  if (!all_accepted() && grid >= 8) other = sweep(grid / 2);
  while (!all_accepted()) {
    if (grid * 2 > detail::max_grid) {
      for (std::size_t s = 0; s < subs.size(); ++s) {
        if (!accepted(s)) {
          throw Error("Chern grid did not converge at N=" + std::to_string(grid) + " for subspace " +
                      std::to_string(labels[s]) + " (max plaquette " + std::to_string(flux[s].max_plaquette) +
                      ", min link " + std::to_string(flux[s].min_link) + ")");
        }
      }
    }
    other = std::move(flux);
    grid *= 2;
    flux = sweep(grid);
  }
  std::vector<ChernResult> out;
  for (std::size_t s = 0; s < subs.size(); ++s) out.push_back(detail::to_result(labels[s], flux[s], grid));
  return out;
}

/// Chern number of band n (1-based).
inline ChernResult band_chern_fhs(const HofstadterModel& m, std::int64_t n, int grid = 32) {
  if (n < 1 || n > m.flux.q()) throw std::out_of_range("band_chern_fhs: band index out of range");
  return subspace_cherns(m, {{n - 1, n}}, {n}, grid).front();
}

/// All band Chern numbers in one sweep.
inline std::vector<ChernResult> band_cherns_fhs(const HofstadterModel& m, int grid = 32) {
  std::vector<Subspace> subs;
  std::vector<std::int64_t> labels;
  for (std::int64_t n = 1; n <= m.flux.q(); ++n) {
    subs.push_back({n - 1, n});
    labels.push_back(n);
  }
  return subspace_cherns(m, subs, labels, grid);
}

/// Bands first..last (1-based, inclusive) with no open gap between them.
struct BandGroupChern {
  std::int64_t first = 1;
  std::int64_t last = 1;
  ChernResult result;
};

/// Chern numbers of the maximal band groups separated by the open gaps in
/// `gaps`. Touching bands only carry a joint Chern number.
inline std::vector<BandGroupChern> band_group_cherns(const HofstadterModel& m, const std::vector<GapRecord>& gaps,
                                                     int grid = 32) {
  const auto q = m.flux.q();
  if (static_cast<std::int64_t>(gaps.size()) != q + 1) throw std::invalid_argument("band_group_cherns: need q + 1 gaps");
  std::vector<Subspace> subs;
  std::vector<std::int64_t> labels;
  std::int64_t start = 0;
  for (std::int64_t j = 1; j <= q; ++j) {
    if (j < q && gaps[static_cast<std::size_t>(j)].closed) continue;
    subs.push_back({start, j});
    labels.push_back(start + 1);
    start = j;
  }
  const auto res = subspace_cherns(m, subs, labels, grid);
  std::vector<BandGroupChern> out;
  for (std::size_t i = 0; i < subs.size(); ++i) out.push_back({subs[i].first + 1, subs[i].last, res[i]});
  return out;
}

/// Chern numbers of the listed interior gaps (rank-j occupied subspaces).
inline std::vector<ChernResult> gap_cherns_fhs(const HofstadterModel& m, const std::vector<std::int64_t>& gaps,
                                               int grid = 32) {
  std::vector<Subspace> subs;
  for (auto j : gaps) {
    if (j <= 0 || j >= m.flux.q()) throw std::out_of_range("gap_cherns_fhs: interior gaps only");
    subs.push_back({0, j});
  }
  return subspace_cherns(m, subs, gaps, grid);
}

/// Kato transport of band n (1-based) around the 2pi/q square, as the
/// discrete limit psi <- P(k) psi / |P(k) psi|, Richardson-extrapolated
/// between `steps` and 2 `steps` points per edge.
inline TransportResult band_chern_transport(const HofstadterModel& m, std::int64_t n, int steps = 256,
                                            int max_steps = 1 << 15) {
  const auto q = m.flux.q();
  if (n < 1 || n > q) throw std::out_of_range("band_chern_transport: band index out of range");
  if (q == 1) return {0.0, 0, 0, 0.0};
  const double side = two_pi / static_cast<double>(q);
  const BlochMomentum base{0.17 * side, 0.29 * side};  // off the high-symmetry points
  const auto col = static_cast<Eigen::Index>(n - 1);

  auto vector_at = [&](BlochMomentum k) {
    const auto es = eigensystem(build_hamiltonian(m, k));
    double sep = std::numeric_limits<double>::infinity();
    if (col > 0) sep = std::min(sep, es.values[col] - es.values[col - 1]);
    if (col + 1 < static_cast<Eigen::Index>(q)) sep = std::min(sep, es.values[col + 1] - es.values[col]);
    if (sep < degeneracy_tolerance) throw Degeneracy(k.k1, k.k2, "transport path meets a degeneracy");
    return Eigen::VectorXcd(es.vectors.col(col));
  };
  // holonomy for `per_edge` steps, or nothing if a step is too coarse
  auto holonomy = [&](int per_edge) -> std::optional<double> {
    const std::array<std::pair<double, double>, 4> dir{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};
    const Eigen::VectorXcd psi0 = vector_at(base);
    Eigen::VectorXcd psi = psi0;
    BlochMomentum k = base;
    const double h = side / per_edge;
    for (const auto& [dx, dy] : dir) {
      const BlochMomentum start = k;
      for (int s = 1; s <= per_edge; ++s) {
        const BlochMomentum ks{start.k1 + dx * h * s, start.k2 + dy * h * s};
        const Eigen::VectorXcd v = vector_at(ks);
        const cplx overlap = v.dot(psi);
        // |P' - P| = sqrt(1 - |<v|psi>|^2) for rank one
        if (std::norm(overlap) < 0.75) return std::nullopt;
        psi = v * (overlap / std::abs(overlap));
      }
      k = {start.k1 + dx * side, start.k2 + dy * side};
    }
    return std::arg(psi0.dot(psi));
  };

  std::optional<double> previous;
  for (int m_steps = steps; m_steps <= max_steps; m_steps *= 2) {
    const auto coarse = holonomy(m_steps);
    const auto fine = coarse ? holonomy(2 * m_steps) : std::nullopt;
    if (!fine) continue;
    const double extrapolated = *fine + wrap_angle(*fine - *coarse) / 3.0;
    if (previous) {
      const double change = std::abs(wrap_angle(extrapolated - *previous));
      if (change < 1e-9 || 4 * m_steps > max_steps) {
        double theta = std::fmod(extrapolated, two_pi);
        if (theta < 0) theta += two_pi;
        auto residue = std::llround(theta * static_cast<double>(q) / two_pi) % q;
        return {theta, residue, 2 * m_steps, change};
      }
    }
    previous = extrapolated;
  }
  throw Error("band_chern_transport: transport did not converge");
}

/// sigma_j of an open gap; zero for the outer gaps.
inline std::int64_t gap_chern(const HofstadterModel& m, std::int64_t j, ChernMethod method = ChernMethod::fhs,
                              int grid = 32, double eps_gap = default_gap_epsilon) {
  const auto q = m.flux.q();
  if (j < 0 || j > q) throw std::out_of_range("gap_chern: j out of range");
  if (j == 0 || j == q) return 0;
  const auto gaps = compute_gaps(compute_bands_checked(m), eps_gap);
  if (gaps[static_cast<std::size_t>(j)].closed) {
    throw GapClosed(static_cast<int>(j), "gap " + std::to_string(j) + " is closed");
  }
  if (method == ChernMethod::transport) {
    throw std::invalid_argument("gap_chern: transport determines sigma only mod q");
  }
  return gap_cherns_fhs(m, {j}, grid).front().value;
}

/// Upper bound on |sigma_j| for a gap of width g: 4 pi D^2 j (q - j) / (q g^2),
/// with D bounding |dH/dk| (6 for unit hoppings).
inline double chern_bound(std::int64_t j, std::int64_t q, double g, double derivative_norm = 6.0) {
  if (!(g > 0.0)) throw std::invalid_argument("chern_bound: gap width must be positive");
  if (j <= 0 || j >= q) return 0.0;
  return 4.0 * std::numbers::pi * derivative_norm * derivative_norm * static_cast<double>(j * (q - j)) /
         (static_cast<double>(q) * g * g);
}

}  // namespace hofbutter
