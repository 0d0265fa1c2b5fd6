#pragma once

// Band intervals from the Chambers relation
//
//   det(H(k) - lambda) = P(lambda) + det H(k),
//
// with P independent of k, so every band edge is attained where det H(k)
// is extremal. det H(k) depends on k only through (x, y) = (q k1, q k2):
//
//   det H = h + (-)^{q+1} 2 [ t2^q cos x + t1^q cos y + (-)^{q-1} t3^q Re(w_u^q e^{i(x+y)}) ]

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hofbutter/eigensolver.hpp"
#include "hofbutter/error.hpp"
#include "hofbutter/magnetic_algebra.hpp"
#include "hofbutter/rational.hpp"

namespace hofbutter {

inline constexpr double default_gap_epsilon = 1e-8;

enum class ChernSource {
  trivial,  // j = 0 or j = q
  window_square,
  window_triangular,
  chain,
  computed_fhs,
  computed_transport,
  unresolved,
};

inline std::string_view to_string(ChernSource s) {
  switch (s) {
    case ChernSource::trivial: return "trivial";
    case ChernSource::window_square: return "window_square";
    case ChernSource::window_triangular: return "window_triangular";
    case ChernSource::chain: return "chain";
    case ChernSource::computed_fhs: return "computed_fhs";
    case ChernSource::computed_transport: return "computed_transport";
    case ChernSource::unresolved: return "unresolved";
  }
  return "unresolved";
}

inline ChernSource chern_source_from_string(std::string_view s) {
  for (auto c : {ChernSource::trivial, ChernSource::window_square, ChernSource::window_triangular,
                 ChernSource::chain, ChernSource::computed_fhs, ChernSource::computed_transport,
                 ChernSource::unresolved}) {
    if (to_string(c) == s) return c;
  }
  throw std::invalid_argument("unknown chern source: " + std::string(s));
}

/// One spectral gap at one flux. The outer gaps j = 0 and j = q are
/// semi-infinite (lo = -inf, hi = +inf respectively).
struct GapRecord {
  std::int64_t p = 1;
  std::int64_t q = 1;
  std::int64_t j = 0;
  double lo = 0.0;
  double hi = 0.0;
  double width = 0.0;
  bool closed = false;
  std::optional<std::int64_t> chern;
  ChernSource source = ChernSource::unresolved;

  Fraction rho() const { return {j, q}; }
  Fraction flux_fraction() const { return {p, q}; }
  bool outer() const { return j == 0 || j == q; }
  bool open() const { return !closed; }

  /// Interval clipped to [-e_max, e_max] for drawing and overlap tests.
  std::pair<double, double> clamped(double e_max) const {
    return {std::clamp(lo, -e_max, e_max), std::clamp(hi, -e_max, e_max)};
  }
};

struct BandSpectrum {
  HofstadterModel model;
  std::vector<std::pair<double, double>> bands;  // ascending, q entries
  std::vector<BlochMomentum> edge_kpoints;
  bool dense_fallback = false;
};

struct ChambersData {
  std::vector<double> poly_coeffs;  // P(lambda) = sum_n c_n lambda^n, c_0 = 0
  double h_offset = 0.0;
  double max_deviation = 0.0;  // relative spread of the coefficients over the check points
  bool k_independent = true;
};

// ---------------------------------------------------------------------------
// determinant

/// Eigenvalues of H(k), ascending. Uses the banded path for q > 3.
inline std::vector<double> spectrum_at(const HofstadterModel& m, BlochMomentum k) {
  return eigenvalues(build_cyclic(m, k));
}

inline double direct_determinant(const HofstadterModel& m, BlochMomentum k) {
  double d = 1.0;
  for (double e : spectrum_at(m, k)) d *= e;
  return d;
}

/// The k-dependent part of det H(k) at (x, y) = (q k1, q k2).
inline double det_oscillation(const HofstadterModel& m, double x, double y) {
  const auto q = static_cast<double>(m.flux.q());
  const bool odd = m.flux.q() % 2 != 0;
  const double cross = std::real(m.omega_u_pow_q() * std::polar(1.0, wrap_angle(x + y)));
  const double body = std::pow(m.t.t2, q) * std::cos(x) + std::pow(m.t.t1, q) * std::cos(y) +
                      (odd ? 1.0 : -1.0) * std::pow(m.t.t3, q) * cross;
  return (odd ? 2.0 : -2.0) * body;
}

/// h = det H(0) minus the oscillatory part at k = 0.
inline double calibrate_h_offset(const HofstadterModel& m) {
  return direct_determinant(m, {0.0, 0.0}) - det_oscillation(m, 0.0, 0.0);
}

inline double det_closed_form(const HofstadterModel& m, BlochMomentum k, double h_offset) {
  const auto q = static_cast<double>(m.flux.q());
  return h_offset + det_oscillation(m, wrap_angle(q * k.k1), wrap_angle(q * k.k2));
}

inline double det_closed_form(const HofstadterModel& m, BlochMomentum k) {
  return det_closed_form(m, k, calibrate_h_offset(m));
}

/// Coefficients of det(diag(eigs) - lambda) in ascending powers of lambda.
inline std::vector<double> characteristic_coefficients(const std::vector<double>& eigs) {
  std::vector<double> c{1.0};  // prod (lambda - e_i)
  for (double e : eigs) {
    std::vector<double> next(c.size() + 1, 0.0);
    for (std::size_t n = 0; n < c.size(); ++n) {
      next[n + 1] += c[n];
      next[n] -= e * c[n];
    }
    c = std::move(next);
  }
  if (eigs.size() % 2 != 0) {
    for (double& v : c) v = -v;
  }
  return c;
}

/// P(lambda) at k0 = (0, 0), cross-checked at `checks` further random momenta.
inline ChambersData chambers_polynomial(const HofstadterModel& m, int checks = 4,
                                        std::uint64_t seed = 0x5eed) {
  auto coeffs_at = [&](BlochMomentum k) {
    auto c = characteristic_coefficients(spectrum_at(m, k));
    c[0] = 0.0;
    return c;
  };
  ChambersData out;
  out.poly_coeffs = coeffs_at({0.0, 0.0});
  out.h_offset = calibrate_h_offset(m);

  double scale = 1.0;
  for (double v : out.poly_coeffs) scale = std::max(scale, std::abs(v));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
  for (int n = 0; n < checks; ++n) {
    const BlochMomentum k{u(rng), u(rng)};
    const auto c = coeffs_at(k);
    for (std::size_t i = 0; i < c.size(); ++i) {
      out.max_deviation = std::max(out.max_deviation, std::abs(c[i] - out.poly_coeffs[i]) / scale);
    }
  }
  out.k_independent = out.max_deviation <= 1e-9;
  return out;
}

// ---------------------------------------------------------------------------
// band-edge momenta

namespace detail {

// Minimizes f over the plane by compass search from `start`.
template <class F>
std::pair<double, double> compass_minimize(F&& f, std::pair<double, double> start, double step,
                                           double tol = 1e-12) {
  auto [x, y] = start;
  double best = f(x, y);
  while (step > tol) {
    bool moved = false;
    for (auto [dx, dy] : std::array<std::pair<double, double>, 4>{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}}) {
      const double v = f(x + dx * step, y + dy * step);
      if (v < best) {
        best = v;
        x += dx * step;
        y += dy * step;
        moved = true;
        break;
      }
    }
    if (!moved) step *= 0.5;
  }
  return {x, y};
}

// (x, y) = q k positions of the global maximum and minimum of det H.
inline std::vector<std::pair<double, double>> oscillation_extremizers(const HofstadterModel& m) {
  const double tmax = std::max({m.t.t1, m.t.t2, m.t.t3});
  if (tmax == 0.0) return {{0.0, 0.0}};
  const auto q = static_cast<double>(m.flux.q());
  const double a = std::pow(m.t.t2 / tmax, q);
  const double b = std::pow(m.t.t1 / tmax, q);
  const double c = std::pow(m.t.t3 / tmax, q);
  const cplx u = (m.flux.q() % 2 != 0 ? 1.0 : -1.0) * m.omega_u_pow_q();
  auto g = [&](double x, double y) {
    return a * std::cos(x) + b * std::cos(y) + c * std::real(u * std::polar(1.0, x + y));
  };

  constexpr int n = 72;
  const double h = two_pi / n;
  std::pair<double, double> arg_max{0, 0}, arg_min{0, 0};
  double vmax = -std::numeric_limits<double>::infinity();
  double vmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < n; ++l) {
      const double x = -std::numbers::pi + i * h, y = -std::numbers::pi + l * h;
      const double v = g(x, y);
      if (v > vmax) vmax = v, arg_max = {x, y};
      if (v < vmin) vmin = v, arg_min = {x, y};
    }
  }
  arg_max = compass_minimize([&](double x, double y) { return -g(x, y); }, arg_max, h);
  arg_min = compass_minimize(g, arg_min, h);
  return {arg_max, arg_min};
}

}  // namespace detail

/// Momenta where det H(k) is extremal. For the isotropic model at
/// phi_d = +-pi/2 these are the analytic points
///   odd q:                  qk = +-(pi/6, pi/6), +-(5pi/6, 5pi/6)
///   even q, w_u^q = -1:     qk = (0, 0), +-(2pi/3, 2pi/3)
///   even q, w_u^q = +1:     qk = (pi, pi), +-(pi/3, pi/3)
/// and otherwise a global maximizer and minimizer found numerically.
inline std::vector<BlochMomentum> band_edge_kpoints(const HofstadterModel& m) {
  constexpr double pi = std::numbers::pi;
  std::vector<std::pair<double, double>> qk;
  if (m.isotropic() && m.inversion_symmetric()) {
    if (m.flux.q() % 2 != 0) {
      qk = {{pi / 6, pi / 6}, {-pi / 6, -pi / 6}, {5 * pi / 6, 5 * pi / 6}, {-5 * pi / 6, -5 * pi / 6}};
    } else if (std::real(m.omega_u_pow_q()) < 0) {
      qk = {{0, 0}, {2 * pi / 3, 2 * pi / 3}, {-2 * pi / 3, -2 * pi / 3}};
    } else {
      qk = {{pi, pi}, {pi / 3, pi / 3}, {-pi / 3, -pi / 3}};
    }
  } else {
    qk = detail::oscillation_extremizers(m);
  }
  const auto q = static_cast<double>(m.flux.q());
  std::vector<BlochMomentum> out;
  out.reserve(qk.size());
  for (auto [x, y] : qk) out.push_back({x / q, y / q});
  return out;
}

// ---------------------------------------------------------------------------
// bands and gaps

/// Bands assembled from the eigenvalues at the band-edge momenta.
inline BandSpectrum compute_bands(const HofstadterModel& m) {
  BandSpectrum out{m, {}, band_edge_kpoints(m), false};
  const auto q = static_cast<std::size_t>(m.flux.q());
  out.bands.assign(q, {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
  for (const auto& k : out.edge_kpoints) {
    const auto e = spectrum_at(m, k);
    for (std::size_t n = 0; n < q; ++n) {
      out.bands[n].first = std::min(out.bands[n].first, e[n]);
      out.bands[n].second = std::max(out.bands[n].second, e[n]);
    }
  }
  for (std::size_t n = 0; n + 1 < q; ++n) {
    if (out.bands[n].second > out.bands[n + 1].first + 1e-8) {
      throw Error("compute_bands: bands " + std::to_string(n + 1) + " and " + std::to_string(n + 2) +
                  " overlap at flux " + std::to_string(m.flux.p()) + "/" + std::to_string(m.flux.q()));
    }
  }
  return out;
}

/// Bands from an n x n scan of the magnetic cell [0, 2pi/q)^2, each extremum
/// then polished by compass search on the band energy.
inline BandSpectrum compute_bands_dense(const HofstadterModel& m, int n = 64) {
  const auto q = static_cast<std::size_t>(m.flux.q());
  const double cell = two_pi / static_cast<double>(q);
  const double h = cell / n;
  BandSpectrum out{m, {}, {}, true};
  out.bands.assign(q, {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
  std::vector<std::pair<BlochMomentum, BlochMomentum>> where(q);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const BlochMomentum k{a * h, b * h};
      const auto e = spectrum_at(m, k);
      for (std::size_t i = 0; i < q; ++i) {
        if (e[i] < out.bands[i].first) out.bands[i].first = e[i], where[i].first = k;
        if (e[i] > out.bands[i].second) out.bands[i].second = e[i], where[i].second = k;
      }
    }
  }
  for (std::size_t i = 0; i < q; ++i) {
    auto level = [&](double sign) {
      return [&, sign](double x, double y) { return sign * spectrum_at(m, {x, y})[i]; };
    };
    auto [x0, y0] = detail::compass_minimize(level(1.0), {where[i].first.k1, where[i].first.k2}, h / 2, 1e-10);
    auto [x1, y1] = detail::compass_minimize(level(-1.0), {where[i].second.k1, where[i].second.k2}, h / 2, 1e-10);
    out.bands[i].first = std::min(out.bands[i].first, spectrum_at(m, {x0, y0})[i]);
    out.bands[i].second = std::max(out.bands[i].second, spectrum_at(m, {x1, y1})[i]);
    out.edge_kpoints.push_back({x0, y0});
    out.edge_kpoints.push_back({x1, y1});
  }
  return out;
}

/// compute_bands, retrying with the dense scan if the edge momenta fail.
inline BandSpectrum compute_bands_checked(const HofstadterModel& m) {
  try {
    return compute_bands(m);
  } catch (const Error&) {
    return compute_bands_dense(m);
  }
}

/// q + 1 gap records; the outer two carry sigma = 0.
inline std::vector<GapRecord> compute_gaps(const BandSpectrum& spec, double eps_gap = default_gap_epsilon) {
  const auto& f = spec.model.flux;
  const std::int64_t q = f.q();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<GapRecord> out;
  out.reserve(static_cast<std::size_t>(q + 1));
  for (std::int64_t j = 0; j <= q; ++j) {
    GapRecord g;
    g.p = f.p();
    g.q = q;
    g.j = j;
    g.lo = j == 0 ? -inf : spec.bands[j - 1].second;
    g.hi = j == q ? inf : spec.bands[j].first;
    g.width = (j == 0 || j == q) ? inf : std::max(0.0, g.hi - g.lo);
    g.closed = g.width < eps_gap;
    if (g.outer()) {
      g.chern = 0;
      g.source = ChernSource::trivial;
    }
    out.push_back(g);
  }
  return out;
}

/// Largest distance between spec H(k) at flux Phi and -spec H(k') at -Phi,
/// each band-edge momentum k matched with its best partner k'.
inline double inversion_check(const HofstadterModel& m) {
  if (!m.inversion_symmetric()) throw std::invalid_argument("inversion_check: phi_d must be +-pi/2");
  const HofstadterModel mirror(m.flux.inverted(), m.phi_d, m.t);
  std::vector<std::vector<double>> here, there;
  for (const auto& k : band_edge_kpoints(m)) here.push_back(spectrum_at(m, k));
  for (const auto& k : band_edge_kpoints(mirror)) {
    auto e = spectrum_at(mirror, k);
    std::reverse(e.begin(), e.end());
    for (double& v : e) v = -v;
    there.push_back(std::move(e));
  }
  auto dist = [](const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
  };
  double worst = 0.0;
  auto sweep = [&](const auto& xs, const auto& ys) {
    for (const auto& a : xs) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& b : ys) best = std::min(best, dist(a, b));
      worst = std::max(worst, best);
    }
  };
  sweep(here, there);
  sweep(there, here);
  return worst;
}

}  // namespace hofbutter
