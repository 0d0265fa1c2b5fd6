#pragma once

// Butterfly sweeps: every reduced flux p/q with q <= q_max, its gaps, their
// labels, cross-flux Streda checks and a raster picture with flux on the
// vertical axis and chemical potential on the horizontal one.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hofbutter/chern.hpp"
#include "hofbutter/diophantine.hpp"
#include "hofbutter/magnetic_algebra.hpp"
#include "hofbutter/parallel.hpp"
#include "hofbutter/spectrum.hpp"

namespace hofbutter {

/// How the triangular resolver treats odd q, where no printed window exists.
enum class OddPolicy { computed, window };

struct ButterflyConfig {
  std::int64_t q_max = 16;
  double phi_d = std::numbers::pi / 2;
  Hopping t{};
  Strategy resolver = Strategy::triangular;
  OddPolicy odd_q = OddPolicy::computed;
  bool exclude_half_fluxes = true;               // p = (q +- 1)/2 left uncoloured by the triangular resolver
  std::set<std::int64_t> excluded_values;        // Chern values a window may not use
  std::set<std::pair<std::int64_t, std::int64_t>> window_fluxes;  // force the window here
  std::int64_t computed_threshold = 16;          // direct Chern computation allowed for q <= this
  int chern_grid = 32;
  double eps_gap = default_gap_epsilon;
  int mu_bins = 1024;
  int flux_bins = 1024;
  double row_scale = 0.5;
  std::optional<double> e_max;                   // defaults to 2 (t1 + t2 + t3)
  unsigned jobs = 0;                             // 0: all hardware threads

  double energy_clamp() const { return e_max.value_or(2.0 * (t.t1 + t.t2 + t.t3)); }

  void validate() const {
    if (q_max < 1) throw std::invalid_argument("q_max must be >= 1");
    if (mu_bins < 2 || flux_bins < 2) throw std::invalid_argument("mu_bins and flux_bins must be >= 2");
    if (chern_grid < 2) throw std::invalid_argument("chern grid must be >= 2");
    if (!(energy_clamp() > 0)) throw std::invalid_argument("energy clamp must be positive");
  }
};

struct FluxEntry {
  std::int64_t p = 1;
  std::int64_t q = 1;
  std::vector<GapRecord> gaps;
  bool excluded = false;
  std::string status;  // empty unless something failed at this flux
};

struct ButterflyDiagram {
  ButterflyConfig config;
  std::vector<FluxEntry> fluxes;  // Farey order
};

/// All reduced p/q in (0, 1] with q <= q_max, ascending.
inline std::vector<Flux> enumerate_fluxes(std::int64_t q_max) {
  if (q_max < 1) throw std::invalid_argument("enumerate_fluxes: q_max must be >= 1");
  std::vector<Flux> out;
  std::int64_t a = 0, b = 1, c = 1, d = q_max;
  while (c <= q_max) {
    const std::int64_t k = (q_max + b) / d;
    const std::int64_t nc = k * c - a, nd = k * d - b;
    a = c, b = d, c = nc, d = nd;
    out.emplace_back(a, b);
  }
  return out;
}

inline HofstadterModel model_at(const ButterflyConfig& cfg, const Flux& f) {
  return HofstadterModel(f, cfg.phi_d, cfg.t);
}

namespace detail {

inline bool is_half_flux(const Flux& f) {
  return f.q() >= 3 && f.q() % 2 == 1 && (2 * f.p() == f.q() - 1 || 2 * f.p() == f.q() + 1);
}

// FHS labels for the listed gaps; failures go to `status`.
inline void label_computed(const ButterflyConfig& cfg, const HofstadterModel& m, std::vector<GapRecord>& gaps,
                           const std::vector<std::int64_t>& js, std::string& status) {
  if (js.empty()) return;
  try {
    for (const auto& r : gap_cherns_fhs(m, js, cfg.chern_grid)) {
      auto& g = gaps[static_cast<std::size_t>(r.index)];
      g.chern = r.value;
      g.source = ChernSource::computed_fhs;
    }
  } catch (const std::exception& e) {
    status = std::string("computed labels failed: ") + e.what();
  }
}

inline std::vector<std::int64_t> open_interior(const std::vector<GapRecord>& gaps) {
  std::vector<std::int64_t> js;
  for (const auto& g : gaps) {
    if (!g.outer() && !g.closed) js.push_back(g.j);
  }
  return js;
}

}  // namespace detail

/// Bands, gaps and labels at one flux under the configured resolver.
inline FluxEntry build_flux_entry(const ButterflyConfig& cfg, const Flux& f) {
  FluxEntry e{f.p(), f.q(), {}, false, {}};
  const auto m = model_at(cfg, f);
  try {
    e.gaps = compute_gaps(compute_bands_checked(m), cfg.eps_gap);
  } catch (const std::exception& ex) {
    e.status = std::string("spectrum failed: ") + ex.what();
    return e;
  }
  const bool small = f.q() <= cfg.computed_threshold;
  const auto open = detail::open_interior(e.gaps);
  const bool forced = cfg.window_fluxes.count({f.p(), f.q()}) > 0;

  Strategy rule = cfg.resolver;
  if (rule == Strategy::triangular && !forced) {
    if (cfg.exclude_half_fluxes && detail::is_half_flux(f)) {
      e.excluded = true;
      return e;
    }
    if (f.q() % 2 == 1 && cfg.odd_q == OddPolicy::computed && small) rule = Strategy::computed;
  }
  if (rule == Strategy::computed) {
    if (small) {
      detail::label_computed(cfg, m, e.gaps, open, e.status);
    } else {
      e.status = "q above the computed threshold; gaps left unresolved";
    }
    return e;
  }

  const auto rep = resolve_gaps(e.gaps, f, rule, cfg.excluded_values);
  for (const auto& a : rep.assigned) {
    auto& g = e.gaps[static_cast<std::size_t>(a.j)];
    if (g.outer()) continue;
    g.chern = a.chern;
    g.source = a.source;
  }
  if (!rep.violations.empty()) {
    std::vector<std::int64_t> missing;
    for (const auto& v : rep.violations) missing.push_back(v.first);
    if (small) detail::label_computed(cfg, m, e.gaps, missing, e.status);
  }
  return e;
}

/// Every flux up to q_max, computed in parallel and merged in Farey order.
inline ButterflyDiagram build_diagram(const ButterflyConfig& cfg) {
  cfg.validate();
  const auto fluxes = enumerate_fluxes(cfg.q_max);
  ButterflyDiagram d{cfg, std::vector<FluxEntry>(fluxes.size())};
  parallel_for(fluxes.size(), cfg.jobs, [&](std::size_t i) { d.fluxes[i] = build_flux_entry(cfg, fluxes[i]); });
  return d;
}

// ---------------------------------------------------------------------------
// coloring errors

struct ColoringError {
  GapRecord a;
  GapRecord b;
  bool wing_from_a = true;  // the wing of a was followed into b (else b into a)
};

/// Pairs (A, B) of diagram fluxes with |p_A q_B - p_B q_A| = 1, A before B.
inline std::vector<std::pair<std::size_t, std::size_t>> farey_neighbours(const ButterflyDiagram& d) {
  std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> index;
  std::int64_t q_max = 1;
  for (std::size_t i = 0; i < d.fluxes.size(); ++i) {
    index[{d.fluxes[i].p, d.fluxes[i].q}] = i;
    q_max = std::max(q_max, d.fluxes[i].q);
  }
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < d.fluxes.size(); ++i) {
    const auto a = d.fluxes[i].p, b = d.fluxes[i].q;
    // a x - b y = +-1 over denominators x <= q_max
    for (std::int64_t sign : {1, -1}) {
      std::int64_t x0 = 1;
      if (b > 1) {
        const std::int64_t inv = modular_inverse(a % b == 0 ? b : a % b, b);
        x0 = ((sign * inv) % b + b) % b;
        if (x0 == 0) x0 = b;
      }
      for (std::int64_t x = x0; x <= q_max; x += b) {
        const std::int64_t num = a * x - sign;
        if (num % b != 0) continue;
        const std::int64_t y = num / b;
        if (y < 1 || y > x) continue;
        auto it = index.find({y, x});
        if (it != index.end() && it->second > i) out.emplace_back(i, it->second);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace detail {

// Gap tables at fluxes outside the diagram, computed on demand.
class SpectrumCache {
 public:
  explicit SpectrumCache(const ButterflyConfig& cfg) : cfg_(cfg) {}
  std::vector<GapRecord> gaps(std::int64_t p, std::int64_t q) {
    {
      std::lock_guard lock(mutex_);
      auto it = cache_.find({p, q});
      if (it != cache_.end()) return it->second;
    }
    auto g = compute_gaps(compute_bands_checked(model_at(cfg_, Flux(p, q))), cfg_.eps_gap);
    std::lock_guard lock(mutex_);
    return cache_.emplace(std::make_pair(p, q), std::move(g)).first->second;
  }

 private:
  const ButterflyConfig& cfg_;
  std::mutex mutex_;
  std::map<std::pair<std::int64_t, std::int64_t>, std::vector<GapRecord>> cache_;
};

inline constexpr int approach_steps = 8;
inline constexpr double wing_min_width = 1e-6;
inline constexpr double wing_min_iou = 0.5;

// Streda line j = sigma p + t q through an open labelled gap.
inline std::int64_t line_offset(const GapRecord& g) { return (g.j - *g.chern * g.p) / g.q; }

// Follows the Streda line of x through the fluxes (k p_y + p_x)/(k q_y + q_x),
// k = 1..K, which approach y from x's side. True when that line stays an open
// gap the whole way and ends on y's gap.
inline bool wing_reaches(const GapRecord& x, const GapRecord& y, SpectrumCache& cache, double e_max) {
  const std::int64_t sigma = *x.chern;
  const std::int64_t t = line_offset(x);
  if (y.j != sigma * y.p + t * y.q) return false;
  std::vector<std::pair<std::int64_t, std::int64_t>> path;  // (p, q) and the gap index
  for (int k = 1; k <= approach_steps; ++k) {
    const std::int64_t pc = k * y.p + x.p, qc = k * y.q + x.q;
    const std::int64_t jc = sigma * pc + t * qc;
    if (jc < 0 || jc > qc) return false;
    path.emplace_back(pc, qc);
  }
  auto prev = x.clamped(e_max);
  for (const auto& [pc, qc] : path) {
    const std::int64_t jc = sigma * pc + t * qc;
    const auto g = cache.gaps(pc, qc)[static_cast<std::size_t>(jc)];
    if (g.width < wing_min_width) return false;
    const auto cur = g.clamped(e_max);
    if (!(interval_overlap(prev, cur) > 0)) return false;
    prev = cur;
  }
  const auto last = y.clamped(e_max);
  const double inter = interval_overlap(prev, last);
  const double uni = std::max(prev.second, last.second) - std::min(prev.first, last.first);
  return uni > 0 && inter >= wing_min_iou * uni;
}

}  // namespace detail

/// Inconsistent labels between Farey-adjacent fluxes. A mismatching pair of
/// overlapping open gaps is reported only when one gap's Streda line can be
/// followed, open, into the other; overlap alone does not make two gaps the
/// same wing.
inline std::vector<ColoringError> detect_coloring_errors(const ButterflyDiagram& d) {
  const auto pairs = farey_neighbours(d);
  const double e_max = d.config.energy_clamp();
  detail::SpectrumCache cache(d.config);
  std::vector<std::vector<ColoringError>> found(pairs.size());
  parallel_for(pairs.size(), d.config.jobs, [&](std::size_t n) {
    const auto& fa = d.fluxes[pairs[n].first];
    const auto& fb = d.fluxes[pairs[n].second];
    // both gap lists are ordered in energy: sweep them together
    std::size_t ia = 0, ib = 0;
    while (ia < fa.gaps.size() && ib < fb.gaps.size()) {
      const auto& ga = fa.gaps[ia];
      const auto& gb = fb.gaps[ib];
      if (!ga.closed && !gb.closed && ga.chern && gb.chern) {
        const auto verdict = streda_check(ga, gb, d.config.eps_gap);
        const bool same_line = *ga.chern == *gb.chern && detail::line_offset(ga) == detail::line_offset(gb);
        if (verdict == StredaVerdict::inconsistent && !same_line) {
          if (detail::wing_reaches(ga, gb, cache, e_max)) {
            found[n].push_back({ga, gb, true});
          } else if (detail::wing_reaches(gb, ga, cache, e_max)) {
            found[n].push_back({ga, gb, false});
          }
        }
      }
      if (ga.hi < gb.hi) ++ia;
      else ++ib;
    }
  });
  std::vector<ColoringError> out;
  for (auto& v : found) out.insert(out.end(), v.begin(), v.end());
  return out;
}

// ---------------------------------------------------------------------------
// rendering

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr Rgb band_color{0, 0, 0};
inline constexpr Rgb unresolved_color{128, 128, 128};
inline constexpr Rgb trivial_color{255, 255, 255};

inline Rgb hsv(double hue_deg, double s, double v) {
  const double h = std::fmod(std::fmod(hue_deg, 360.0) + 360.0, 360.0) / 60.0;
  const double c = v * s;
  const double x = c * (1 - std::abs(std::fmod(h, 2.0) - 1));
  std::array<double, 3> rgb{};
  switch (static_cast<int>(h)) {
    case 0: rgb = {c, x, 0}; break;
    case 1: rgb = {x, c, 0}; break;
    case 2: rgb = {0, c, x}; break;
    case 3: rgb = {0, x, c}; break;
    case 4: rgb = {x, 0, c}; break;
    default: rgb = {c, 0, x}; break;
  }
  const double m = v - c;
  auto byte = [&](double u) { return static_cast<std::uint8_t>(std::lround(255.0 * (u + m))); };
  return {byte(rgb[0]), byte(rgb[1]), byte(rgb[2])};
}

/// Hue of sigma != 0 in degrees: |sigma| spreads over half the circle and a
/// negative sign adds 180, so sigma and -sigma sit opposite each other.
inline double chern_hue(std::int64_t sigma, std::int64_t max_abs) {
  const auto m = static_cast<double>(std::max<std::int64_t>(1, max_abs));
  const auto a = static_cast<double>(sigma < 0 ? -sigma : sigma);
  return 180.0 * (a - 1.0) / m + (sigma < 0 ? 180.0 : 0.0);
}

inline Rgb chern_color(std::optional<std::int64_t> sigma, std::int64_t max_abs) {
  if (!sigma) return unresolved_color;
  if (*sigma == 0) return trivial_color;
  return hsv(chern_hue(*sigma, max_abs), 0.85, 0.95);
}

struct Image {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;  // row-major, row 0 at the top

  Rgb at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

  /// Binary PPM (P6).
  std::string ppm() const {
    std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    out.reserve(out.size() + pixels.size() * 3);
    for (const auto& p : pixels) {
      out.push_back(static_cast<char>(p.r));
      out.push_back(static_cast<char>(p.g));
      out.push_back(static_cast<char>(p.b));
    }
    return out;
  }
};

namespace detail {

// Pixel rows [lo, hi] of a band of the given thickness centred on fraction
// f of n pixels. Mirror-exact: rows(1 - f) = n - 1 - rows(f).
inline std::pair<int, int> mirrored_rows(Fraction f, double thickness, int n) {
  const Fraction half(1, 2);
  if (f > half) {
    const auto [lo, hi] = mirrored_rows(Fraction(1) - f, thickness, n);
    return {n - 1 - hi, n - 1 - lo};
  }
  const double c = f.value() * (n - 1);
  const double r = std::max(0.5, thickness / 2);
  return {static_cast<int>(std::ceil(c - r - 1e-9)), static_cast<int>(std::floor(c + r + 1e-9))};
}

}  // namespace detail

/// Flux 0 at the bottom, 2 pi at the top; energy -e_max on the left. The 1/1
/// row is drawn at both ends since flux 0 is the same model.
inline Image render(const ButterflyDiagram& d) {
  const auto& cfg = d.config;
  const int w = cfg.mu_bins, h = cfg.flux_bins;
  const double e_max = cfg.energy_clamp();
  Image img{w, h, std::vector<Rgb>(static_cast<std::size_t>(w) * h, band_color)};

  std::int64_t max_abs = 1;
  for (const auto& f : d.fluxes) {
    for (const auto& g : f.gaps) {
      if (g.chern) max_abs = std::max<std::int64_t>(max_abs, *g.chern < 0 ? -*g.chern : *g.chern);
    }
  }
  // lowest q painted last so the big wings stay on top
  std::vector<std::size_t> order(d.fluxes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return d.fluxes[a].q > d.fluxes[b].q;
  });

  auto paint_rows = [&](const FluxEntry& f, Fraction at) {
    const double thick = std::max(1.0, h * cfg.row_scale / static_cast<double>(f.q));
    const auto [lo_row, hi_row] = detail::mirrored_rows(at, thick, h);
    for (const auto& g : f.gaps) {
      if (g.closed) continue;
      const auto [lo, hi] = g.clamped(e_max);
      const Rgb c = chern_color(g.chern, max_abs);
      for (int x = 0; x < w; ++x) {
        // pixel centres are exactly antisymmetric about E = 0
        const double e = static_cast<double>(2 * x + 1 - w) * e_max / w;
        if (!(lo <= e && e <= hi)) continue;
        for (int pos = std::max(0, lo_row); pos <= std::min(h - 1, hi_row); ++pos) {
          img.pixels[static_cast<std::size_t>(h - 1 - pos) * w + x] = c;
        }
      }
    }
  };
  for (auto i : order) {
    const auto& f = d.fluxes[i];
    paint_rows(f, Fraction(f.p, f.q));
    if (f.p == f.q) paint_rows(f, Fraction(0));
  }
  return img;
}

}  // namespace hofbutter
