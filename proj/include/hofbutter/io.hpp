#pragma once

// JSON / CSV / JSON-lines persistence. Infinite gap ends are null in JSON
// and -inf / inf in CSV.

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hofbutter/butterfly.hpp"
#include "hofbutter/chern.hpp"
#include "hofbutter/diophantine.hpp"
#include "hofbutter/spectrum.hpp"

namespace hofbutter {

using json = nlohmann::json;

namespace detail {

inline json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline double number_or(const json& v, double fallback) { return v.is_null() ? fallback : v.get<double>(); }

inline std::string csv_number(double x) {
  if (std::isinf(x)) return x < 0 ? "-inf" : "inf";
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace detail

inline json to_json(const GapRecord& g) {
  return json{{"p", g.p},
              {"q", g.q},
              {"j", g.j},
              {"lo", detail::finite_or_null(g.lo)},
              {"hi", detail::finite_or_null(g.hi)},
              {"width", detail::finite_or_null(g.width)},
              {"closed", g.closed},
              {"chern", g.chern ? json(*g.chern) : json(nullptr)},
              {"source", std::string(to_string(g.source))}};
}

inline GapRecord gap_from_json(const json& v) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  GapRecord g;
  g.p = v.at("p").get<std::int64_t>();
  g.q = v.at("q").get<std::int64_t>();
  g.j = v.at("j").get<std::int64_t>();
  g.lo = detail::number_or(v.at("lo"), -inf);
  g.hi = detail::number_or(v.at("hi"), inf);
  g.width = detail::number_or(v.at("width"), inf);
  g.closed = v.at("closed").get<bool>();
  if (!v.at("chern").is_null()) g.chern = v.at("chern").get<std::int64_t>();
  g.source = chern_source_from_string(v.at("source").get<std::string>());
  return g;
}

inline json to_json(const BandSpectrum& s, const std::vector<GapRecord>& gaps) {
  const auto& m = s.model;
  json bands = json::array();
  for (auto [lo, hi] : s.bands) bands.push_back({lo, hi});
  json gs = json::array();
  for (const auto& g : gaps) {
    auto r = to_json(g);
    r.erase("p");
    r.erase("q");
    gs.push_back(std::move(r));
  }
  return json{{"p", m.flux.p()},
              {"q", m.flux.q()},
              {"phi_d", m.phi_d},
              {"t", {m.t.t1, m.t.t2, m.t.t3}},
              {"bands", std::move(bands)},
              {"gaps", std::move(gs)}};
}

inline const char* gaps_csv_header() { return "p,q,j,lo,hi,width,closed,chern,source"; }

inline std::string to_csv_row(const GapRecord& g) {
  std::ostringstream os;
  os << g.p << ',' << g.q << ',' << g.j << ',' << detail::csv_number(g.lo) << ',' << detail::csv_number(g.hi) << ','
     << detail::csv_number(g.width) << ',' << (g.closed ? "true" : "false") << ',';
  if (g.chern) os << *g.chern;
  os << ',' << to_string(g.source);
  return os.str();
}

inline void write_gaps_csv(std::ostream& out, const std::vector<GapRecord>& gaps, bool header = true) {
  if (header) out << gaps_csv_header() << '\n';
  for (const auto& g : gaps) out << to_csv_row(g) << '\n';
}

inline json to_json(const ChernResult& r) {
  return json{{"j", r.index},
              {"chern", r.value},
              {"method", std::string(to_string(r.method))},
              {"grid", r.grid},
              {"residual", r.residual},
              {"max_plaquette", r.max_plaquette},
              {"min_link", r.min_link}};
}

// ---------------------------------------------------------------------------
// butterfly config and diagrams

inline std::string_view to_string(OddPolicy p) { return p == OddPolicy::computed ? "computed" : "window"; }

inline OddPolicy odd_policy_from_string(std::string_view s) {
  if (s == "computed") return OddPolicy::computed;
  if (s == "window") return OddPolicy::window;
  throw std::invalid_argument("unknown odd-q policy: " + std::string(s));
}

/// Everything that determines the diagram contents. The thread count is left
/// out on purpose: output must not depend on it.
inline json to_json(const ButterflyConfig& c) {
  json wf = json::array();
  for (auto [p, q] : c.window_fluxes) wf.push_back({p, q});
  return json{{"q_max", c.q_max},
              {"phi_d", c.phi_d},
              {"t", {c.t.t1, c.t.t2, c.t.t3}},
              {"resolver", std::string(to_string(c.resolver))},
              {"odd_q", std::string(to_string(c.odd_q))},
              {"exclude_half_fluxes", c.exclude_half_fluxes},
              {"excluded_values", c.excluded_values},
              {"window_fluxes", std::move(wf)},
              {"computed_threshold", c.computed_threshold},
              {"chern_grid", c.chern_grid},
              {"eps_gap", c.eps_gap},
              {"mu_bins", c.mu_bins},
              {"flux_bins", c.flux_bins},
              {"row_scale", c.row_scale},
              {"e_max", c.energy_clamp()}};
}

inline ButterflyConfig butterfly_config_from_json(const json& v) {
  ButterflyConfig c;
  c.q_max = v.at("q_max").get<std::int64_t>();
  c.phi_d = v.at("phi_d").get<double>();
  const auto& t = v.at("t");
  c.t = Hopping{t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()};
  c.resolver = strategy_from_string(v.at("resolver").get<std::string>());
  c.odd_q = odd_policy_from_string(v.at("odd_q").get<std::string>());
  c.exclude_half_fluxes = v.at("exclude_half_fluxes").get<bool>();
  c.excluded_values = v.at("excluded_values").get<std::set<std::int64_t>>();
  for (const auto& pq : v.at("window_fluxes")) c.window_fluxes.insert({pq.at(0).get<std::int64_t>(), pq.at(1).get<std::int64_t>()});
  c.computed_threshold = v.at("computed_threshold").get<std::int64_t>();
  c.chern_grid = v.at("chern_grid").get<int>();
  c.eps_gap = v.at("eps_gap").get<double>();
  c.mu_bins = v.at("mu_bins").get<int>();
  c.flux_bins = v.at("flux_bins").get<int>();
  c.row_scale = v.at("row_scale").get<double>();
  c.e_max = v.at("e_max").get<double>();
  return c;
}

/// 64-bit FNV-1a of the canonical config JSON.
inline std::uint64_t config_hash(const ButterflyConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(c).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex_hash(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

/// Line 1: {"kind":"config", ...}. Then per flux a {"kind":"flux"} line
/// followed by one {"kind":"gap"} line per gap record.
inline void write_diagram_jsonl(std::ostream& out, const ButterflyDiagram& d) {
  json head{{"kind", "config"}, {"config", to_json(d.config)}, {"hash", hex_hash(config_hash(d.config))}};
  out << head.dump() << '\n';
  for (const auto& f : d.fluxes) {
    json fl{{"kind", "flux"}, {"p", f.p}, {"q", f.q}, {"excluded", f.excluded}, {"status", f.status}};
    out << fl.dump() << '\n';
    for (const auto& g : f.gaps) {
      auto r = to_json(g);
      r["kind"] = "gap";
      out << r.dump() << '\n';
    }
  }
}

inline ButterflyDiagram read_diagram_jsonl(std::istream& in) {
  ButterflyDiagram d;
  std::string line;
  bool have_config = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json v;
    try {
      v = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error("diagram line " + std::to_string(lineno) + ": " + e.what());
    }
    const auto kind = v.at("kind").get<std::string>();
    if (kind == "config") {
      d.config = butterfly_config_from_json(v.at("config"));
      have_config = true;
    } else if (kind == "flux") {
      FluxEntry f;
      f.p = v.at("p").get<std::int64_t>();
      f.q = v.at("q").get<std::int64_t>();
      f.excluded = v.at("excluded").get<bool>();
      f.status = v.at("status").get<std::string>();
      d.fluxes.push_back(std::move(f));
    } else if (kind == "gap") {
      if (d.fluxes.empty()) throw std::runtime_error("diagram line " + std::to_string(lineno) + ": gap before flux");
      auto g = gap_from_json(v);
      if (g.p != d.fluxes.back().p || g.q != d.fluxes.back().q) {
        throw std::runtime_error("diagram line " + std::to_string(lineno) + ": gap does not belong to the current flux");
      }
      d.fluxes.back().gaps.push_back(g);
    } else {
      throw std::runtime_error("diagram line " + std::to_string(lineno) + ": unknown kind " + kind);
    }
  }
  if (!have_config) throw std::runtime_error("diagram has no config line");
  return d;
}

inline json to_json(const ColoringError& e) {
  return json{{"a", to_json(e.a)}, {"b", to_json(e.b)}, {"wing_from_a", e.wing_from_a}};
}

}  // namespace hofbutter
