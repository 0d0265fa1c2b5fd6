// hofbutter: spectra, Chern numbers, gap labels and butterfly diagrams of the
// triangular-lattice Hofstadter model.

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hofbutter/hofbutter.hpp"

namespace hb = hofbutter;

namespace {

struct ModelArgs {
  std::int64_t p = 1;
  std::int64_t q = 3;
  double phi_d = std::numbers::pi / 2;
  double t1 = 1.0, t2 = 1.0, t3 = 1.0;

  hb::HofstadterModel model() const { return hb::HofstadterModel(hb::Flux(p, q), phi_d, {t1, t2, t3}); }
};

void add_hopping(CLI::App* app, ModelArgs& m) {
  app->add_option("--phi-d", m.phi_d, "flux through the down triangle (radians)")->capture_default_str();
  app->add_option("--t1", m.t1, "hopping along T")->capture_default_str();
  app->add_option("--t2", m.t2, "hopping along S")->capture_default_str();
  app->add_option("--t3", m.t3, "hopping along TS (0 gives the square lattice)")->capture_default_str();
}

void add_flux(CLI::App* app, ModelArgs& m) {
  app->add_option("--p", m.p, "flux numerator")->required();
  app->add_option("--q", m.q, "flux denominator")->required();
  add_hopping(app, m);
}

// Writes to --out, or stdout when it is empty or "-".
class Sink {
 public:
  explicit Sink(const std::string& path, bool binary = false) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, binary ? std::ios::binary : std::ios::out);
    if (!*file_) throw std::runtime_error("cannot open " + path + " for writing");
  }
  std::ostream& os() { return file_ ? *file_ : std::cout; }
  void close() {
    os().flush();
    if (file_ && !*file_) throw std::runtime_error("write failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

int run_spectrum(const ModelArgs& a, const std::string& format, const std::string& out, double eps, bool dense) {
  const auto m = a.model();
  const auto spec = dense ? hb::compute_bands_dense(m) : hb::compute_bands_checked(m);
  const auto gaps = hb::compute_gaps(spec, eps);
  Sink sink(out);
  if (format == "csv") {
    hb::write_gaps_csv(sink.os(), gaps);
  } else if (format == "json") {
    sink.os() << hb::to_json(spec, gaps).dump(2) << '\n';
  } else {
    throw CLI::ValidationError("--format", "spectrum writes json or csv");
  }
  sink.close();
  return 0;
}

int run_chern(const ModelArgs& a, std::optional<std::int64_t> gap, std::optional<std::int64_t> band,
              const std::string& method_name, int grid, const std::string& out) {
  const auto m = a.model();
  const auto method = hb::chern_method_from_string(method_name);
  Sink sink(out);
  if (method == hb::ChernMethod::transport) {
    if (!band) throw CLI::ValidationError("--method", "transport gives a band's Berry phase; pass --band N");
    const auto r = hb::band_chern_transport(m, *band);
    sink.os() << hb::json{{"band", *band},      {"method", "transport"}, {"holonomy", r.holonomy},
                          {"residue", r.residue}, {"q", m.flux.q()},     {"steps", r.steps},
                          {"extrapolation_change", r.extrapolation_change}}
                     .dump()
              << '\n';
    sink.close();
    return 0;
  }
  if (band) {
    sink.os() << hb::to_json(hb::band_chern_fhs(m, *band, grid)).dump() << '\n';
    sink.close();
    return 0;
  }
  const auto gaps = hb::compute_gaps(hb::compute_bands_checked(m));
  std::vector<std::int64_t> js;
  if (gap) {
    if (*gap < 0 || *gap > m.flux.q()) throw CLI::ValidationError("--gap", "gap index out of range");
    if (gaps[static_cast<std::size_t>(*gap)].closed) throw hb::GapClosed(static_cast<int>(*gap), "gap is closed");
    if (gaps[static_cast<std::size_t>(*gap)].outer()) {
      sink.os() << hb::json{{"j", *gap}, {"chern", 0}, {"method", "trivial"}, {"grid", 0}, {"residual", 0.0}}.dump()
                << '\n';
      sink.close();
      return 0;
    }
    js.push_back(*gap);
  } else {
    js = hb::detail::open_interior(gaps);
  }
  for (const auto& r : hb::gap_cherns_fhs(m, js, grid)) sink.os() << hb::to_json(r).dump() << '\n';
  sink.close();
  return 0;
}

int run_dioph(const ModelArgs& a, std::optional<std::int64_t> j, const std::string& strategy_name, int grid,
              const std::string& out) {
  const auto strategy = hb::strategy_from_string(strategy_name);
  const hb::Flux f(a.p, a.q);
  const auto m = a.model();
  const auto gaps = hb::compute_gaps(hb::compute_bands_checked(m));
  std::map<std::int64_t, std::pair<std::optional<std::int64_t>, std::string>> labels;
  std::string source;
  if (strategy == hb::Strategy::computed) {
    source = "computed_fhs";
    for (const auto& r : hb::gap_cherns_fhs(m, hb::detail::open_interior(gaps), grid)) labels[r.index] = {r.value, ""};
  } else {
    const auto rep = hb::resolve_gaps(gaps, f, strategy);
    for (const auto& x : rep.assigned) labels[x.j] = {x.chern, std::string(hb::to_string(x.source))};
    for (const auto& [jj, why] : rep.violations) labels[jj] = {std::nullopt, why};
  }
  Sink sink(out);
  for (const auto& g : gaps) {
    if (j && g.j != *j) continue;
    hb::json line{{"p", f.p()}, {"q", f.q()}, {"j", g.j}, {"residue", hb::solve_residue(g.j, f).r}, {"closed", g.closed}};
    const auto it = labels.find(g.j);
    if (g.outer()) {
      line["chern"] = 0;
      line["source"] = "trivial";
    } else if (g.closed) {
      line["chern"] = nullptr;
      line["source"] = "closed";
    } else if (it != labels.end() && it->second.first) {
      line["chern"] = *it->second.first;
      line["source"] = strategy == hb::Strategy::computed ? source : it->second.second;
    } else {
      line["chern"] = nullptr;
      line["source"] = "unresolved";
      if (it != labels.end()) line["reason"] = it->second.second;
    }
    sink.os() << line.dump() << '\n';
  }
  sink.close();
  return 0;
}

struct ButterflyArgs {
  std::int64_t q_max = 16;
  std::string resolver = "triangular";
  std::string odd_q = "computed";
  bool include_half_fluxes = false;
  std::vector<std::string> window_fluxes;
  std::vector<std::int64_t> excluded_values;
  std::int64_t threshold = 16;
  int mu_bins = 1024;
  int flux_bins = 1024;
  double row_scale = 0.5;
  std::optional<double> e_max;
  std::string from;
  std::string errors_out;
};

hb::ButterflyConfig make_config(const ModelArgs& m, const ButterflyArgs& b, int grid, unsigned jobs) {
  hb::ButterflyConfig c;
  c.q_max = b.q_max;
  c.phi_d = m.phi_d;
  c.t = {m.t1, m.t2, m.t3};
  c.resolver = hb::strategy_from_string(b.resolver);
  c.odd_q = hb::odd_policy_from_string(b.odd_q);
  c.exclude_half_fluxes = !b.include_half_fluxes;
  c.excluded_values.insert(b.excluded_values.begin(), b.excluded_values.end());
  for (const auto& s : b.window_fluxes) {
    const auto slash = s.find('/');
    if (slash == std::string::npos) throw CLI::ValidationError("--window-flux", "expected p/q, got " + s);
    c.window_fluxes.insert({std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1))});
  }
  c.computed_threshold = b.threshold;
  c.chern_grid = grid;
  c.mu_bins = b.mu_bins;
  c.flux_bins = b.flux_bins;
  c.row_scale = b.row_scale;
  c.e_max = b.e_max;
  c.jobs = jobs;
  c.validate();
  return c;
}

int run_butterfly(const ModelArgs& m, const ButterflyArgs& b, int grid, unsigned jobs, const std::string& format,
                  const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  hb::ButterflyDiagram d;
  if (!b.from.empty()) {
    std::ifstream in(b.from);
    if (!in) throw std::runtime_error("cannot open " + b.from);
    d = hb::read_diagram_jsonl(in);
  } else {
    d = hb::build_diagram(make_config(m, b, grid, jobs));
  }
  std::size_t failed = 0, excluded = 0;
  for (const auto& f : d.fluxes) failed += !f.status.empty(), excluded += f.excluded;

  Sink sink(out, format == "ppm");
  if (format == "json") {
    hb::write_diagram_jsonl(sink.os(), d);
  } else if (format == "csv") {
    sink.os() << hb::gaps_csv_header() << '\n';
    for (const auto& f : d.fluxes) hb::write_gaps_csv(sink.os(), f.gaps, false);
  } else if (format == "ppm") {
    sink.os() << hb::render(d).ppm();
  } else {
    throw CLI::ValidationError("--format", "butterfly writes json, csv or ppm");
  }
  sink.close();

  if (!b.errors_out.empty()) {
    const auto errs = hb::detect_coloring_errors(d);
    Sink es(b.errors_out);
    for (const auto& e : errs) es.os() << hb::to_json(e).dump() << '\n';
    es.close();
    std::cerr << "coloring errors: " << errs.size() << '\n';
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cerr << "fluxes " << d.fluxes.size() << ", excluded " << excluded << ", with status " << failed << ", config "
            << hb::hex_hash(hb::config_hash(d.config)) << ", " << secs << " s\n";
  return 0;
}

int run_verify(const std::string& suite) {
  bool ok = true;
  for (const auto& c : hb::run_verify(suite)) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.suite << '/' << c.name;
    if (!c.detail.empty()) std::cout << "  " << c.detail;
    std::cout << '\n';
    ok = ok && c.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hofstadter butterfly on the triangular lattice: spectra, Chern numbers, gap labels"};
  app.set_config("--config", "", "key = value file mirroring the command-line flags")->check(CLI::ExistingFile);
  app.require_subcommand(1);

  ModelArgs model;
  std::string out, format = "json", method = "fhs", strategy = "triangular", suite = "all";
  int grid = 32;
  unsigned jobs = 0;
  double eps = hb::default_gap_epsilon;
  bool dense = false;
  std::optional<std::int64_t> gap, band, j;
  ButterflyArgs bf;

  auto* spectrum = app.add_subcommand("spectrum", "bands and gaps at one flux");
  add_flux(spectrum, model);
  spectrum->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  spectrum->add_option("--out", out, "output file (default stdout)");
  spectrum->add_option("--eps", eps, "gaps narrower than this are closed")->capture_default_str();
  spectrum->add_flag("--dense", dense, "dense k-grid scan instead of the band-edge momenta");

  auto* chern = app.add_subcommand("chern", "Chern numbers of gaps or bands at one flux");
  add_flux(chern, model);
  auto* gap_opt = chern->add_option("--gap,--j", gap, "gap index (default: every open interior gap)");
  chern->add_option("--band", band, "band index, 1-based")->excludes(gap_opt);
  chern->add_option("--method", method, "fhs or transport")->check(CLI::IsMember({"fhs", "transport"}))->capture_default_str();
  chern->add_option("--grid", grid, "starting FHS grid per 2 pi / q")->check(CLI::Range(2, 256))->capture_default_str();
  chern->add_option("--out", out, "output file (default stdout)");
  chern->add_flag("--json", "JSON output (the only format; accepted for compatibility)");

  auto* dioph = app.add_subcommand("dioph", "gap labels from the Diophantine residue");
  add_flux(dioph, model);
  dioph->add_option("--j", j, "only this gap");
  dioph->add_option("--strategy", strategy, "square, triangular, chain or computed")
      ->check(CLI::IsMember({"square", "triangular", "chain", "computed"}))
      ->capture_default_str();
  dioph->add_option("--grid", grid, "FHS grid for the computed strategy")->check(CLI::Range(2, 256))->capture_default_str();
  dioph->add_option("--out", out, "output file (default stdout)");

  auto* butterfly = app.add_subcommand("butterfly", "sweep every p/q with q <= qmax");
  add_hopping(butterfly, model);
  butterfly->add_option("--qmax", bf.q_max, "largest denominator")->check(CLI::PositiveNumber)->capture_default_str();
  butterfly->add_option("--resolver", bf.resolver, "square, triangular, chain or computed")
      ->check(CLI::IsMember({"square", "triangular", "chain", "computed"}))
      ->capture_default_str();
  butterfly->add_option("--odd-q", bf.odd_q, "triangular resolver at odd q: computed or window")
      ->check(CLI::IsMember({"computed", "window"}))
      ->capture_default_str();
  butterfly->add_flag("--include-half-fluxes", bf.include_half_fluxes, "colour p = (q +- 1)/2 too");
  butterfly->add_option("--window-flux", bf.window_fluxes, "force the window at p/q (repeatable)");
  butterfly->add_option("--exclude-value", bf.excluded_values, "Chern value a window may not use (repeatable)");
  butterfly->add_option("--threshold", bf.threshold, "direct Chern computation for q <= this")->capture_default_str();
  butterfly->add_option("--grid", grid, "starting FHS grid")->check(CLI::Range(2, 256))->capture_default_str();
  butterfly->add_option("--mu-bins", bf.mu_bins, "image width")->check(CLI::Range(2, 1 << 16))->capture_default_str();
  butterfly->add_option("--flux-bins", bf.flux_bins, "image height")->check(CLI::Range(2, 1 << 16))->capture_default_str();
  butterfly->add_option("--row-scale", bf.row_scale, "row thickness H c / q, this is c")->capture_default_str();
  butterfly->add_option("--e-max", bf.e_max, "energy clamp (default 2 (t1 + t2 + t3))");
  butterfly->add_option("--jobs", jobs, "worker threads (0: all cores)")->capture_default_str();
  butterfly->add_option("--format", format, "json (JSON lines), csv or ppm")
      ->check(CLI::IsMember({"json", "csv", "ppm"}))
      ->capture_default_str();
  butterfly->add_option("--out", out, "output file (default stdout)");
  butterfly->add_option("--from", bf.from, "re-read a JSON-lines diagram instead of computing")->check(CLI::ExistingFile);
  butterfly->add_option("--errors", bf.errors_out, "write Streda coloring errors (JSON lines) here");

  auto* verify = app.add_subcommand("verify", "run the invariant suites");
  verify->add_option("--suite", suite, "algebra, chambers, chern, diophantine or all")
      ->check(CLI::IsMember({"algebra", "chambers", "chern", "diophantine", "all"}))
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*spectrum) return run_spectrum(model, format, out, eps, dense);
    if (*chern) return run_chern(model, gap, band, method, grid, out);
    if (*dioph) return run_dioph(model, j, strategy, grid, out);
    if (*butterfly) return run_butterfly(model, bf, grid, jobs, format, out);
    if (*verify) return run_verify(suite);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "hofbutter: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
