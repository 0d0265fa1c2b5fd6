#include <catch_amalgamated.hpp>

#include <limits>
#include <sstream>

#include "hofbutter/io.hpp"

using namespace hofbutter;

TEST_CASE("gap records in JSON", "[io]") {
  const auto gaps = compute_gaps(compute_bands(HofstadterModel(Flux(1, 3))));
  const auto outer = to_json(gaps[0]);
  CHECK(outer.at("lo").is_null());
  CHECK(outer.at("width").is_null());
  CHECK(outer.at("chern") == 0);
  CHECK(outer.at("source") == "trivial");
  const auto closed = to_json(gaps[2]);
  CHECK(closed.at("closed") == true);
  CHECK(closed.at("chern").is_null());
  CHECK(closed.at("source") == "unresolved");

  for (const auto& g : gaps) {
    const auto back = gap_from_json(to_json(g));
    CHECK(back.j == g.j);
    CHECK(back.lo == g.lo);
    CHECK(back.hi == g.hi);
    CHECK(back.width == g.width);
    CHECK(back.closed == g.closed);
    CHECK(back.chern == g.chern);
    CHECK(back.source == g.source);
  }
}

TEST_CASE("band spectrum JSON has the documented fields", "[io]") {
  const HofstadterModel m(Flux(2, 5), 1.2, {1.0, 0.5, 0.25});
  const auto spec = compute_bands_checked(m);
  const auto v = to_json(spec, compute_gaps(spec));
  CHECK(v.at("p") == 2);
  CHECK(v.at("q") == 5);
  CHECK(v.at("phi_d") == 1.2);
  CHECK(v.at("t") == json::array({1.0, 0.5, 0.25}));
  CHECK(v.at("bands").size() == 5);
  CHECK(v.at("bands")[0].size() == 2);
  REQUIRE(v.at("gaps").size() == 6);
  for (const char* key : {"j", "lo", "hi", "width", "closed", "chern", "source"}) CHECK(v.at("gaps")[1].contains(key));
}

TEST_CASE("gap CSV", "[io]") {
  const auto gaps = compute_gaps(compute_bands(HofstadterModel(Flux(1, 3))));
  std::ostringstream os;
  write_gaps_csv(os, gaps);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "p,q,j,lo,hi,width,closed,chern,source");
  std::getline(in, line);
  CHECK(line.rfind("1,3,0,-inf,", 0) == 0);
  CHECK(line.find(",inf,false,0,trivial") != std::string::npos);
  std::getline(in, line);
  std::getline(in, line);
  CHECK(line.find(",true,,unresolved") != std::string::npos);
}

TEST_CASE("diagram JSON lines round trip", "[io]") {
  ButterflyConfig c;
  c.q_max = 6;
  c.mu_bins = 64;
  c.flux_bins = 48;
  c.window_fluxes = {{2, 5}};
  c.excluded_values = {3};
  const auto d = build_diagram(c);
  std::stringstream s;
  write_diagram_jsonl(s, d);
  const auto back = read_diagram_jsonl(s);
  CHECK(config_hash(back.config) == config_hash(d.config));
  REQUIRE(back.fluxes.size() == d.fluxes.size());
  for (std::size_t i = 0; i < d.fluxes.size(); ++i) {
    const auto& a = d.fluxes[i];
    const auto& b = back.fluxes[i];
    CHECK(a.p == b.p);
    CHECK(a.q == b.q);
    CHECK(a.excluded == b.excluded);
    CHECK(a.status == b.status);
    REQUIRE(a.gaps.size() == b.gaps.size());
    for (std::size_t j = 0; j < a.gaps.size(); ++j) {
      CHECK(a.gaps[j].lo == b.gaps[j].lo);
      CHECK(a.gaps[j].hi == b.gaps[j].hi);
      CHECK(a.gaps[j].chern == b.gaps[j].chern);
      CHECK(a.gaps[j].source == b.gaps[j].source);
    }
  }
  // a re-read diagram renders the same picture
  CHECK(render(back).ppm() == render(d).ppm());
}

TEST_CASE("malformed diagram files are rejected", "[io]") {
  std::istringstream no_config(R"({"kind":"flux","p":1,"q":1,"excluded":false,"status":""})");
  CHECK_THROWS(read_diagram_jsonl(no_config));
  std::istringstream garbage("{not json");
  CHECK_THROWS(read_diagram_jsonl(garbage));
}

TEST_CASE("config hash ignores the thread count only", "[io]") {
  ButterflyConfig a;
  ButterflyConfig b = a;
  b.jobs = 7;
  CHECK(config_hash(a) == config_hash(b));
  b.q_max = a.q_max + 1;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(hex_hash(config_hash(a)).size() == 16);
}
