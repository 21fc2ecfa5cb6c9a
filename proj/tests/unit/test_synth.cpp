#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "taxnet/errors.hpp"
#include "taxnet/sink_conduit.hpp"
#include "taxnet/synth.hpp"
#include "taxnet/value_flow.hpp"

using namespace taxnet;
using namespace taxnet::test;

namespace {

struct Ranked {
  std::vector<SinkScore> sinks;
  std::vector<ConduitScore> conduits;
};

Ranked analyze(const SynthData& data) {
  auto net = build_network(data.firms, data.links, data.tax, data.gdp);
  auto cond = condense_cycles(net);
  auto flow = propagate_value(cond.view);
  Ranked r;
  r.sinks = sink_scores(net, cond.view, flow);
  r.conduits = conduit_scores(net, cond.view, flow, identify_sinks(r.sinks));
  std::sort(r.sinks.begin(), r.sinks.end(),
            [](const SinkScore& a, const SinkScore& b) { return a.s > b.s; });
  std::sort(r.conduits.begin(), r.conduits.end(), [](const ConduitScore& a, const ConduitScore& b) {
    return a.c_combined.value_or(-1e300) > b.c_combined.value_or(-1e300);
  });
  return r;
}

std::string dump(const SynthData& data) {
  std::ostringstream s;
  write_firms_csv(s, data.firms);
  write_ownership_csv(s, data.links);
  write_tax_csv(s, data.tax);
  write_gdp_csv(s, data.gdp);
  return s.str();
}

}  // namespace

TEST_CASE("rng transforms are fixed") {
  SynthRng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.bits() == b.bits());
  SynthRng r(7);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(r.below(5) < 5u);
    const double z = r.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::fabs(sum / n) < 0.05);
  CHECK(std::fabs(sq / n - 1.0) < 0.05);
}

TEST_CASE("same seed, same bytes") {
  SynthConfig config;
  config.seed = 9;
  CHECK(dump(generate_synthetic(config)) == dump(generate_synthetic(config)));
  config.seed = 10;
  const auto other = dump(generate_synthetic(config));
  config.seed = 9;
  CHECK(dump(generate_synthetic(config)) != other);

  TempDir a, b;
  write_synthetic(generate_synthetic(config), a.path());
  write_synthetic(generate_synthetic(config), b.path());
  for (const char* f : {"firms.csv", "ownership.csv", "tax.csv", "gdp.csv"}) {
    CHECK(read_text(a / f) == read_text(b / f));
    CHECK_FALSE(read_text(a / f).empty());
  }
}

TEST_CASE("generated data satisfies the model") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SynthConfig config;
    config.seed = seed;
    config.sectors = 4;
    const auto data = generate_synthetic(config);
    CHECK(data.firms.size() == config.firms);
    CHECK(data.tax.size() == config.jurisdictions);
    CHECK_NOTHROW(build_network(data.firms, data.links, data.tax, data.gdp));
    for (const auto& f : data.firms) CHECK(f.sector < 'A' + 4);
    for (const auto& l : data.links) {
      CHECK(l.ratio > 0.0);
      CHECK(l.ratio <= 1.0);
    }
  }
}

TEST_CASE("zero-tax clique") {
  SynthConfig config;
  config.zero_tax_clique_size = 5;
  const auto data = generate_synthetic(config);
  REQUIRE(data.zero_tax_clique.size() == 5);
  std::size_t zeros = 0;
  for (const auto& a : data.zero_tax_clique) {
    for (const auto& b : data.zero_tax_clique) {
      if (a != b && data.tax.rate(a, b) == 0.0) ++zeros;
    }
  }
  CHECK(zeros == 20);

  config.zero_tax_clique_size = 0;
  config.zero_tax_clique = {"XXX"};
  CHECK_THROWS_AS(generate_synthetic(config), InputError);
}

TEST_CASE("planted pairs come out on top") {
  std::size_t sink_hits = 0, conduit_hits = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SynthConfig config;
    config.seed = seed;
    const auto data = generate_synthetic(config);
    REQUIRE(data.planted_sinks.size() == 1);
    REQUIRE(data.planted_conduits.size() == 1);
    const auto r = analyze(data);
    sink_hits += r.sinks.front().pair == data.planted_sinks[0] ? 1 : 0;
    for (std::size_t i = 0; i < std::min<std::size_t>(3, r.conduits.size()); ++i) {
      if (r.conduits[i].pair == data.planted_conduits[0]) ++conduit_hits;
    }
  }
  CHECK(sink_hits >= 9);
  CHECK(conduit_hits >= 9);
}

TEST_CASE("infeasible configurations throw") {
  auto bad = [](const char* key, const char* value) {
    SynthConfig config;
    apply_synth_setting(config, key, value);
    return generate_synthetic(config);
  };
  CHECK_THROWS_AS(bad("jurisdictions", "1"), InputError);
  CHECK_THROWS_AS(bad("sectors", "22"), InputError);
  CHECK_THROWS_AS(bad("firms", "10"), InputError);
  CHECK_THROWS_AS(bad("planted_sinks", "ZZZ:K"), InputError);
  CHECK_THROWS_AS(bad("zero_tax_clique_size", "21"), InputError);
  SynthConfig config;
  apply_synth_setting(config, "planted_sinks", "none");
  CHECK_THROWS_AS(generate_synthetic(config), InputError);  // conduits still planted
  apply_synth_setting(config, "planted_conduits", "none");
  CHECK_NOTHROW(generate_synthetic(config));
}

TEST_CASE("config file parsing") {
  std::istringstream in(
      "# comment\n"
      "seed = 17\n"
      "firms=500\n"
      "\n"
      "n_jurisdictions = 30  # trailing\n"
      "zero_tax_clique = NLD,LUX\n");
  const auto c = parse_synth_config(in);
  CHECK(c.seed == 17);
  CHECK(c.firms == 500);
  CHECK(c.jurisdictions == 30);
  CHECK(c.zero_tax_clique == std::vector<std::string>{"NLD", "LUX"});

  std::istringstream unknown("colour = blue\n");
  CHECK_THROWS_AS(parse_synth_config(unknown), InputError);
  std::istringstream missing_eq("seed 4\n");
  CHECK_THROWS_AS(parse_synth_config(missing_eq), InputError);
  SynthConfig config;
  CHECK_THROWS_AS(apply_synth_setting(config, "firms", "many"), InputError);
  CHECK_THROWS_AS(apply_synth_setting(config, "planted_sinks", "NLD"), InputError);
}
