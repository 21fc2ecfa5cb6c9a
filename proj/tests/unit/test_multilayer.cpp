#include <cmath>
#include <limits>

#include "doctest.h"
#include "taxnet/errors.hpp"
#include "taxnet/multilayer.hpp"
#include "taxnet/report.hpp"

using namespace taxnet;

namespace {

ConduitScore conduit(const char* code, char sector, std::optional<double> out,
                     std::optional<double> in) {
  ConduitScore c;
  c.pair = {code, sector};
  c.c_out_std = out;
  c.c_in_std = in;
  if (out && in) c.c_combined = combine_euclidean(*out, *in);
  return c;
}

const std::string kFixtures = TAXNET_FIXTURES;

}  // namespace

TEST_CASE("component is the weighted geometric mean") {
  CHECK(multilayer_component(19.37, 3.44, 1.0, 0.5) == doctest::Approx(10.88).epsilon(0.002));
  CHECK(multilayer_component(19.37, 3.44, 1.0, 0.8) == doctest::Approx(8.98).epsilon(0.002));
  CHECK(multilayer_component(4.0, 1.0, 1.0, 1.0) == doctest::Approx(2.0));
  CHECK(multilayer_component(2.0, 8.0, 2.0, 1.0) == doctest::Approx(std::cbrt(32.0)));
}

TEST_CASE("beta zero returns the conduit component") {
  CHECK(multilayer_component(7.25, 100.0, 1.0, 0.0) == 7.25);
  CHECK(multilayer_component(0.3, 1e-3, 2.5, 0.0) == 0.3);
}

TEST_CASE("mean-level inputs stay at the mean level") {
  auto s = multilayer_score(conduit("NLD", 'K', 1.0, 1.0), 1.0, 1.0, 0.7);
  REQUIRE(s.has_value());
  CHECK(s->m_out == doctest::Approx(1.0));
  CHECK(s->m_in == doctest::Approx(1.0));
  CHECK(s->m == doctest::Approx(1.0));
}

TEST_CASE("non-positive inputs are floored and flagged") {
  bool clamped = false;
  const double v = multilayer_component(-0.4, 2.0, 1.0, 0.5, &clamped);
  CHECK(clamped);
  CHECK(std::isfinite(v));
  CHECK(v == doctest::Approx(std::exp((std::log(kMultilayerFloor) + 0.5 * std::log(2.0)) / 1.5)));
  multilayer_component(1.0, 2.0, 1.0, 0.5, &clamped);
  CHECK_FALSE(clamped);

  auto s = multilayer_score(conduit("LUX", 'G', 0.0, 3.0), 2.0, 1.0, 0.5);
  REQUIRE(s.has_value());
  CHECK(s->clamped);
}

TEST_CASE("weights are validated") {
  CHECK_THROWS_AS(multilayer_component(1, 1, 0.0, 0.5), InputError);
  CHECK_THROWS_AS(multilayer_component(1, 1, -1.0, 0.5), InputError);
  CHECK_THROWS_AS(multilayer_component(1, 1, 1.0, -0.1), InputError);
  CHECK_THROWS_AS(multilayer_component(1, 1, 1.0, std::numeric_limits<double>::quiet_NaN()),
                  InputError);
}

TEST_CASE("monotone in both inputs") {
  for (double beta : {0.1, 0.5, 0.8}) {
    double prev = 0.0;
    for (double c = 0.5; c < 20.0; c += 0.75) {
      const double v = multilayer_component(c, 2.0, 1.0, beta);
      CHECK(v > prev);
      prev = v;
    }
    prev = 0.0;
    for (double l = 0.5; l < 20.0; l += 0.75) {
      const double v = multilayer_component(2.0, l, 1.0, beta);
      CHECK(v > prev);
      prev = v;
    }
  }
}

TEST_CASE("table exclusions and ranking") {
  std::vector<ConduitScore> conduits = {conduit("NLD", 'K', 5.0, 2.0), conduit("LUX", 'G', 1.0, 4.0),
                                        conduit("BMU", 'B', std::nullopt, 3.0),
                                        conduit("ZZZ", 'A', 1.0, 1.0)};
  std::map<std::string, double> load = {{"NLD", 3.0}, {"LUX", 2.0}, {"BMU", 1.0}};
  auto t = multilayer_scores(conduits, load, 1.0, 0.5);
  CHECK(t.scores.size() == 2);
  CHECK(t.excluded_incomplete == 1);
  CHECK(t.excluded_no_load == 1);
  CHECK(t.scores[0].pair == PairKey{"NLD", 'K'});
  CHECK(t.scores[0].m >= t.scores[1].m);
}

TEST_CASE("beta zero reproduces the conduit ranking") {
  std::vector<ConduitScore> conduits = {conduit("NLD", 'K', 19.37, 6.13),
                                        conduit("LUX", 'G', 6.18, 10.79),
                                        conduit("GBR", 'N', 1.86, 2.94),
                                        conduit("MYS", 'C', 5.62, 1.03)};
  std::map<std::string, double> load = {{"NLD", 3.44}, {"LUX", 2.65}, {"GBR", 7.87}, {"MYS", 2.45}};
  auto t = multilayer_scores(conduits, load, 1.0, 0.0);
  REQUIRE(t.scores.size() == 4);
  for (const auto& s : t.scores) {
    for (const auto& c : conduits) {
      if (c.pair == s.pair) CHECK(s.m == doctest::Approx(*c.c_combined));
    }
  }
  CHECK(t.scores[0].pair.jurisdiction == "NLD");
  CHECK(t.scores[1].pair.jurisdiction == "LUX");
  CHECK(t.scores[2].pair.jurisdiction == "MYS");
  CHECK(t.scores[3].pair.jurisdiction == "GBR");
}

TEST_CASE("beta sweep") {
  std::vector<ConduitScore> conduits = {conduit("NLD", 'K', 19.37, 6.13),
                                        conduit("GBR", 'N', 1.86, 2.94),
                                        conduit("IRL", 'K', 0.5, 0.5)};
  std::map<std::string, double> load = {{"NLD", 3.44}, {"GBR", 7.87}, {"IRL", 2.39}};
  const std::vector<double> betas = {0.8, 0.1};
  auto r = beta_sweep(conduits, load, 1.0, betas, 3.0);
  REQUIRE(r.entries.size() == 2);
  CHECK(r.entries[0].table.beta == 0.8);
  CHECK(r.entries[1].table.beta == 0.1);
  const auto& counts = r.entries[0].counts;
  REQUIRE(counts.size() == 4);
  CHECK(counts[0].first == 1.0);
  CHECK(counts[3].first == 3.0);
  for (std::size_t i = 1; i < counts.size(); ++i) CHECK(counts[i].second <= counts[i - 1].second);
  // A report threshold equal to a fixed one is counted once.
  CHECK(beta_sweep(conduits, load, 1.0, betas, 2.0).entries[0].counts.size() == 3);
  CHECK_THROWS_AS(beta_sweep(conduits, load, 1.0, std::span<const double>{}), InputError);
}

TEST_CASE("reference tables at beta 0.5 and 0.8") {
  const auto conduits = report::read_conduit_scores(kFixtures + "/reference_conduit_scores.csv");
  const auto load =
      report::standardized_load_map(report::read_load_scores(kFixtures + "/reference_load_scores.csv"));
  for (const char* beta : {"0.5", "0.8"}) {
    const auto expected =
        report::read_multilayer_scores(kFixtures + "/reference_multilayer_beta" + beta + ".csv");
    const auto table = multilayer_scores(conduits, load, 1.0, std::stod(beta));
    for (const auto& e : expected) {
      bool found = false;
      for (const auto& s : table.scores) {
        if (s.pair != e.pair) continue;
        found = true;
        CHECK(std::fabs(s.m_out - e.m_out) <= 0.02);
        CHECK(std::fabs(s.m_in - e.m_in) <= 0.02);
        CHECK(std::fabs(s.m - e.m) <= 0.02);
      }
      CHECK(found);
    }
  }
}
