#include <cmath>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "taxnet/errors.hpp"
#include "taxnet/report.hpp"

using namespace taxnet;
using namespace taxnet::test;

namespace {

MultilayerScore ml(const char* code, char sector, double m_out, double m_in, double m) {
  MultilayerScore s;
  s.pair = {code, sector};
  s.m_out = m_out;
  s.m_in = m_in;
  s.m = m;
  return s;
}

}  // namespace

TEST_CASE("sink scores round-trip sorted by pair") {
  std::vector<SinkScore> scores = {{{"NLD", 'K'}, 12.5}, {{"BMU", 'K'}, -0.1 / 3.0},
                                   {{"LUX", 'G'}, 0.0}};
  std::ostringstream out;
  report::write_sink_scores(out, scores);
  CHECK(out.str().rfind("jurisdiction,sector,S\nBMU,K,", 0) == 0);
  std::istringstream in(out.str());
  const auto back = report::read_sink_scores(in, "sink");
  REQUIRE(back.size() == 3);
  CHECK(back[0].pair == PairKey{"BMU", 'K'});
  CHECK(back[0].s == scores[1].s);  // %.17g is exact
  CHECK(back[2].s == 12.5);
}

TEST_CASE("conduit scores keep empty components empty") {
  ConduitScore a;
  a.pair = {"NLD", 'K'};
  a.c_out_raw = 3.25;
  a.c_out_std = 2.0;
  ConduitScore b;
  b.pair = {"LUX", 'G'};
  b.c_out_raw = 1.0;
  b.c_in_raw = 2.0;
  b.c_out_std = 0.5;
  b.c_in_std = 1.5;
  b.c_combined = combine_euclidean(0.5, 1.5);
  std::ostringstream out;
  report::write_conduit_scores(out, std::vector<ConduitScore>{a, b});
  CHECK(out.str().find("NLD,K,3.25,0,2,,\n") != std::string::npos);
  std::istringstream in(out.str());
  const auto back = report::read_conduit_scores(in, "conduit");
  REQUIRE(back.size() == 2);
  CHECK(back[1].pair == PairKey{"NLD", 'K'});
  CHECK_FALSE(back[1].c_in_std.has_value());
  CHECK_FALSE(back[1].c_combined.has_value());
  CHECK(back[0].c_combined == b.c_combined);
}

TEST_CASE("load scores") {
  std::vector<report::LoadRow> rows = {{"NLD", 10.0, 3.44}, {"GBR", std::nullopt, 7.87}};
  std::ostringstream out;
  report::write_load_scores(out, rows);
  CHECK(out.str() == "jurisdiction,l_raw,L\nGBR,,7.8700000000000001\nNLD,10,3.4399999999999999\n");
  std::istringstream in(out.str());
  const auto back = report::read_load_scores(in, "load");
  auto map = report::standardized_load_map(back);
  CHECK(map.at("GBR") == 7.87);
  CHECK(map.at("NLD") == 3.44);
  CHECK_FALSE(back[0].l_raw.has_value());
  std::vector<report::LoadRow> twice = {{"NLD", 1.0, 1.0}, {"NLD", 1.0, 1.0}};
  CHECK_THROWS_AS(report::standardized_load_map(twice), InputError);
}

TEST_CASE("readers reject malformed tables") {
  std::istringstream header("jurisdiction,sector,score\nNLD,K,1\n");
  CHECK_THROWS_AS(report::read_sink_scores(header, "s"), InputError);
  std::istringstream fields("jurisdiction,sector,S\nNLD,K\n");
  CHECK_THROWS_AS(report::read_sink_scores(fields, "s"), InputError);
  std::istringstream number("jurisdiction,sector,S\nNLD,K,high\n");
  CHECK_THROWS_AS(report::read_sink_scores(number, "s"), InputError);
  std::istringstream empty("");
  CHECK_THROWS_AS(report::read_load_scores(empty, "l"), InputError);
  CHECK_THROWS_AS(report::read_load_scores(std::filesystem::path("/nonexistent/load.csv")),
                  InputError);
}

TEST_CASE("multilayer file names and tables") {
  CHECK(report::multilayer_file_name(0.5) == "multilayer_scores_beta0.5.csv");
  CHECK(report::multilayer_file_name(0.8) == "multilayer_scores_beta0.8.csv");
  CHECK(report::multilayer_file_name(0.1) == "multilayer_scores_beta0.1.csv");
  CHECK(report::multilayer_file_name(1) == "multilayer_scores_beta1.csv");

  MultilayerTable t;
  t.beta = 0.5;
  t.scores = {ml("NLD", 'K', 10.88, 5.06, 8.49), ml("GBR", 'N', 3.01, 4.08, 3.59),
              ml("IRL", 'K', 1.0, 1.0, 1.0)};
  std::ostringstream out;
  report::write_multilayer_scores(out, t);
  std::istringstream in(out.str());
  const auto back = report::read_multilayer_scores(in, "m");
  REQUIRE(back.size() == 3);
  CHECK(back[0].pair == PairKey{"GBR", 'N'});
  CHECK(back[2].m == 8.49);

  std::ostringstream table;
  report::print_multilayer_table(table, t, 2.0);
  CHECK(table.str().find("NLD") != std::string::npos);
  CHECK(table.str().find("8.49") != std::string::npos);
  CHECK(table.str().find("IRL") == std::string::npos);
  std::ostringstream none;
  report::print_multilayer_table(none, t, 100.0);
  CHECK(none.str().find("(none)") != std::string::npos);
}

TEST_CASE("beta sweep summary") {
  SweepReport r;
  SweepEntry e;
  e.table.beta = 0.3;
  e.counts = {{1.0, 5}, {1.5, 3}, {2.0, 1}};
  r.entries.push_back(e);
  std::ostringstream out;
  report::write_beta_sweep(out, r);
  CHECK(out.str() ==
        "beta,threshold,count\n"
        "0.29999999999999999,1,5\n"
        "0.29999999999999999,1.5,3\n"
        "0.29999999999999999,2,1\n");
}

TEST_CASE("histogram") {
  const std::vector<double> xs = {0.5, 1.6, 1.7};
  const auto bins = report::histogram(xs, 1.1);
  REQUIRE(bins.size() == 2);
  CHECK(bins[0].low == 0.0);
  CHECK(bins[0].high == doctest::Approx(1.1));
  CHECK(bins[0].count == 1);
  CHECK(bins[1].low == doctest::Approx(1.1));
  CHECK(bins[1].high == doctest::Approx(2.2));
  CHECK(bins[1].count == 2);

  CHECK(report::histogram(std::vector<double>{}, 1.0).empty());
  CHECK_THROWS_AS(report::histogram(xs, 0.0), InputError);
  CHECK_THROWS_AS(report::histogram(xs, -1.0), InputError);
  CHECK_THROWS_AS(report::histogram(std::vector<double>{NAN}, 1.0), InputError);

  // Bins are contiguous, start at a multiple of the width and cover every value.
  const std::vector<double> spread = {-2.5, 0.0, 0.99, 1.0, 7.3};
  const auto b = report::histogram(spread, 1.0);
  std::size_t total = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    total += b[i].count;
    if (i) CHECK(b[i].low == b[i - 1].high);
  }
  CHECK(total == spread.size());
  CHECK(b.front().low == -3.0);
  CHECK(b.back().high == 8.0);
  CHECK(b[3].count == 2);  // [0, 1)

  std::ostringstream out;
  report::write_histogram(out, bins);
  CHECK(out.str().rfind("bin_low,bin_high,count\n0,", 0) == 0);
}

TEST_CASE("read_column") {
  std::istringstream in("jurisdiction,sector,C_out,C\nNLD,K,2.5,\nLUX,G,1,3\n");
  auto last = report::read_column(in, "c", "");
  CHECK(last.column == "C");
  CHECK(last.values == std::vector<double>{3.0});
  CHECK(last.empty == 1);
  std::istringstream again("jurisdiction,sector,C_out,C\nNLD,K,2.5,\nLUX,G,1,3\n");
  auto named = report::read_column(again, "c", "C_out");
  CHECK(named.values == std::vector<double>{2.5, 1.0});
  std::istringstream missing("a,b\n1,2\n");
  CHECK_THROWS_AS(report::read_column(missing, "c", "C"), InputError);
}

TEST_CASE("cartogram keeps one sector") {
  std::vector<MultilayerScore> scores = {ml("NLD", 'K', 1, 1, 8.49), ml("LUX", 'G', 1, 1, 5.81),
                                         ml("IRL", 'K', 1, 1, 2.28)};
  const auto rows = report::cartogram(scores, 'K');
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::pair<std::string, double>{"IRL", 2.28});
  CHECK(rows[1] == std::pair<std::string, double>{"NLD", 8.49});
  CHECK(report::cartogram(scores, 'A').empty());
  std::ostringstream out;
  report::write_cartogram(out, rows);
  CHECK(out.str() == "jurisdiction,M\nIRL,2.2799999999999998\nNLD,8.4900000000000002\n");
}
