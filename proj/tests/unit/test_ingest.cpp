#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "taxnet/errors.hpp"
#include "taxnet/ingest.hpp"
#include "taxnet/synth.hpp"

using namespace taxnet;
using namespace taxnet::test;

namespace {

FirmsInput firms_from(const std::string& text) {
  std::istringstream in(text);
  return parse_firms(in);
}

OwnershipInput links_from(const std::string& text, bool percent = false) {
  std::istringstream in(text);
  return parse_ownership(in, {percent});
}

TaxInput tax_from(const std::string& text, TaxParseOptions options = {}) {
  std::istringstream in(text);
  return parse_tax_matrix(in, options);
}

GdpTable gdp_from(const std::string& text) {
  std::istringstream in(text);
  return parse_gdp(in);
}

const std::string kFirmsHeader = "firm_id,jurisdiction,sector,operating_income\n";
const std::string kLinksHeader = "shareholder_id,owned_id,ratio\n";

}  // namespace

TEST_CASE("firms: valid row") {
  auto r = firms_from(kFirmsHeader + "F1,NLD,K,1000000\n");
  REQUIRE(r.firms.size() == 1);
  CHECK(r.firms[0].id == "F1");
  CHECK(r.firms[0].jurisdiction == "NLD");
  CHECK(r.firms[0].sector == 'K');
  CHECK(r.firms[0].operating_income == 1e6);
}

TEST_CASE("firms: missing sector is dropped with a reason") {
  auto r = firms_from(kFirmsHeader + "F2,NLD,,1000000\n");
  CHECK(r.firms.empty());
  CHECK(r.report.rows_read == 1);
  CHECK(r.report.dropped.at("missing sector") == 1);
}

TEST_CASE("firms: five valid and two invalid rows") {
  auto r = firms_from(kFirmsHeader +
                      "F1,NLD,K,1\n"
                      "F2,LUX,G,2\n"
                      "F3,nl,k,3\n"
                      "F4,GB,C,-4\n"
                      "F5,BMU,B,5.5e3\n"
                      "F6,NLD,K,abc\n"
                      "F7,,K,7\n");
  CHECK(r.firms.size() == 5);
  CHECK(r.report.rows_dropped() == 2);
  // Drop accounting.
  CHECK(r.report.rows_read == r.firms.size() + r.report.rows_dropped());
  CHECK(r.firms[2].jurisdiction == "NLD");
  CHECK(r.firms[2].sector == 'K');
  CHECK(r.firms[3].jurisdiction == "GBR");
  CHECK(r.firms[3].operating_income == -4.0);
}

TEST_CASE("firms: header problems throw") {
  CHECK_THROWS_AS(firms_from(""), InputError);
  CHECK_THROWS_AS(firms_from("id,country,sector,income\nF1,NLD,K,1\n"), InputError);
}

TEST_CASE("ownership rows") {
  SUBCASE("valid") {
    auto r = links_from(kLinksHeader + "F1,F2,0.5\n");
    REQUIRE(r.links.size() == 1);
    CHECK(r.links[0].shareholder == "F1");
    CHECK(r.links[0].owned == "F2");
    CHECK(r.links[0].ratio == 0.5);
  }
  SUBCASE("self-loop") {
    auto r = links_from(kLinksHeader + "F1,F1,0.5\n");
    CHECK(r.links.empty());
    CHECK(r.report.dropped.at("self-loop") == 1);
  }
  SUBCASE("out of range") {
    auto r = links_from(kLinksHeader + "F1,F2,1.5\n");
    CHECK(r.links.empty());
    CHECK(r.report.dropped.at("ratio out of range") == 1);
  }
  SUBCASE("percentages need the flag") {
    auto plain = links_from(kLinksHeader + "F1,F2,50\n");
    CHECK(plain.links.empty());
    auto percent = links_from(kLinksHeader + "F1,F2,50\n", true);
    REQUIRE(percent.links.size() == 1);
    CHECK(percent.links[0].ratio == 0.5);
  }
  SUBCASE("duplicates merge and cap") {
    auto r = links_from(kLinksHeader + "A,B,0.3\nA,B,0.2\nC,D,0.7\nC,D,0.6\n");
    REQUIRE(r.links.size() == 2);
    CHECK(r.links[0].ratio == doctest::Approx(0.5));
    CHECK(r.links[1].ratio == 1.0);
    CHECK(r.report.warnings.size() == 2);
  }
}

TEST_CASE("tax matrix: long form") {
  auto r = tax_from("from,to,rate\nNLD,LUX,0.0\nLUX,NLD,0.05\nUSA,BRA,0.15\nBRA,USA,0.1\n",
                    {.default_rate = 0.3});
  const auto& t = r.tax;
  CHECK(t.size() == 4);
  CHECK(t.rate("NLD", "LUX") == 0.0);
  CHECK(t.rate("USA", "BRA") == 0.15);
  CHECK(t.rate("NLD", "USA") == 0.3);  // default fill
  CHECK_FALSE(r.report.warnings.empty());
}

TEST_CASE("tax matrix: domestic rate fills before the default") {
  auto r = tax_from("from,to,rate\nNLD,*,0.15\nNLD,LUX,0\nLUX,NLD,0.05\nDEU,NLD,0.2\n");
  CHECK(r.tax.rate("NLD", "DEU") == 0.15);
  CHECK(r.tax.rate("LUX", "DEU") == 0.3);
}

TEST_CASE("tax matrix: square form and percent flag") {
  auto r = tax_from(",LUX,NLD\nLUX,,5\nNLD,0,\n", {.rates_as_percent = true});
  CHECK(r.tax.rate("LUX", "NLD") == doctest::Approx(0.05));
  CHECK(r.tax.rate("NLD", "LUX") == 0.0);
}

TEST_CASE("tax matrix: errors") {
  CHECK_THROWS_AS(tax_from("from,to,rate\nNLD,LUX,1.5\n"), InputError);
  CHECK_THROWS_AS(tax_from("from,to,rate\nNLD,LUX,x\n"), InputError);
  CHECK_THROWS_AS(tax_from("a,b,c,d\n1,2,3,4\n"), InputError);
  CHECK_THROWS_AS(tax_from("from,to,rate\nNLD,LUX,0.1\nNLD,LUX,0.2\n"), InputError);
}

TEST_CASE("tax matrix: 165 jurisdictions give 27,060 directed rates") {
  SynthConfig config;
  config.jurisdictions = 165;
  const auto data = generate_synthetic(config);
  std::ostringstream text;
  write_tax_csv(text, data.tax);
  auto r = tax_from(text.str());
  CHECK(r.tax.size() == 165);
  CHECK(r.report.rows_read == 27060);
  CHECK(r.report.warnings.empty());
}

TEST_CASE("gdp") {
  auto g = gdp_from("jurisdiction,gdp\nNLD,9.1e11\n");
  CHECK(g.at("NLD") == 9.1e11);
  CHECK_THROWS_AS(gdp_from("jurisdiction,gdp\nNLD,-1\n"), InputError);
  CHECK_THROWS_AS(gdp_from("jurisdiction,gdp\nNLD,1\nNLD,2\n"), InputError);
  CHECK_THROWS_AS(gdp_from("country,gdp\nNLD,1\n"), InputError);
}

TEST_CASE("missing file throws naming it") {
  try {
    parse_gdp(std::filesystem::path("/nonexistent/gdp.csv"));
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("gdp.csv") != std::string::npos);
  }
}

TEST_CASE("canonical writers round-trip") {
  SynthConfig config;
  config.seed = 3;
  const auto data = generate_synthetic(config);

  std::ostringstream f, o, t, g;
  write_firms_csv(f, data.firms);
  write_ownership_csv(o, data.links);
  write_tax_csv(t, data.tax);
  write_gdp_csv(g, data.gdp);

  auto firms = firms_from(f.str());
  auto links = links_from(o.str());
  auto tax = tax_from(t.str());
  auto gdp = gdp_from(g.str());

  REQUIRE(firms.firms.size() == data.firms.size());
  for (std::size_t i = 0; i < firms.firms.size(); ++i) {
    CHECK(firms.firms[i].id == data.firms[i].id);
    CHECK(firms.firms[i].jurisdiction == data.firms[i].jurisdiction);
    CHECK(firms.firms[i].sector == data.firms[i].sector);
    CHECK(firms.firms[i].operating_income == data.firms[i].operating_income);
  }
  REQUIRE(links.links.size() == data.links.size());
  for (std::size_t i = 0; i < links.links.size(); ++i) {
    CHECK(links.links[i].shareholder == data.links[i].shareholder);
    CHECK(links.links[i].owned == data.links[i].owned);
    CHECK(links.links[i].ratio == data.links[i].ratio);
  }
  CHECK(tax.tax.codes() == data.tax.codes());
  for (JurisdictionIndex i = 0; i < tax.tax.size(); ++i) {
    for (JurisdictionIndex j = 0; j < tax.tax.size(); ++j) {
      CHECK(tax.tax.rate(i, j) == data.tax.rate(i, j));
    }
  }
  CHECK(gdp == data.gdp);

  // Second pass is byte-identical.
  std::ostringstream f2;
  write_firms_csv(f2, firms.firms);
  CHECK(f2.str() == f.str());
}
