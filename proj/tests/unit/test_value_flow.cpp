#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracle.hpp"
#include "support.hpp"
#include "taxnet/errors.hpp"
#include "taxnet/value_flow.hpp"

using namespace taxnet;
using namespace taxnet::test;

namespace {

const std::vector<std::string> kCodes = {"LUX", "NLD"};

MultilayerNetwork make(std::vector<Firm> firms, std::vector<OwnershipLink> links) {
  return build_network(std::move(firms), std::move(links), uniform_tax(kCodes, 0.1),
                       unit_gdp(kCodes));
}

// K(100) owned 50% by A, A owned 80% by B.
MultilayerNetwork chain() {
  return make({firm("K", "NLD", 'C', 100), firm("A", "NLD", 'K', 7), firm("B", "LUX", 'K', 9)},
              {link("A", "K", 0.5), link("B", "A", 0.8)});
}

struct Flow {
  MultilayerNetwork net;
  CondensedOwnership cond;
  ValueFlowResult flow;

  double in(const char* id) const { return flow.in_value[node(id)]; }
  double out(const char* id) const { return flow.out_value[node(id)]; }
  NodeIndex node(const char* id) const { return cond.view.node_of(*net.find_firm(id)); }
};

Flow run(MultilayerNetwork net, FlowOptions options = {}) {
  auto cond = condense_cycles(net);
  auto flow = propagate_value(cond.view, options);
  return {std::move(net), std::move(cond), std::move(flow)};
}

bool close(double a, double b, double rel = 1e-9) {
  return std::fabs(a - b) <= rel * std::max({1.0, std::fabs(a), std::fabs(b)});
}

}  // namespace

TEST_CASE("find_sources") {
  SUBCASE("chain") {
    auto net = make({firm("K", "NLD", 'C', 1), firm("A", "NLD", 'K', 1), firm("B", "LUX", 'K', 1)},
                    {link("A", "K", 1), link("B", "A", 1)});
    CHECK(find_sources(net) == std::vector<std::string>{"K"});
  }
  SUBCASE("isolated firm") {
    auto net = make({firm("F", "NLD", 'C', 5)}, {});
    CHECK(find_sources(net) == std::vector<std::string>{"F"});
  }
  SUBCASE("diamond") {
    auto net = make({firm("D", "NLD", 'C', 1), firm("B", "NLD", 'K', 1), firm("C", "LUX", 'K', 1),
                     firm("K", "LUX", 'A', 1)},
                    {link("D", "B", 0.5), link("D", "C", 0.5), link("B", "K", 0.5),
                     link("C", "K", 0.5)});
    CHECK(find_sources(net) == std::vector<std::string>{"K"});
  }
}

TEST_CASE("condense_cycles") {
  SUBCASE("acyclic input is the identity") {
    auto c = condense_cycles(chain());
    CHECK(c.view.node_count() == 3);
    CHECK(c.report.components.empty());
  }
  SUBCASE("two-cycle") {
    auto net = make({firm("A", "NLD", 'K', 1), firm("B", "LUX", 'K', 2)},
                    {link("A", "B", 0.5), link("B", "A", 0.5)});
    auto c = condense_cycles(net);
    CHECK(c.view.node_count() == 1);
    REQUIRE(c.report.components.size() == 1);
    CHECK(c.report.components[0] == std::vector<std::string>{"A", "B"});
    CHECK(c.view.income(0) == 3);
    CHECK(c.view.pair(0) == kAmbiguousPair);
    CHECK(c.view.label(net, 0) == "A+B");
  }
  SUBCASE("three-cycle plus an external owner") {
    auto net = make({firm("A", "NLD", 'K', 1), firm("B", "NLD", 'K', 1), firm("C", "NLD", 'K', 1),
                     firm("X", "LUX", 'G', 1)},
                    {link("A", "B", 0.5), link("B", "C", 0.5), link("C", "A", 0.5),
                     link("X", "A", 0.4), link("X", "B", 0.3)});
    auto c = condense_cycles(net);
    CHECK(c.view.node_count() == 2);
    const NodeIndex x = c.view.node_of(*net.find_firm("X"));
    REQUIRE(c.view.holdings(x).size() == 1);
    // Parallel links into the component merge by summing.
    CHECK(c.view.holdings(x)[0].ratio == doctest::Approx(0.7));
  }
}

TEST_CASE("propagate_value on a chain") {
  auto r = run(chain());
  CHECK(r.in("A") == doctest::Approx(50));
  CHECK(r.in("B") == doctest::Approx(40));
  CHECK(r.out("A") == doctest::Approx(40));
  CHECK(r.out("K") == doctest::Approx(50));
  CHECK(r.out("B") == 0);
  CHECK(r.in("K") == 0);  // a source's own income is not received value
  CHECK(r.flow.v_total == doctest::Approx(90));
  REQUIRE(total_value(r.flow).has_value());
  CHECK(*total_value(r.flow) == doctest::Approx(90));
  // Pair aggregates.
  const PairId nld_k = *r.net.find_pair({"NLD", 'K'});
  CHECK(r.flow.pair_in[nld_k] == doctest::Approx(50));
  CHECK(r.flow.pair_out[nld_k] == doctest::Approx(40));
}

TEST_CASE("propagate_value edge cases") {
  SUBCASE("source without shareholders") {
    auto r = run(make({firm("K", "NLD", 'C', 100)}, {}));
    CHECK(r.in("K") == 0);
    CHECK(r.out("K") == 0);
    CHECK_FALSE(total_value(r.flow).has_value());
  }
  SUBCASE("split ownership") {
    auto r = run(make({firm("K", "NLD", 'C', 100), firm("A", "NLD", 'K', 0),
                       firm("B", "LUX", 'K', 0)},
                      {link("A", "K", 0.6), link("B", "K", 0.4)}));
    CHECK(r.in("A") == doctest::Approx(60));
    CHECK(r.in("B") == doctest::Approx(40));
  }
  SUBCASE("two disjoint chains add up") {
    auto r = run(make({firm("K", "NLD", 'C', 100), firm("A", "NLD", 'K', 7),
                       firm("B", "LUX", 'K', 9), firm("K2", "NLD", 'C', 100),
                       firm("A2", "NLD", 'K', 7), firm("B2", "LUX", 'K', 9)},
                      {link("A", "K", 0.5), link("B", "A", 0.8), link("A2", "K2", 0.5),
                       link("B2", "A2", 0.8)}));
    CHECK(r.flow.v_total == doctest::Approx(180));
  }
  SUBCASE("inject-all and the injected total") {
    auto r = run(chain(), {.inject_all = true, .total_mode = TotalValueMode::injected});
    // A injects 7 on top of the 50 it receives.
    CHECK(r.in("B") == doctest::Approx(0.8 * 57));
    CHECK(r.flow.v_total == doctest::Approx(116));
  }
}

TEST_CASE("single full shareholder forwards everything received") {
  auto r = run(make({firm("K", "NLD", 'C', 100), firm("A", "NLD", 'K', 3), firm("B", "LUX", 'K', 0)},
                    {link("A", "K", 0.5), link("B", "A", 1.0)}));
  CHECK(r.out("A") == r.in("A"));
}

TEST_CASE("from_dag rejects a cycle") {
  std::vector<std::vector<OwnershipView::Edge>> up = {{{1, 0.5}}, {{0, 0.5}}};
  CHECK_THROWS_AS(OwnershipView::from_dag({{0}, {1}}, {1, 1}, {0, 0}, 21, up), ComputationError);
}

TEST_CASE("DP matches chain enumeration on random DAGs") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const std::size_t n = 2 + seed % 14;
    auto net = oracle::random_network(seed, n, 3, 0.3);
    auto cond = condense_cycles(net);
    for (bool inject_all : {false, true}) {
      const FlowOptions options{.inject_all = inject_all};
      const auto dp = propagate_value(cond.view, options);
      const auto ref = oracle::oracle_value_flow(cond.view, options);
      for (NodeIndex i = 0; i < cond.view.node_count(); ++i) {
        CHECK(close(dp.in_value[i], ref.in_value[i]));
        CHECK(close(dp.out_value[i], ref.out_value[i]));
      }
      for (std::size_t p = 0; p < dp.pair_in.size(); ++p) {
        CHECK(close(dp.pair_in[p], ref.pair_in[p]));
        CHECK(close(dp.pair_out[p], ref.pair_out[p]));
      }
      CHECK(close(dp.v_total, ref.v_total));
    }
  }
}

TEST_CASE("oracle on a twelve-node DAG, seed 42") {
  auto net = oracle::random_network(42, 12, 3, 0.3);
  auto cond = condense_cycles(net);
  const auto dp = propagate_value(cond.view);
  const auto ref = oracle::oracle_value_flow(cond.view);
  for (NodeIndex i = 0; i < cond.view.node_count(); ++i) CHECK(close(dp.in_value[i], ref.in_value[i]));
}

TEST_CASE("cyclic inputs match the oracle after condensation") {
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    auto net = oracle::random_network(seed, 10, 2, 0.2, true);
    auto cond = condense_cycles(net);
    const auto dp = propagate_value(cond.view);
    const auto ref = oracle::oracle_value_flow(cond.view);
    for (NodeIndex i = 0; i < cond.view.node_count(); ++i) {
      CHECK(close(dp.in_value[i], ref.in_value[i]));
    }
    CHECK(close(dp.v_total, ref.v_total));
  }
}

TEST_CASE("linearity and damping") {
  auto base = oracle::random_network(7, 14, 3, 0.3);
  auto cond = condense_cycles(base);
  const auto flow = propagate_value(cond.view);
  for (double lambda : {0.5, 2.0, 10.0}) {
    std::vector<Firm> firms(base.firms().begin(), base.firms().end());
    for (auto& f : firms) f.operating_income *= lambda;
    std::vector<OwnershipLink> links;
    for (FirmIndex f = 0; f < base.firm_count(); ++f) {
      for (const auto& h : base.holdings_of(f)) {
        links.push_back(link(base.firm(f).id, base.firm(h.firm).id, h.ratio));
      }
    }
    auto scaled_net = build_network(firms, links, base.tax(), unit_gdp(base.tax().codes()));
    auto scaled = propagate_value(condense_cycles(scaled_net).view);
    for (NodeIndex i = 0; i < cond.view.node_count(); ++i) {
      CHECK(close(scaled.in_value[i], lambda * flow.in_value[i]));
      CHECK(close(scaled.out_value[i], lambda * flow.out_value[i]));
    }
    CHECK(close(scaled.v_total, lambda * flow.v_total));
  }
  // Value never grows along a shareholder step.
  for (NodeIndex i = 0; i < cond.view.node_count(); ++i) {
    CHECK(flow.in_value[i] >= 0.0);
    for (const auto& e : cond.view.shareholders(i)) {
      CHECK(e.ratio * flow.available(i) <= flow.available(i) + 1e-9);
    }
  }
}

TEST_CASE("results do not depend on the thread count") {
  auto net = oracle::random_network(11, 15, 3, 0.4);
  auto cond = condense_cycles(net);
  const auto one = propagate_value(cond.view, {.threads = 1});
  const auto four = propagate_value(cond.view, {.threads = 4});
  CHECK(one.in_value == four.in_value);
  CHECK(one.out_value == four.out_value);
  CHECK(one.v_total == four.v_total);
}
