#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "taxnet/network_model.hpp"

namespace taxnet {

enum class RoutingCost {
  additive,        // edge cost = rate
  multiplicative,  // edge cost = -log(1 - rate); rate 1 is impassable
};

// Edge cost under the chosen model; +inf for an impassable edge.
double routing_edge_cost(double rate, RoutingCost mode);

inline constexpr int kMaxLoadHops = 15;

struct LoadOptions {
  RoutingCost cost = RoutingCost::additive;
  // Routes longer than this many hops are never considered. Zero-rate
  // cliques make every route through them cost-minimal, so the cap is what
  // keeps the set of tied routes bounded.
  int max_hops = 4;  // 1..kMaxLoadHops
  // Route costs within this absolute distance of the minimum count as ties.
  double tie_tolerance = 1e-9;
  unsigned threads = 0;
};

struct LoadResult {
  std::vector<double> load;  // indexed like TaxNetwork::codes()
  std::size_t unreachable_packets = 0;
  std::uint64_t routes = 0;  // minimal routes found over all packets
};

// Load centrality over the withholding-tax layer. For every ordered pair
// (o, d), o != d, a unit packet travels along the minimal-cost simple routes
// of at most max_hops hops. At each branching point of the tree of those
// routes the packet splits equally among the distinct next hops. A node's load
// is the packet mass passing through it summed over all packets it neither
// sends nor receives.
LoadResult load_centrality(const TaxNetwork& tax, const LoadOptions& options = {});

std::map<std::string, double> load_by_code(const TaxNetwork& tax, const LoadResult& result);

// standardize_series over the loads.
std::vector<double> standardize_load(std::span<const double> load);

}  // namespace taxnet
