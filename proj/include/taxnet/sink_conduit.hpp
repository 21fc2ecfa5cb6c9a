#pragma once

#include <optional>
#include <set>
#include <span>
#include <vector>

#include "taxnet/network_model.hpp"
#include "taxnet/value_flow.hpp"

namespace taxnet {

struct SinkScore {
  PairKey pair;
  double s = 0.0;
};

struct ConduitScore {
  PairKey pair;
  double c_out_raw = 0.0;
  double c_in_raw = 0.0;
  // Absent when the pair has no credit in that direction (the standardized
  // series only covers credited pairs).
  std::optional<double> c_out_std;
  std::optional<double> c_in_std;
  // Present only when both standardized components are.
  std::optional<double> c_combined;
};

// GDP normalisation factor sum_i GDP_i / GDP_j. Throws InputError when the
// jurisdiction has no GDP.
double gdp_factor(const MultilayerNetwork& network, JurisdictionIndex j);

// (pair_in - pair_out) / V_total * gdp_factor. Requires V_total != 0.
double sink_centrality(const MultilayerNetwork& network, const ValueFlowResult& flow, PairId pair);

// Sink centrality of every pair occupied by at least one single-firm node,
// ordered by PairKey. Throws ComputationError when V_total is zero.
std::vector<SinkScore> sink_scores(const MultilayerNetwork& network, const OwnershipView& view,
                                   const ValueFlowResult& flow);

// Pairs whose score is strictly above the threshold.
std::set<PairKey> identify_sinks(std::span<const SinkScore> scores, double threshold = 10.0);

// Value credited to each pair (indexed by PairId) before GDP normalisation.
//
// Outward: every ownership chain from an injecting node to the first node in
// a sink pair contributes the value entering that sink node, once to each
// distinct pair among the nodes strictly between the two.
//
// Inward: value entering a node on a chain segment that starts at a sink-pair
// node (the last one before it) is credited to the node's pair, unless the
// pair is a sink or already appeared earlier on the same segment.
struct ConduitNumerators {
  std::vector<double> outward;
  std::vector<double> inward;
};

ConduitNumerators conduit_numerators(const OwnershipView& view, const ValueFlowResult& flow,
                                     const std::vector<bool>& sink_pair);

enum class ConduitDirection { out, in };

// Numerator / V_total * gdp_factor; 0 for sink pairs.
double conduit_raw(const MultilayerNetwork& network, const ValueFlowResult& flow,
                   const ConduitNumerators& numerators, const std::vector<bool>& sink_pair,
                   PairId pair, ConduitDirection direction);

// (x - mean) / sigma + 1 with the population standard deviation.
// Throws ComputationError for fewer than two values or zero variance.
std::vector<double> standardize_series(std::span<const double> xs);

// sqrt(a^2 + b^2) / sqrt(2): equals 1 when both inputs are 1.
double combine_euclidean(double a, double b);

// Conduit scores for every non-sink pair with credit in at least one
// direction, ordered by PairKey. Empty when nothing is credited (no sinks).
// Throws ComputationError when a direction with credit cannot be
// standardized (a single credited pair, or all equal).
std::vector<ConduitScore> conduit_scores(const MultilayerNetwork& network,
                                         const OwnershipView& view, const ValueFlowResult& flow,
                                         const std::set<PairKey>& sinks);

}  // namespace taxnet
