#include "taxnet/sink_conduit.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "taxnet/errors.hpp"

namespace taxnet {

namespace {

// Value keyed by pair, sorted by PairId.
using PairValues = std::vector<std::pair<PairId, double>>;

// Dense scratch row for merging sparse pair vectors.
class PairAccumulator {
 public:
  explicit PairAccumulator(std::size_t pair_space) : value_(pair_space, 0.0), used_(pair_space) {}

  void add(PairId p, double v) {
    if (!used_[p]) {
      used_[p] = true;
      touched_.push_back(p);
    }
    value_[p] += v;
  }

  PairValues take() {
    std::sort(touched_.begin(), touched_.end());
    PairValues out;
    out.reserve(touched_.size());
    for (PairId p : touched_) {
      out.emplace_back(p, value_[p]);
      value_[p] = 0.0;
      used_[p] = false;
    }
    touched_.clear();
    return out;
  }

 private:
  std::vector<double> value_;
  std::vector<char> used_;
  std::vector<PairId> touched_;
};

double lookup(const PairValues& values, PairId p) {
  auto it = std::lower_bound(values.begin(), values.end(), p,
                             [](const auto& kv, PairId key) { return kv.first < key; });
  return it != values.end() && it->first == p ? it->second : 0.0;
}

// Adds ratio * (values with the entry for `own_pair` replaced by `own_total`).
// Everything that passed through a node has seen that node's pair.
void merge_scaled(PairAccumulator& acc, const PairValues& values, double ratio, PairId own_pair,
                  double own_total) {
  for (const auto& [p, v] : values) {
    if (p != own_pair) acc.add(p, ratio * v);
  }
  if (own_pair != kAmbiguousPair && own_total != 0.0) acc.add(own_pair, ratio * own_total);
}

std::vector<bool> sink_nodes(const OwnershipView& view, const std::vector<bool>& sink_pair) {
  std::vector<bool> sink(view.node_count(), false);
  for (NodeIndex i = 0; i < view.node_count(); ++i) {
    const PairId p = view.pair(i);
    sink[i] = p != kAmbiguousPair && sink_pair[p];
  }
  return sink;
}

}  // namespace

double gdp_factor(const MultilayerNetwork& network, JurisdictionIndex j) {
  const double g = network.gdp(j);
  if (!(g > 0.0)) throw InputError("no GDP for jurisdiction " + network.tax().code(j));
  return network.world_gdp() / g;
}

double sink_centrality(const MultilayerNetwork& network, const ValueFlowResult& flow,
                       PairId pair) {
  const auto total = total_value(flow);
  if (!total) throw ComputationError("total flowing value is zero");
  return (flow.pair_in[pair] - flow.pair_out[pair]) / *total *
         gdp_factor(network, network.pair_jurisdiction(pair));
}

std::vector<SinkScore> sink_scores(const MultilayerNetwork& network, const OwnershipView& view,
                                   const ValueFlowResult& flow) {
  if (!total_value(flow)) throw ComputationError("total flowing value is zero");
  std::vector<bool> occupied(view.pair_space(), false);
  for (NodeIndex i = 0; i < view.node_count(); ++i) {
    if (view.pair(i) != kAmbiguousPair) occupied[view.pair(i)] = true;
  }
  std::vector<SinkScore> scores;
  for (PairId p = 0; p < occupied.size(); ++p) {
    if (occupied[p]) scores.push_back({network.pair_key(p), sink_centrality(network, flow, p)});
  }
  std::sort(scores.begin(), scores.end(),
            [](const SinkScore& a, const SinkScore& b) { return a.pair < b.pair; });
  return scores;
}

std::set<PairKey> identify_sinks(std::span<const SinkScore> scores, double threshold) {
  std::set<PairKey> sinks;
  for (const auto& s : scores) {
    if (s.s > threshold) sinks.insert(s.pair);
  }
  return sinks;
}

ConduitNumerators conduit_numerators(const OwnershipView& view, const ValueFlowResult& flow,
                                     const std::vector<bool>& sink_pair) {
  const std::size_t n = view.node_count();
  ConduitNumerators result;
  result.outward.assign(view.pair_space(), 0.0);
  result.inward.assign(view.pair_space(), 0.0);
  const auto sink = sink_nodes(view, sink_pair);
  const auto order = view.topological_order();
  PairAccumulator acc(view.pair_space());

  // Outward. `feeds[v]`: v is not a sink and some shareholder chain from v
  // reaches a sink node without crossing another one first.
  std::vector<bool> feeds(n, false);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const NodeIndex v = *it;
    if (sink[v]) continue;
    for (const auto& e : view.shareholders(v)) {
      if (sink[e.node] || feeds[e.node]) {
        feeds[v] = true;
        break;
      }
    }
  }
  {
    // clean[v]: value entering v along chains free of sink nodes.
    // seen[v][P]: the part of clean[v] whose chain passed a node of pair P
    // strictly after its source.
    std::vector<double> clean(n, 0.0);
    std::vector<PairValues> seen(n);
    std::vector<std::uint32_t> readers(n, 0);
    for (NodeIndex v = 0; v < n; ++v) {
      if (!feeds[v]) continue;
      for (const auto& e : view.shareholders(v)) {
        if (sink[e.node] || feeds[e.node]) ++readers[v];
      }
    }
    for (const NodeIndex v : order) {
      if (!feeds[v] && !sink[v]) continue;
      double in = 0.0;
      for (const auto& e : view.holdings(v)) {
        const NodeIndex o = e.node;
        if (!feeds[o]) continue;
        in += e.ratio * (flow.injection[o] + clean[o]);
        merge_scaled(acc, seen[o], e.ratio, view.pair(o), clean[o]);
        if (--readers[o] == 0) PairValues().swap(seen[o]);
      }
      if (sink[v]) {
        for (const auto& [p, value] : acc.take()) result.outward[p] += value;
      } else {
        clean[v] = in;
        seen[v] = acc.take();
      }
    }
  }

  // Inward. `after[v]`: some chain into v passes a sink node.
  std::vector<bool> after(n, false);
  for (const NodeIndex v : order) {
    for (const auto& e : view.holdings(v)) {
      if (sink[e.node] || after[e.node]) {
        after[v] = true;
        break;
      }
    }
  }
  {
    // past[v]: value entering v along chains that passed a sink node.
    // seen[v][P]: the part of past[v] whose segment after the last sink node
    // passed a node of pair P before reaching v.
    std::vector<double> past(n, 0.0);
    std::vector<PairValues> seen(n);
    std::vector<std::uint32_t> readers(n, 0);
    for (NodeIndex v = 0; v < n; ++v) {
      if (after[v] && !sink[v]) readers[v] = static_cast<std::uint32_t>(view.shareholders(v).size());
    }
    for (const NodeIndex v : order) {
      if (!after[v]) continue;
      double in = 0.0;
      for (const auto& e : view.holdings(v)) {
        const NodeIndex o = e.node;
        if (sink[o]) {
          in += e.ratio * flow.available(o);
        } else if (after[o]) {
          in += e.ratio * past[o];
          merge_scaled(acc, seen[o], e.ratio, view.pair(o), past[o]);
          if (--readers[o] == 0) PairValues().swap(seen[o]);
        }
      }
      past[v] = in;
      seen[v] = acc.take();
      const PairId p = view.pair(v);
      if (!sink[v] && p != kAmbiguousPair) result.inward[p] += in - lookup(seen[v], p);
      if (sink[v]) PairValues().swap(seen[v]);
    }
  }
  return result;
}

double conduit_raw(const MultilayerNetwork& network, const ValueFlowResult& flow,
                   const ConduitNumerators& numerators, const std::vector<bool>& sink_pair,
                   PairId pair, ConduitDirection direction) {
  if (sink_pair[pair]) return 0.0;
  const auto total = total_value(flow);
  if (!total) throw ComputationError("total flowing value is zero");
  const double num = direction == ConduitDirection::out ? numerators.outward[pair]
                                                        : numerators.inward[pair];
  if (num == 0.0) return 0.0;
  return num / *total * gdp_factor(network, network.pair_jurisdiction(pair));
}

std::vector<double> standardize_series(std::span<const double> xs) {
  if (xs.size() < 2) {
    throw ComputationError("standardization needs at least two values, got " +
                           std::to_string(xs.size()));
  }
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  const double sigma = std::sqrt(var);
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw ComputationError("standardization of a zero-variance series");
  }
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back((x - mean) / sigma + 1.0);
  return out;
}

double combine_euclidean(double a, double b) { return std::sqrt(a * a + b * b) / std::sqrt(2.0); }

std::vector<ConduitScore> conduit_scores(const MultilayerNetwork& network,
                                         const OwnershipView& view, const ValueFlowResult& flow,
                                         const std::set<PairKey>& sinks) {
  if (!total_value(flow)) throw ComputationError("total flowing value is zero");
  std::vector<bool> sink_mask(view.pair_space(), false);
  for (const auto& key : sinks) {
    if (auto p = network.find_pair(key)) sink_mask[*p] = true;
  }
  const auto numerators = conduit_numerators(view, flow, sink_mask);

  std::vector<bool> occupied(view.pair_space(), false);
  for (NodeIndex i = 0; i < view.node_count(); ++i) {
    if (view.pair(i) != kAmbiguousPair) occupied[view.pair(i)] = true;
  }

  std::vector<ConduitScore> scores;
  for (PairId p = 0; p < occupied.size(); ++p) {
    if (!occupied[p] || sink_mask[p]) continue;
    ConduitScore s;
    s.pair = network.pair_key(p);
    s.c_out_raw = conduit_raw(network, flow, numerators, sink_mask, p, ConduitDirection::out);
    s.c_in_raw = conduit_raw(network, flow, numerators, sink_mask, p, ConduitDirection::in);
    if (s.c_out_raw != 0.0 || s.c_in_raw != 0.0) scores.push_back(std::move(s));
  }
  std::sort(scores.begin(), scores.end(),
            [](const ConduitScore& a, const ConduitScore& b) { return a.pair < b.pair; });

  auto standardize_where = [&](auto raw, auto assign) {
    std::vector<double> xs;
    for (const auto& s : scores) {
      if (raw(s) != 0.0) xs.push_back(raw(s));
    }
    // Nothing credited in this direction (no sinks, say): nothing to scale.
    if (xs.empty()) return;
    const auto ys = standardize_series(xs);
    std::size_t k = 0;
    for (auto& s : scores) {
      if (raw(s) != 0.0) assign(s, ys[k++]);
    }
  };
  try {
    standardize_where([](const ConduitScore& s) { return s.c_out_raw; },
                      [](ConduitScore& s, double y) { s.c_out_std = y; });
  } catch (const ComputationError& e) {
    throw ComputationError(std::string("conduit outward series: ") + e.what());
  }
  try {
    standardize_where([](const ConduitScore& s) { return s.c_in_raw; },
                      [](ConduitScore& s, double y) { s.c_in_std = y; });
  } catch (const ComputationError& e) {
    throw ComputationError(std::string("conduit inward series: ") + e.what());
  }
  for (auto& s : scores) {
    if (s.c_out_std && s.c_in_std) s.c_combined = combine_euclidean(*s.c_in_std, *s.c_out_std);
  }
  return scores;
}

}  // namespace taxnet
