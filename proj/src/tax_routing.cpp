#include "taxnet/tax_routing.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "taxnet/errors.hpp"
#include "taxnet/parallel.hpp"
#include "taxnet/sink_conduit.hpp"

namespace taxnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Minimal simple routes towards one destination.
//
// The routes from one origin form a prefix tree and the packet splits equally
// over the feasible children of every tree node. The tree is built explicitly
// until two hops are left. From there a child c of prefix (..., b) is feasible
// exactly when cost(b,c) + cost(c,d) fits the remaining budget and c is not on
// the prefix, so children are counted from a per-b list sorted by that sum and
// their shares are credited per (b, budget) group instead of per route.
//
// `bound[h][v]` is the cheapest walk from v to the destination in at most h
// hops; it is a lower bound on simple routes, and `next[h][v]` holds the
// successors that can lie on a route within tolerance of it.
class DestinationRouter {
 public:
  DestinationRouter(const std::vector<double>& cost, std::size_t n, JurisdictionIndex dest,
                    const LoadOptions& options)
      : cost_(cost), n_(n), dest_(dest), hops_(options.max_hops), eps_(options.tie_tolerance) {
    bound_.assign(static_cast<std::size_t>(hops_ + 1), std::vector<double>(n_, kInf));
    bound_[0][dest_] = 0.0;
    next_.assign(static_cast<std::size_t>(hops_ + 1),
                 std::vector<std::vector<JurisdictionIndex>>(n_));
    for (int h = 1; h <= hops_; ++h) {
      const auto& prev = bound_[static_cast<std::size_t>(h - 1)];
      auto& cur = bound_[static_cast<std::size_t>(h)];
      auto& next = next_[static_cast<std::size_t>(h)];
      for (JurisdictionIndex v = 0; v < n_; ++v) {
        if (v == dest_) {
          cur[v] = 0.0;
          continue;
        }
        double best = kInf;
        for (JurisdictionIndex w = 0; w < n_; ++w) {
          if (w != v) best = std::min(best, edge(v, w) + prev[w]);
        }
        cur[v] = best;
        if (best == kInf) continue;
        for (JurisdictionIndex w = 0; w < n_; ++w) {
          if (w != v && edge(v, w) + prev[w] <= best + 2.0 * eps_) next[v].push_back(w);
        }
      }
    }
    // two_[b][c]: cost of b -> c -> d, or of b -> d when c is d.
    two_.assign(n_ * n_, kInf);
    sorted_.assign(n_, {});
    for (JurisdictionIndex b = 0; b < n_; ++b) {
      if (b == dest_) continue;
      for (JurisdictionIndex c = 0; c < n_; ++c) {
        if (c == b) continue;
        const double t = c == dest_ ? edge(b, dest_) : edge(b, c) + edge(c, dest_);
        two_[b * n_ + c] = t;
        if (t < kInf) sorted_[b].emplace_back(t, c);
      }
      std::sort(sorted_[b].begin(), sorted_[b].end());
    }
    groups_.assign(n_, {});
  }

  // Adds the transit mass of the unit packet origin -> destination to `load`.
  // Returns false when no route exists.
  bool route(JurisdictionIndex origin, std::vector<double>& load, std::uint64_t& routes) {
    const double target = bound_[static_cast<std::size_t>(hops_)][origin];
    if (target == kInf) return false;
    threshold_ = target + eps_;
    origin_ = origin;
    nodes_.clear();
    excluded_.clear();
    path_.clear();
    route_count_ = 0;
    nodes_.push_back({origin, 0.0});
    if (!explore(0, hops_)) return false;

    // Parents precede children, so one forward pass settles every mass.
    nodes_[0].mass = 1.0;
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
      const Node& p = nodes_[nodes_[i].parent];
      nodes_[i].mass = p.mass / static_cast<double>(p.feasible_children);
      load[nodes_[i].v] += nodes_[i].mass;
    }
    touched_.clear();
    for (const Node& node : nodes_) {
      if (!node.leaf) continue;
      const double share = node.mass / static_cast<double>(node.feasible_children);
      auto& g = groups_[node.v];
      if (g.empty()) touched_.push_back(node.v);
      auto it = std::find_if(g.begin(), g.end(),
                             [&](const auto& e) { return e.first == node.budget; });
      if (it == g.end()) {
        g.emplace_back(node.budget, share);
      } else {
        it->second += share;
      }
      for (std::uint32_t k = 0; k < node.excluded_count; ++k) {
        load[excluded_[node.excluded_begin + k]] -= share;
      }
    }
    for (JurisdictionIndex b : touched_) {
      for (const auto& [budget, weight] : groups_[b]) {
        for (const auto& [t, c] : sorted_[b]) {
          if (t > budget) break;
          if (c != dest_ && c != origin_) load[c] += weight;
        }
      }
      groups_[b].clear();
    }
    routes += route_count_;
    return true;
  }

 private:
  struct Node {
    JurisdictionIndex v;
    double spent;
    std::uint32_t parent = 0;
    std::uint32_t feasible_children = 0;
    bool leaf = false;
    double budget = 0.0;
    std::uint32_t excluded_begin = 0;
    std::uint32_t excluded_count = 0;
    double mass = 0.0;
  };

  double edge(JurisdictionIndex from, JurisdictionIndex to) const { return cost_[from * n_ + to]; }

  bool on_path(JurisdictionIndex v) const {
    return std::find(path_.begin(), path_.end(), v) != path_.end();
  }

  // Builds the subtree below nodes_[index]; false when no route completes.
  bool explore(std::uint32_t index, int hops_left) {
    const JurisdictionIndex v = nodes_[index].v;
    const double spent = nodes_[index].spent;
    path_.push_back(v);
    if (hops_left <= 2) {
      const bool ok = settle_leaf(index, hops_left);
      path_.pop_back();
      return ok;
    }
    std::uint32_t feasible = 0;
    const auto& bound = bound_[static_cast<std::size_t>(hops_left - 1)];
    for (JurisdictionIndex w : next_[static_cast<std::size_t>(hops_left)][v]) {
      const double c = spent + edge(v, w);
      if (w == dest_) {
        if (c <= threshold_) {
          ++feasible;
          ++route_count_;
        }
        continue;
      }
      if (c + bound[w] > threshold_ || on_path(w)) continue;
      const auto child = static_cast<std::uint32_t>(nodes_.size());
      const std::size_t excluded_mark = excluded_.size();
      const std::uint64_t routes_mark = route_count_;
      nodes_.push_back({w, c, index});
      if (explore(child, hops_left - 1)) {
        ++feasible;
      } else {
        nodes_.resize(child);
        excluded_.resize(excluded_mark);
        route_count_ = routes_mark;
      }
    }
    path_.pop_back();
    nodes_[index].feasible_children = feasible;
    return feasible > 0;
  }

  // Two hops or fewer left at nodes_[index], whose node is the last on path_.
  bool settle_leaf(std::uint32_t index, int hops_left) {
    Node& node = nodes_[index];
    const double budget = threshold_ - node.spent;
    if (hops_left == 1) {
      // Only the final hop is left; nothing further is credited.
      node.feasible_children = edge(node.v, dest_) <= budget ? 1 : 0;
      route_count_ += node.feasible_children;
      return node.feasible_children > 0;
    }
    const auto& list = sorted_[node.v];
    auto end = std::upper_bound(list.begin(), list.end(), budget,
                                [](double x, const auto& e) { return x < e.first; });
    auto count = static_cast<std::uint32_t>(end - list.begin());
    node.excluded_begin = static_cast<std::uint32_t>(excluded_.size());
    for (JurisdictionIndex q : path_) {
      if (q == node.v || two_[node.v * n_ + q] > budget) continue;
      --count;
      if (q != origin_) excluded_.push_back(q);
    }
    node.excluded_count = static_cast<std::uint32_t>(excluded_.size()) - node.excluded_begin;
    if (count == 0) {
      excluded_.resize(node.excluded_begin);
      node.excluded_count = 0;
      return false;
    }
    node.leaf = true;
    node.budget = budget;
    node.feasible_children = count;
    route_count_ += count;
    return true;
  }

  const std::vector<double>& cost_;
  std::size_t n_;
  JurisdictionIndex dest_;
  int hops_;
  double eps_;
  std::vector<std::vector<double>> bound_;
  std::vector<std::vector<std::vector<JurisdictionIndex>>> next_;
  std::vector<double> two_;
  std::vector<std::vector<std::pair<double, JurisdictionIndex>>> sorted_;

  double threshold_ = 0.0;
  JurisdictionIndex origin_ = 0;
  std::vector<Node> nodes_;
  std::vector<JurisdictionIndex> excluded_;
  std::vector<JurisdictionIndex> path_;
  std::uint64_t route_count_ = 0;
  std::vector<std::vector<std::pair<double, double>>> groups_;
  std::vector<JurisdictionIndex> touched_;
};

}  // namespace

double routing_edge_cost(double rate, RoutingCost mode) {
  if (mode == RoutingCost::additive) return rate;
  if (rate >= 1.0) return kInf;
  return -std::log1p(-rate);
}

LoadResult load_centrality(const TaxNetwork& tax, const LoadOptions& options) {
  if (options.max_hops < 1 || options.max_hops > kMaxLoadHops) {
    throw InputError("max hops must lie between 1 and " + std::to_string(kMaxLoadHops));
  }
  if (!(options.tie_tolerance >= 0.0)) throw InputError("tie tolerance must be non-negative");
  const std::size_t n = tax.size();
  LoadResult result;
  result.load.assign(n, 0.0);
  if (n < 2) return result;

  std::vector<double> cost(n * n, 0.0);
  for (JurisdictionIndex i = 0; i < n; ++i) {
    for (JurisdictionIndex j = 0; j < n; ++j) {
      cost[i * n + j] = i == j ? 0.0 : routing_edge_cost(tax.rate(i, j), options.cost);
    }
  }

  std::vector<std::vector<double>> per_dest(n, std::vector<double>(n, 0.0));
  std::vector<std::size_t> unreachable(n, 0);
  std::vector<std::uint64_t> routes(n, 0);
  const unsigned threads = std::min<unsigned>(resolve_threads(options.threads),
                                              static_cast<unsigned>(n));
  auto work = [&](JurisdictionIndex d) {
    DestinationRouter router(cost, n, d, options);
    for (JurisdictionIndex o = 0; o < n; ++o) {
      if (o == d) continue;
      if (!router.route(o, per_dest[d], routes[d])) ++unreachable[d];
    }
  };
  if (threads <= 1) {
    for (JurisdictionIndex d = 0; d < n; ++d) work(d);
  } else {
    // Destinations are handed out dynamically; each writes only its own row.
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t d = next++; d < n; d = next++) work(static_cast<JurisdictionIndex>(d));
      });
    }
  }

  for (std::size_t d = 0; d < n; ++d) {
    for (std::size_t j = 0; j < n; ++j) result.load[j] += per_dest[d][j];
    result.unreachable_packets += unreachable[d];
    result.routes += routes[d];
  }
  return result;
}

std::map<std::string, double> load_by_code(const TaxNetwork& tax, const LoadResult& result) {
  std::map<std::string, double> out;
  for (JurisdictionIndex j = 0; j < tax.size(); ++j) out.emplace(tax.code(j), result.load[j]);
  return out;
}

std::vector<double> standardize_load(std::span<const double> load) {
  return standardize_series(load);
}

}  // namespace taxnet
