#include "taxnet/value_flow.hpp"

#include <algorithm>
#include <numeric>

#include "taxnet/errors.hpp"
#include "taxnet/parallel.hpp"

namespace taxnet {

namespace {

// Iterative Tarjan over the shareholder -> owned direction. Returns the
// component id of every firm; ids are arbitrary but deterministic.
std::vector<std::uint32_t> strongly_connected_components(const MultilayerNetwork& net,
                                                         std::uint32_t& count) {
  constexpr std::uint32_t kUnvisited = std::numeric_limits<std::uint32_t>::max();
  const auto n = static_cast<std::uint32_t>(net.firm_count());
  std::vector<std::uint32_t> index(n, kUnvisited), low(n, 0), comp(n, kUnvisited);
  std::vector<FirmIndex> stack;
  std::vector<bool> on_stack(n, false);
  struct Frame {
    FirmIndex v;
    std::size_t next;
  };
  std::vector<Frame> calls;
  std::uint32_t counter = 0;
  count = 0;

  for (FirmIndex root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    calls.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!calls.empty()) {
      Frame& frame = calls.back();
      const FirmIndex v = frame.v;
      auto out = net.holdings_of(v);
      if (frame.next < out.size()) {
        const FirmIndex w = out[frame.next++].firm;
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          calls.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        FirmIndex w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = count;
        } while (w != v);
        ++count;
      }
      calls.pop_back();
      if (!calls.empty()) {
        const FirmIndex parent = calls.back().v;
        low[parent] = std::min(low[parent], low[v]);
      }
    }
  }
  return comp;
}

}  // namespace

std::string OwnershipView::label(const MultilayerNetwork& network, NodeIndex n) const {
  std::string out;
  for (FirmIndex f : members_[n]) {
    if (!out.empty()) out.push_back('+');
    out += network.firm(f).id;
  }
  return out;
}

OwnershipView OwnershipView::from_dag(std::vector<std::vector<FirmIndex>> members,
                                      std::vector<double> income, std::vector<PairId> pair,
                                      std::size_t pair_space,
                                      const std::vector<std::vector<Edge>>& shareholders_of) {
  OwnershipView v;
  const std::size_t n = members.size();
  v.members_ = std::move(members);
  v.income_ = std::move(income);
  v.pair_ = std::move(pair);
  v.pair_space_ = pair_space;

  FirmIndex max_firm = 0;
  bool any = false;
  for (const auto& m : v.members_) {
    for (FirmIndex f : m) {
      max_firm = std::max(max_firm, f);
      any = true;
    }
  }
  v.node_of_firm_.assign(any ? max_firm + 1 : 0, std::numeric_limits<NodeIndex>::max());
  for (NodeIndex i = 0; i < n; ++i) {
    for (FirmIndex f : v.members_[i]) v.node_of_firm_[f] = i;
  }

  v.up_offsets_.assign(n + 1, 0);
  v.down_offsets_.assign(n + 1, 0);
  for (NodeIndex i = 0; i < n; ++i) {
    v.up_offsets_[i + 1] = shareholders_of[i].size();
    for (const Edge& e : shareholders_of[i]) ++v.down_offsets_[e.node + 1];
  }
  std::partial_sum(v.up_offsets_.begin(), v.up_offsets_.end(), v.up_offsets_.begin());
  std::partial_sum(v.down_offsets_.begin(), v.down_offsets_.end(), v.down_offsets_.begin());
  v.up_.resize(v.up_offsets_[n]);
  v.down_.resize(v.down_offsets_[n]);
  std::vector<std::size_t> fill(v.down_offsets_.begin(), v.down_offsets_.end() - 1);
  for (NodeIndex i = 0; i < n; ++i) {
    std::copy(shareholders_of[i].begin(), shareholders_of[i].end(),
              v.up_.begin() + static_cast<std::ptrdiff_t>(v.up_offsets_[i]));
    for (const Edge& e : shareholders_of[i]) v.down_[fill[e.node]++] = Edge{i, e.ratio};
  }

  // Kahn over owned -> shareholder; a node's level is the longest chain of
  // holdings beneath it.
  std::vector<std::size_t> pending(n);
  for (NodeIndex i = 0; i < n; ++i) pending[i] = v.down_offsets_[i + 1] - v.down_offsets_[i];
  v.level_.assign(n, 0);
  std::vector<NodeIndex> queue;
  queue.reserve(n);
  for (NodeIndex i = 0; i < n; ++i) {
    if (pending[i] == 0) queue.push_back(i);
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeIndex u = queue[head];
    for (const Edge& e : v.shareholders(u)) {
      v.level_[e.node] = std::max(v.level_[e.node], v.level_[u] + 1);
      if (--pending[e.node] == 0) queue.push_back(e.node);
    }
  }
  if (queue.size() != n) throw ComputationError("ownership view contains a cycle");
  v.order_ = std::move(queue);
  std::stable_sort(v.order_.begin(), v.order_.end(), [&](NodeIndex a, NodeIndex b) {
    return v.level_[a] != v.level_[b] ? v.level_[a] < v.level_[b] : a < b;
  });
  return v;
}

CondensedOwnership condense_cycles(const MultilayerNetwork& network) {
  const std::size_t n_firms = network.firm_count();
  std::uint32_t n_comp = 0;
  const auto comp = strongly_connected_components(network, n_comp);

  // Number nodes by the smallest member firm index.
  constexpr NodeIndex kUnset = std::numeric_limits<NodeIndex>::max();
  std::vector<NodeIndex> node_of_comp(n_comp, kUnset);
  std::vector<NodeIndex> node_of_firm(n_firms);
  NodeIndex next = 0;
  for (FirmIndex f = 0; f < n_firms; ++f) {
    if (node_of_comp[comp[f]] == kUnset) node_of_comp[comp[f]] = next++;
    node_of_firm[f] = node_of_comp[comp[f]];
  }

  std::vector<std::vector<FirmIndex>> members(next);
  for (FirmIndex f = 0; f < n_firms; ++f) members[node_of_firm[f]].push_back(f);

  std::vector<double> income(next, 0.0);
  std::vector<PairId> pair(next, kAmbiguousPair);
  for (NodeIndex i = 0; i < next; ++i) {
    for (FirmIndex f : members[i]) income[i] += network.firm(f).operating_income;
    if (members[i].size() == 1) pair[i] = network.pair_of(members[i].front());
  }

  std::vector<std::vector<OwnershipView::Edge>> up(next);
  for (FirmIndex f = 0; f < n_firms; ++f) {
    const NodeIndex from = node_of_firm[f];
    for (const auto& h : network.shareholders_of(f)) {
      const NodeIndex to = node_of_firm[h.firm];
      if (to != from) up[from].push_back({to, h.ratio});
    }
  }
  for (auto& edges : up) {
    std::stable_sort(edges.begin(), edges.end(),
                     [](const auto& a, const auto& b) { return a.node < b.node; });
    std::vector<OwnershipView::Edge> merged;
    for (const auto& e : edges) {
      if (!merged.empty() && merged.back().node == e.node) {
        merged.back().ratio += e.ratio;
      } else {
        merged.push_back(e);
      }
    }
    edges = std::move(merged);
  }

  CycleReport report;
  for (const auto& m : members) {
    if (m.size() < 2) continue;
    std::vector<std::string> ids;
    for (FirmIndex f : m) ids.push_back(network.firm(f).id);
    std::sort(ids.begin(), ids.end());
    report.components.push_back(std::move(ids));
  }
  std::sort(report.components.begin(), report.components.end());

  return {OwnershipView::from_dag(std::move(members), std::move(income), std::move(pair),
                                  network.pair_space(), up),
          std::move(report)};
}

std::vector<std::string> find_sources(const MultilayerNetwork& network) {
  std::vector<std::string> ids;
  for (FirmIndex f = 0; f < network.firm_count(); ++f) {
    if (network.holdings_of(f).empty()) ids.push_back(network.firm(f).id);
  }
  return ids;
}

std::vector<NodeIndex> find_sources(const OwnershipView& view) {
  std::vector<NodeIndex> nodes;
  for (NodeIndex i = 0; i < view.node_count(); ++i) {
    if (view.holdings(i).empty()) nodes.push_back(i);
  }
  return nodes;
}

ValueFlowResult propagate_value(const OwnershipView& view, const FlowOptions& options) {
  const std::size_t n = view.node_count();
  ValueFlowResult r;
  r.injection.assign(n, 0.0);
  r.in_value.assign(n, 0.0);
  r.out_value.assign(n, 0.0);
  r.pair_in.assign(view.pair_space(), 0.0);
  r.pair_out.assign(view.pair_space(), 0.0);
  for (NodeIndex i = 0; i < n; ++i) {
    if (options.inject_all || view.holdings(i).empty()) r.injection[i] = view.income(i);
  }

  const unsigned threads = resolve_threads(options.threads);
  const auto order = view.topological_order();
  const auto levels = view.levels();
  std::size_t begin = 0;
  while (begin < order.size()) {
    std::size_t end = begin;
    while (end < order.size() && levels[order[end]] == levels[order[begin]]) ++end;
    parallel_for(begin, end, threads, [&](std::size_t k) {
      const NodeIndex v = order[k];
      double in = 0.0;
      for (const auto& e : view.holdings(v)) in += e.ratio * r.available(e.node);
      r.in_value[v] = in;
      const double avail = r.injection[v] + in;
      double out = 0.0;
      for (const auto& e : view.shareholders(v)) out += e.ratio * avail;
      r.out_value[v] = out;
    });
    begin = end;
  }

  double received = 0.0;
  double injected = 0.0;
  for (NodeIndex i = 0; i < n; ++i) {
    received += r.in_value[i];
    injected += r.injection[i];
    const PairId p = view.pair(i);
    if (p == kAmbiguousPair) continue;
    r.pair_in[p] += r.in_value[i];
    r.pair_out[p] += r.out_value[i];
  }
  r.v_total = options.total_mode == TotalValueMode::received ? received : injected;
  return r;
}

std::optional<double> total_value(const ValueFlowResult& result) {
  if (result.v_total == 0.0) return std::nullopt;
  return result.v_total;
}

}  // namespace taxnet
