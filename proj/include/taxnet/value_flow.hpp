#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "taxnet/network_model.hpp"

namespace taxnet {

using NodeIndex = std::uint32_t;

// Marks a collapsed ownership cycle: its jurisdiction x sector attribution is
// ambiguous, so it never contributes to pair aggregates.
inline constexpr PairId kAmbiguousPair = std::numeric_limits<PairId>::max();

// Acyclic view of the ownership layer. Each node is a single firm or a
// strongly connected component of firms collapsed into one node.
class OwnershipView {
 public:
  struct Edge {
    NodeIndex node;
    double ratio;
  };

  std::size_t node_count() const { return members_.size(); }
  std::span<const FirmIndex> members(NodeIndex n) const { return members_[n]; }
  NodeIndex node_of(FirmIndex f) const { return node_of_firm_[f]; }
  double income(NodeIndex n) const { return income_[n]; }
  PairId pair(NodeIndex n) const { return pair_[n]; }
  bool collapsed(NodeIndex n) const { return members_[n].size() > 1; }

  // Nodes holding shares in `n` (where value leaving `n` goes).
  std::span<const Edge> shareholders(NodeIndex n) const {
    return {up_.data() + up_offsets_[n], up_offsets_[n + 1] - up_offsets_[n]};
  }
  // Nodes `n` holds shares in (where value entering `n` comes from).
  std::span<const Edge> holdings(NodeIndex n) const {
    return {down_.data() + down_offsets_[n], down_offsets_[n + 1] - down_offsets_[n]};
  }

  // Owned nodes always precede their shareholders.
  std::span<const NodeIndex> topological_order() const { return order_; }
  // Length of the longest chain of holdings below the node; nodes on one level
  // never hold shares in each other.
  std::span<const std::uint32_t> levels() const { return level_; }

  std::size_t pair_space() const { return pair_space_; }

  // Firm id for single-firm nodes, member ids joined by '+' for components.
  std::string label(const MultilayerNetwork& network, NodeIndex n) const;

  // Builds a view directly from node data; the edges must form a DAG.
  // Throws ComputationError on a cycle.
  static OwnershipView from_dag(std::vector<std::vector<FirmIndex>> members,
                                std::vector<double> income, std::vector<PairId> pair,
                                std::size_t pair_space,
                                const std::vector<std::vector<Edge>>& shareholders_of);

 private:
  std::vector<std::vector<FirmIndex>> members_;
  std::vector<NodeIndex> node_of_firm_;
  std::vector<double> income_;
  std::vector<PairId> pair_;
  std::vector<std::size_t> up_offsets_, down_offsets_;
  std::vector<Edge> up_, down_;
  std::vector<NodeIndex> order_;
  std::vector<std::uint32_t> level_;
  std::size_t pair_space_ = 0;
};

struct CycleReport {
  // Firm ids of every collapsed component, each sorted; components ordered by
  // their first id.
  std::vector<std::vector<std::string>> components;
};

struct CondensedOwnership {
  OwnershipView view;
  CycleReport report;
};

// Collapses strongly connected components of size > 1. A component's income
// is the sum of its members'; internal links vanish and parallel external
// links to the same node are merged by summing ratios.
CondensedOwnership condense_cycles(const MultilayerNetwork& network);

// Firms that own no other firm: the chain ends where income is injected.
std::vector<std::string> find_sources(const MultilayerNetwork& network);

// Nodes of the view without holdings.
std::vector<NodeIndex> find_sources(const OwnershipView& view);

enum class TotalValueMode {
  received,  // sum of in_value over all nodes
  injected,  // sum of injected incomes
};

struct FlowOptions {
  // Inject every firm's income instead of only chain-end firms'.
  bool inject_all = false;
  TotalValueMode total_mode = TotalValueMode::received;
  // 0 = hardware concurrency.
  unsigned threads = 0;
};

// Value entering and leaving each node of the view, plus pair aggregates.
struct ValueFlowResult {
  std::vector<double> injection;  // income injected at the node
  std::vector<double> in_value;   // value received from held nodes
  std::vector<double> out_value;  // value forwarded to shareholders
  std::vector<double> pair_in;    // indexed by PairId
  std::vector<double> pair_out;
  double v_total = 0.0;

  double available(NodeIndex n) const { return injection[n] + in_value[n]; }
};

// Pushes injected income up every ownership chain, multiplying by the
// shareholding ratio at each step. Runs level by level over the DAG; each
// node sums its inputs in a fixed order, so results do not depend on the
// thread count.
ValueFlowResult propagate_value(const OwnershipView& view, const FlowOptions& options = {});

// V_total, or nullopt when it is zero (it divides every centrality).
std::optional<double> total_value(const ValueFlowResult& result);

}  // namespace taxnet
