#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "taxnet/sink_conduit.hpp"

namespace taxnet {

// Standardized inputs at or below zero have no real fractional powers; they
// are raised to this floor before the geometric mean.
inline constexpr double kMultilayerFloor = 1e-6;

struct MultilayerScore {
  PairKey pair;
  double m_out = 0.0;
  double m_in = 0.0;
  double m = 0.0;
  double alpha = 1.0;
  double beta = 0.5;
  bool clamped = false;  // some input was raised to kMultilayerFloor
};

// ((c^alpha) * (l^beta))^(1 / (alpha + beta)) over the floored inputs.
// Requires alpha > 0 and beta >= 0; throws InputError otherwise.
double multilayer_component(double c_std, double l_std, double alpha, double beta,
                            bool* clamped = nullptr);

// Both directions through multilayer_component, then combine_euclidean.
// nullopt when the conduit score lacks either standardized component.
std::optional<MultilayerScore> multilayer_score(const ConduitScore& conduit, double load_std,
                                                double alpha, double beta);

struct MultilayerTable {
  double alpha = 1.0;
  double beta = 0.5;
  // Ranked by m descending, ties by pair.
  std::vector<MultilayerScore> scores;
  std::size_t excluded_incomplete = 0;  // missing a conduit component
  std::size_t excluded_no_load = 0;     // jurisdiction absent from the load table
  std::size_t clamped_pairs = 0;
};

// `load_std` maps jurisdiction code to standardized load.
MultilayerTable multilayer_scores(std::span<const ConduitScore> conduits,
                                  const std::map<std::string, double>& load_std, double alpha,
                                  double beta);

struct SweepEntry {
  MultilayerTable table;
  // (threshold, number of pairs with m strictly above it), ascending.
  std::vector<std::pair<double, std::size_t>> counts;
};

struct SweepReport {
  double alpha = 1.0;
  double report_threshold = 2.0;
  std::vector<SweepEntry> entries;  // one per beta, in input order
};

// Thresholds counted: 1.0, 1.5, 2.0 and the report threshold.
SweepReport beta_sweep(std::span<const ConduitScore> conduits,
                       const std::map<std::string, double>& load_std, double alpha,
                       std::span<const double> betas, double report_threshold = 2.0);

}  // namespace taxnet
