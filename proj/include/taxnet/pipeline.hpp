#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "taxnet/ingest.hpp"
#include "taxnet/multilayer.hpp"
#include "taxnet/network_model.hpp"
#include "taxnet/report.hpp"
#include "taxnet/sink_conduit.hpp"
#include "taxnet/tax_routing.hpp"
#include "taxnet/value_flow.hpp"

namespace taxnet {

struct AnalysisParams {
  double alpha = 1.0;
  std::vector<double> betas = {0.5};
  double sink_threshold = 10.0;
  double report_threshold = 2.0;
  RoutingCost routing = RoutingCost::additive;
  int max_hops = 4;
  bool inject_all = false;
  TotalValueMode total_mode = TotalValueMode::received;
  bool ratios_as_percent = false;
  bool tax_rates_as_percent = false;
  double default_rate = 0.30;
  bool exclude_negative_income = false;
  std::optional<std::uint64_t> seed;  // recorded only
  unsigned threads = 0;
};

const char* to_string(RoutingCost mode);
const char* to_string(TotalValueMode mode);

struct InputPaths {
  std::filesystem::path firms;
  std::filesystem::path ownership;
  std::filesystem::path tax;
  std::filesystem::path gdp;

  static InputPaths in_directory(const std::filesystem::path& dir);
};

struct LoadedInputs {
  FirmsInput firms;
  OwnershipInput ownership;
  TaxInput tax;
  GdpTable gdp;
};

// Parses the four files concurrently. When several fail, the error of the
// first in the order firms, ownership, tax, gdp is thrown.
LoadedInputs load_inputs(const InputPaths& paths, const AnalysisParams& params);

MultilayerNetwork build_from_inputs(const LoadedInputs& inputs, const AnalysisParams& params);

struct OwnershipAnalysis {
  CondensedOwnership condensed;
  ValueFlowResult flow;
  std::vector<SinkScore> sink_scores;
};

OwnershipAnalysis analyze_ownership(const MultilayerNetwork& network, const AnalysisParams& params);

struct LoadAnalysis {
  LoadResult result;
  std::vector<report::LoadRow> rows;
};

LoadAnalysis analyze_load(const TaxNetwork& tax, const AnalysisParams& params);

std::vector<MultilayerTable> multilayer_tables(std::span<const ConduitScore> conduits,
                                               std::span<const report::LoadRow> load,
                                               const AnalysisParams& params);

}  // namespace taxnet
