#include "taxnet/pipeline.hpp"

#include <future>

namespace taxnet {

const char* to_string(RoutingCost mode) {
  return mode == RoutingCost::additive ? "additive" : "multiplicative";
}

const char* to_string(TotalValueMode mode) {
  return mode == TotalValueMode::received ? "received" : "injected";
}

InputPaths InputPaths::in_directory(const std::filesystem::path& dir) {
  return {dir / "firms.csv", dir / "ownership.csv", dir / "tax.csv", dir / "gdp.csv"};
}

LoadedInputs load_inputs(const InputPaths& paths, const AnalysisParams& params) {
  auto firms = std::async(std::launch::async, [&] { return parse_firms(paths.firms); });
  auto ownership = std::async(std::launch::async, [&] {
    return parse_ownership(paths.ownership, {params.ratios_as_percent});
  });
  auto tax = std::async(std::launch::async, [&] {
    return parse_tax_matrix(paths.tax, {params.tax_rates_as_percent, params.default_rate});
  });
  auto gdp = std::async(std::launch::async, [&] { return parse_gdp(paths.gdp); });
  // Braced initialisation runs the get() calls in order.
  return LoadedInputs{firms.get(), ownership.get(), tax.get(), gdp.get()};
}

MultilayerNetwork build_from_inputs(const LoadedInputs& inputs, const AnalysisParams& params) {
  return build_network(inputs.firms.firms, inputs.ownership.links, inputs.tax.tax, inputs.gdp,
                       {params.exclude_negative_income});
}

OwnershipAnalysis analyze_ownership(const MultilayerNetwork& network, const AnalysisParams& params) {
  OwnershipAnalysis a{condense_cycles(network), {}, {}};
  a.flow = propagate_value(a.condensed.view, {params.inject_all, params.total_mode, params.threads});
  a.sink_scores = sink_scores(network, a.condensed.view, a.flow);
  return a;
}

LoadAnalysis analyze_load(const TaxNetwork& tax, const AnalysisParams& params) {
  LoadOptions options;
  options.cost = params.routing;
  options.max_hops = params.max_hops;
  options.threads = params.threads;
  LoadAnalysis a;
  a.result = load_centrality(tax, options);
  const auto standardized = standardize_load(a.result.load);
  a.rows = report::load_rows(tax, a.result, standardized);
  return a;
}

std::vector<MultilayerTable> multilayer_tables(std::span<const ConduitScore> conduits,
                                               std::span<const report::LoadRow> load,
                                               const AnalysisParams& params) {
  const auto load_std = report::standardized_load_map(load);
  std::vector<MultilayerTable> tables;
  for (double beta : params.betas) {
    tables.push_back(multilayer_scores(conduits, load_std, params.alpha, beta));
  }
  return tables;
}

}  // namespace taxnet
