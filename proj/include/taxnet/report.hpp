#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "taxnet/multilayer.hpp"
#include "taxnet/sink_conduit.hpp"
#include "taxnet/tax_routing.hpp"
#include "taxnet/value_flow.hpp"

// Output tables. Every file is ordered by jurisdiction then sector, numbers
// carry 17 significant digits, and an absent value is an empty field. Each
// reader accepts exactly what its writer emits.
namespace taxnet::report {

// sink_scores.csv: jurisdiction,sector,S
void write_sink_scores(std::ostream& out, std::span<const SinkScore> scores);
std::vector<SinkScore> read_sink_scores(std::istream& in, const std::string& name);
std::vector<SinkScore> read_sink_scores(const std::filesystem::path& path);

// conduit_scores.csv: jurisdiction,sector,c_out_raw,c_in_raw,C_out,C_in,C
void write_conduit_scores(std::ostream& out, std::span<const ConduitScore> scores);
std::vector<ConduitScore> read_conduit_scores(std::istream& in, const std::string& name);
std::vector<ConduitScore> read_conduit_scores(const std::filesystem::path& path);

struct LoadRow {
  std::string jurisdiction;
  std::optional<double> l_raw;
  double l_std = 0.0;
};

// load_scores.csv: jurisdiction,l_raw,L
void write_load_scores(std::ostream& out, std::span<const LoadRow> rows);
std::vector<LoadRow> read_load_scores(std::istream& in, const std::string& name);
std::vector<LoadRow> read_load_scores(const std::filesystem::path& path);
std::vector<LoadRow> load_rows(const TaxNetwork& tax, const LoadResult& result,
                               std::span<const double> standardized);
std::map<std::string, double> standardized_load_map(std::span<const LoadRow> rows);

// multilayer_scores_beta<beta>.csv: jurisdiction,sector,M_out,M_in,M
std::string multilayer_file_name(double beta);
void write_multilayer_scores(std::ostream& out, const MultilayerTable& table);
std::vector<MultilayerScore> read_multilayer_scores(std::istream& in, const std::string& name);
std::vector<MultilayerScore> read_multilayer_scores(const std::filesystem::path& path);

// beta_sweep.csv: beta,threshold,count
void write_beta_sweep(std::ostream& out, const SweepReport& sweep);

// value_flow.csv: firm_id,in_value,out_value. Collapsed cycles appear once,
// their member ids joined by '+'.
void write_value_flow(std::ostream& out, const MultilayerNetwork& network,
                      const OwnershipView& view, const ValueFlowResult& flow);

struct Bin {
  double low = 0.0;
  double high = 0.0;
  std::size_t count = 0;
};

// Bins of the given width anchored at 0: [k*w, (k+1)*w). The range from the
// lowest to the highest occupied bin is emitted without gaps. Throws
// InputError for a non-positive width or a non-finite value.
std::vector<Bin> histogram(std::span<const double> values, double width);
// bins.csv: bin_low,bin_high,count
void write_histogram(std::ostream& out, std::span<const Bin> bins);

struct ColumnValues {
  std::string column;
  std::vector<double> values;
  std::size_t empty = 0;  // rows with an empty field in the column
};

// Numeric column of any output table; the last column when `column` is empty.
ColumnValues read_column(std::istream& in, const std::string& name, const std::string& column);
ColumnValues read_column(const std::filesystem::path& path, const std::string& column);

// (jurisdiction, M) for one sector, ordered by jurisdiction.
std::vector<std::pair<std::string, double>> cartogram(std::span<const MultilayerScore> scores,
                                                      char sector);
// jurisdiction,M
void write_cartogram(std::ostream& out, std::span<const std::pair<std::string, double>> rows);

// Two-decimal ranking for the terminal, highest M first.
void print_multilayer_table(std::ostream& out, const MultilayerTable& table, double threshold);

}  // namespace taxnet::report
