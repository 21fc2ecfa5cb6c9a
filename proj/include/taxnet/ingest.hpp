#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "taxnet/network_model.hpp"

namespace taxnet {

// Row accounting for one input file. Rows with a missing or invalid field are
// dropped with a reason; structural problems (bad header, unreadable file)
// throw InputError instead.
struct IngestReport {
  std::string file;
  std::size_t rows_read = 0;
  std::map<std::string, std::size_t> dropped;  // reason -> count
  std::vector<std::string> warnings;

  std::size_t rows_dropped() const;
  void drop(const std::string& reason) { ++dropped[reason]; }
};

struct FirmsInput {
  std::vector<Firm> firms;
  IngestReport report;
};

struct OwnershipInput {
  std::vector<OwnershipLink> links;
  IngestReport report;
};

struct TaxInput {
  TaxNetwork tax;
  IngestReport report;
};

struct OwnershipParseOptions {
  // Accept 0-100 percentages and divide by 100.
  bool ratios_as_percent = false;
};

struct TaxParseOptions {
  bool rates_as_percent = false;
  // Fill for pairs absent from the file when the origin has no `*` row.
  double default_rate = 0.30;
};

using GdpTable = std::map<std::string, double>;

// firms.csv: firm_id,jurisdiction,sector,operating_income
FirmsInput parse_firms(std::istream& in, const std::string& name = "firms.csv");
FirmsInput parse_firms(const std::filesystem::path& path);

// ownership.csv: shareholder_id,owned_id,ratio. Repeated (shareholder, owned)
// rows are merged by summing their ratios, capped at 1.0.
OwnershipInput parse_ownership(std::istream& in, const OwnershipParseOptions& options = {},
                               const std::string& name = "ownership.csv");
OwnershipInput parse_ownership(const std::filesystem::path& path,
                               const OwnershipParseOptions& options = {});

// tax.csv in long form (from,to,rate; to = `*` sets the origin's domestic
// rate used to fill absent pairs) or as a square matrix whose header row
// lists destination codes after an empty or label corner cell (an optional
// `*` column holds domestic rates).
TaxInput parse_tax_matrix(std::istream& in, const TaxParseOptions& options = {},
                          const std::string& name = "tax.csv");
TaxInput parse_tax_matrix(const std::filesystem::path& path, const TaxParseOptions& options = {});

// gdp.csv: jurisdiction,gdp. Every value must be positive and every code
// unique.
GdpTable parse_gdp(std::istream& in, const std::string& name = "gdp.csv");
GdpTable parse_gdp(const std::filesystem::path& path);

// Canonical writers; their output parses back to identical structures.
void write_firms_csv(std::ostream& out, const std::vector<Firm>& firms);
void write_ownership_csv(std::ostream& out, const std::vector<OwnershipLink>& links);
void write_tax_csv(std::ostream& out, const TaxNetwork& tax);
void write_gdp_csv(std::ostream& out, const GdpTable& gdp);

}  // namespace taxnet
