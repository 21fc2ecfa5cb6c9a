#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace taxnet {

using FirmIndex = std::uint32_t;
using JurisdictionIndex = std::uint32_t;
using PairId = std::uint32_t;

// NACE Rev. 2 top-level sections A..U.
inline constexpr int kSectorCount = 21;

struct Jurisdiction {
  std::string code;  // ISO 3166-1 alpha-3
  std::string name;
  double gdp = 0.0;
};

struct Sector {
  char code = 'A';
  std::string label;
};

struct Firm {
  std::string id;
  std::string jurisdiction;
  char sector = 'A';
  double operating_income = 0.0;
};

// Directed from the shareholder to the owned firm.
struct OwnershipLink {
  std::string shareholder;
  std::string owned;
  double ratio = 0.0;
};

struct PairKey {
  std::string jurisdiction;
  char sector = 'A';

  friend auto operator<=>(const PairKey&, const PairKey&) = default;
  friend bool operator==(const PairKey&, const PairKey&) = default;
};

std::string to_string(const PairKey& key);

// Upper-cases and maps ISO alpha-2 codes onto alpha-3. Returns nullopt for
// anything that is neither a known alpha-2 code nor a three-letter code.
std::optional<std::string> normalize_jurisdiction_code(std::string_view code);

// Display name from the bundled ISO table; empty when the code is unknown.
std::string_view jurisdiction_name(std::string_view alpha3);

// All alpha-3 codes of the bundled ISO table, in table order.
std::span<const std::string_view> iso_alpha3_codes();

bool is_valid_sector(char code);
std::optional<char> normalize_sector(std::string_view code);
std::string_view sector_label(char code);

// Withholding-tax layer: a complete rate function over ordered pairs of
// distinct jurisdictions. rate(j, j) is stored as 0 and never consulted.
class TaxNetwork {
 public:
  TaxNetwork() = default;
  // `rates` is row-major n x n, row = paying (origin) jurisdiction.
  TaxNetwork(std::vector<std::string> codes, std::vector<double> rates);

  std::size_t size() const { return codes_.size(); }
  const std::string& code(JurisdictionIndex j) const { return codes_[j]; }
  const std::vector<std::string>& codes() const { return codes_; }
  std::optional<JurisdictionIndex> find(std::string_view code) const;

  double rate(JurisdictionIndex from, JurisdictionIndex to) const {
    return rates_[static_cast<std::size_t>(from) * codes_.size() + to];
  }
  double rate(std::string_view from, std::string_view to) const;

 private:
  std::vector<std::string> codes_;
  std::unordered_map<std::string, JurisdictionIndex> index_;
  std::vector<double> rates_;
};

struct BuildOptions {
  bool exclude_negative_income = false;
};

struct BuildReport {
  std::size_t links_dropped = 0;
  std::size_t firms_excluded_negative_income = 0;
  std::vector<std::string> warnings;
};

// Immutable ownership/tax multilayer network. Copies share the same
// underlying data.
class MultilayerNetwork {
 public:
  struct Holding {
    FirmIndex firm;
    double ratio;
  };

  std::size_t firm_count() const { return data_->firms.size(); }
  std::size_t link_count() const { return data_->link_count; }
  const Firm& firm(FirmIndex f) const { return data_->firms[f]; }
  std::span<const Firm> firms() const { return data_->firms; }
  std::optional<FirmIndex> find_firm(std::string_view id) const;

  // Interlayer map: the tax-layer node a firm is attached to.
  JurisdictionIndex jurisdiction_of(FirmIndex f) const { return data_->firm_jurisdiction[f]; }
  PairId pair_of(FirmIndex f) const {
    return pair_id(data_->firm_jurisdiction[f], data_->firms[f].sector);
  }
  PairId pair_id(JurisdictionIndex j, char sector) const {
    return j * kSectorCount + static_cast<PairId>(sector - 'A');
  }
  std::optional<PairId> find_pair(const PairKey& key) const;
  PairKey pair_key(PairId p) const;
  JurisdictionIndex pair_jurisdiction(PairId p) const { return p / kSectorCount; }
  std::size_t pair_space() const { return data_->tax.size() * kSectorCount; }

  // Firms holding shares in `owned`.
  std::span<const Holding> shareholders_of(FirmIndex owned) const;
  // Firms in which `shareholder` holds shares.
  std::span<const Holding> holdings_of(FirmIndex shareholder) const;

  const TaxNetwork& tax() const { return data_->tax; }
  // NaN when no GDP was supplied for the jurisdiction.
  double gdp(JurisdictionIndex j) const { return data_->gdp[j]; }
  double world_gdp() const { return data_->world_gdp; }
  const BuildReport& report() const { return data_->report; }

 private:
  struct Data {
    std::vector<Firm> firms;
    std::unordered_map<std::string, FirmIndex> firm_index;
    std::vector<JurisdictionIndex> firm_jurisdiction;
    std::vector<std::size_t> shareholder_offsets;
    std::vector<Holding> shareholder_edges;
    std::vector<std::size_t> holding_offsets;
    std::vector<Holding> holding_edges;
    std::size_t link_count = 0;
    TaxNetwork tax;
    std::vector<double> gdp;
    double world_gdp = 0.0;
    BuildReport report;
  };

  explicit MultilayerNetwork(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

  std::shared_ptr<const Data> data_;

  friend MultilayerNetwork build_network(std::vector<Firm>, std::vector<OwnershipLink>, TaxNetwork,
                                         const std::map<std::string, double>&, const BuildOptions&);
};

// Validates and assembles the two layers plus the interlayer map.
// World GDP is the sum over every entry of `gdp`.
// Throws InputError on duplicate firms or links, ratios outside (0, 1],
// self-links, unknown jurisdictions or sectors, and missing or non-positive
// GDP for a jurisdiction that hosts a firm. Links naming unknown firms are
// dropped and counted.
MultilayerNetwork build_network(std::vector<Firm> firms, std::vector<OwnershipLink> links,
                                TaxNetwork tax, const std::map<std::string, double>& gdp,
                                const BuildOptions& options = {});

inline PairKey pair_of(const Firm& firm) { return PairKey{firm.jurisdiction, firm.sector}; }

}  // namespace taxnet
