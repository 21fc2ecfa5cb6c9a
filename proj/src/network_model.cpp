#include "taxnet/network_model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>

#include "iso_codes.hpp"
#include "taxnet/errors.hpp"

namespace taxnet {

namespace {

constexpr std::array<std::string_view, kSectorCount> kSectorLabels = {
    "Agriculture, forestry and fishing",
    "Mining and quarrying",
    "Manufacturing",
    "Electricity, gas, steam and air conditioning supply",
    "Water supply; sewerage, waste management and remediation",
    "Construction",
    "Wholesale and retail trade; repair of motor vehicles",
    "Transportation and storage",
    "Accommodation and food service activities",
    "Information and communication",
    "Financial and insurance activities",
    "Real estate activities",
    "Professional, scientific and technical activities",
    "Administrative and support service activities",
    "Public administration and defence; compulsory social security",
    "Education",
    "Human health and social work activities",
    "Arts, entertainment and recreation",
    "Other service activities",
    "Activities of households as employers",
    "Activities of extraterritorial organisations and bodies",
};

std::string upper_trimmed(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

bool all_alpha(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; });
}

const std::array<std::string_view, 249>& alpha3_list() {
  static const auto list = [] {
    std::array<std::string_view, 249> codes{};
    for (std::size_t i = 0; i < detail::kIsoCountries.size(); ++i) {
      codes[i] = detail::kIsoCountries[i].alpha3;
    }
    return codes;
  }();
  return list;
}

}  // namespace

std::string to_string(const PairKey& key) {
  return key.jurisdiction + "x" + std::string(1, key.sector);
}

std::optional<std::string> normalize_jurisdiction_code(std::string_view code) {
  std::string c = upper_trimmed(code);
  if (!all_alpha(c)) return std::nullopt;
  if (c.size() == 3) return c;
  if (c.size() == 2) {
    for (const auto& country : detail::kIsoCountries) {
      if (country.alpha2 == c) return std::string(country.alpha3);
    }
  }
  return std::nullopt;
}

std::string_view jurisdiction_name(std::string_view alpha3) {
  for (const auto& country : detail::kIsoCountries) {
    if (country.alpha3 == alpha3) return country.name;
  }
  return {};
}

std::span<const std::string_view> iso_alpha3_codes() { return alpha3_list(); }

bool is_valid_sector(char code) { return code >= 'A' && code <= 'U'; }

std::optional<char> normalize_sector(std::string_view code) {
  std::string c = upper_trimmed(code);
  if (c.size() != 1 || !is_valid_sector(c[0])) return std::nullopt;
  return c[0];
}

std::string_view sector_label(char code) {
  if (!is_valid_sector(code)) return {};
  return kSectorLabels[static_cast<std::size_t>(code - 'A')];
}

TaxNetwork::TaxNetwork(std::vector<std::string> codes, std::vector<double> rates)
    : codes_(std::move(codes)), rates_(std::move(rates)) {
  const std::size_t n = codes_.size();
  if (rates_.size() != n * n) {
    throw InputError("tax matrix: expected " + std::to_string(n * n) + " rates, got " +
                     std::to_string(rates_.size()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!index_.emplace(codes_[i], static_cast<JurisdictionIndex>(i)).second) {
      throw InputError("tax matrix: duplicate jurisdiction " + codes_[i]);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double& r = rates_[i * n + j];
      if (i == j) {
        r = 0.0;
        continue;
      }
      if (!(r >= 0.0 && r <= 1.0)) {
        throw InputError("tax matrix: rate " + codes_[i] + "->" + codes_[j] +
                         " outside [0, 1]");
      }
    }
  }
}

std::optional<JurisdictionIndex> TaxNetwork::find(std::string_view code) const {
  auto it = index_.find(std::string(code));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double TaxNetwork::rate(std::string_view from, std::string_view to) const {
  auto f = find(from);
  auto t = find(to);
  if (!f || !t) {
    throw InputError("tax matrix: unknown jurisdiction pair " + std::string(from) + "->" +
                     std::string(to));
  }
  return rate(*f, *t);
}

std::optional<FirmIndex> MultilayerNetwork::find_firm(std::string_view id) const {
  auto it = data_->firm_index.find(std::string(id));
  if (it == data_->firm_index.end()) return std::nullopt;
  return it->second;
}

std::optional<PairId> MultilayerNetwork::find_pair(const PairKey& key) const {
  auto j = data_->tax.find(key.jurisdiction);
  if (!j || !is_valid_sector(key.sector)) return std::nullopt;
  return pair_id(*j, key.sector);
}

PairKey MultilayerNetwork::pair_key(PairId p) const {
  return PairKey{data_->tax.code(p / kSectorCount),
                 static_cast<char>('A' + static_cast<int>(p % kSectorCount))};
}

std::span<const MultilayerNetwork::Holding> MultilayerNetwork::shareholders_of(
    FirmIndex owned) const {
  const auto& d = *data_;
  return {d.shareholder_edges.data() + d.shareholder_offsets[owned],
          d.shareholder_offsets[owned + 1] - d.shareholder_offsets[owned]};
}

std::span<const MultilayerNetwork::Holding> MultilayerNetwork::holdings_of(
    FirmIndex shareholder) const {
  const auto& d = *data_;
  return {d.holding_edges.data() + d.holding_offsets[shareholder],
          d.holding_offsets[shareholder + 1] - d.holding_offsets[shareholder]};
}

MultilayerNetwork build_network(std::vector<Firm> firms, std::vector<OwnershipLink> links,
                                TaxNetwork tax, const std::map<std::string, double>& gdp,
                                const BuildOptions& options) {
  auto data = std::make_shared<MultilayerNetwork::Data>();
  auto& d = *data;
  d.tax = std::move(tax);

  const std::size_t n_juris = d.tax.size();
  d.gdp.assign(n_juris, std::numeric_limits<double>::quiet_NaN());
  for (const auto& [code, value] : gdp) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw InputError("gdp: non-positive or non-finite GDP for " + code);
    }
    d.world_gdp += value;
    if (auto j = d.tax.find(code)) d.gdp[*j] = value;
  }

  d.firms.reserve(firms.size());
  d.firm_jurisdiction.reserve(firms.size());
  d.firm_index.reserve(firms.size());
  for (auto& firm : firms) {
    if (options.exclude_negative_income && firm.operating_income < 0.0) {
      ++d.report.firms_excluded_negative_income;
      continue;
    }
    auto j = d.tax.find(firm.jurisdiction);
    if (!j) {
      throw InputError("firm " + firm.id + ": jurisdiction " + firm.jurisdiction +
                       " is not in the tax layer");
    }
    if (!is_valid_sector(firm.sector)) {
      throw InputError("firm " + firm.id + ": invalid sector code");
    }
    if (!std::isfinite(firm.operating_income)) {
      throw InputError("firm " + firm.id + ": non-finite operating income");
    }
    if (!(d.gdp[*j] > 0.0)) {
      throw InputError("firm " + firm.id + ": jurisdiction " + firm.jurisdiction +
                       " has no positive GDP");
    }
    const auto index = static_cast<FirmIndex>(d.firms.size());
    if (!d.firm_index.emplace(firm.id, index).second) {
      throw InputError("duplicate firm id " + firm.id);
    }
    d.firm_jurisdiction.push_back(*j);
    d.firms.push_back(std::move(firm));
  }

  struct Edge {
    FirmIndex shareholder;
    FirmIndex owned;
    double ratio;
  };
  std::vector<Edge> edges;
  edges.reserve(links.size());
  for (const auto& link : links) {
    if (!(link.ratio > 0.0 && link.ratio <= 1.0)) {
      throw InputError("link " + link.shareholder + "->" + link.owned +
                       ": ratio outside (0, 1]");
    }
    if (link.shareholder == link.owned) {
      throw InputError("link " + link.shareholder + "->" + link.owned + ": self-ownership");
    }
    auto s = d.firm_index.find(link.shareholder);
    auto o = d.firm_index.find(link.owned);
    if (s == d.firm_index.end() || o == d.firm_index.end()) {
      ++d.report.links_dropped;
      continue;
    }
    edges.push_back({s->second, o->second, link.ratio});
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.owned != b.owned ? a.owned < b.owned : a.shareholder < b.shareholder;
  });
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i].owned == edges[i - 1].owned && edges[i].shareholder == edges[i - 1].shareholder) {
      throw InputError("duplicate link " + d.firms[edges[i].shareholder].id + "->" +
                       d.firms[edges[i].owned].id);
    }
  }
  if (d.report.links_dropped > 0) {
    d.report.warnings.push_back(std::to_string(d.report.links_dropped) +
                                " links dropped: endpoint not among retained firms");
  }

  const std::size_t n = d.firms.size();
  d.link_count = edges.size();
  d.shareholder_offsets.assign(n + 1, 0);
  d.holding_offsets.assign(n + 1, 0);
  for (const auto& e : edges) {
    ++d.shareholder_offsets[e.owned + 1];
    ++d.holding_offsets[e.shareholder + 1];
  }
  std::partial_sum(d.shareholder_offsets.begin(), d.shareholder_offsets.end(),
                   d.shareholder_offsets.begin());
  std::partial_sum(d.holding_offsets.begin(), d.holding_offsets.end(), d.holding_offsets.begin());
  d.shareholder_edges.resize(edges.size());
  d.holding_edges.resize(edges.size());
  {
    std::vector<std::size_t> fill_s(d.shareholder_offsets.begin(), d.shareholder_offsets.end() - 1);
    std::vector<std::size_t> fill_h(d.holding_offsets.begin(), d.holding_offsets.end() - 1);
    // edges are sorted by (owned, shareholder), so both adjacency lists come
    // out in ascending neighbour order.
    for (const auto& e : edges) d.shareholder_edges[fill_s[e.owned]++] = {e.shareholder, e.ratio};
    for (const auto& e : edges) d.holding_edges[fill_h[e.shareholder]++] = {e.owned, e.ratio};
  }

  std::size_t over_owned = 0;
  for (FirmIndex f = 0; f < n; ++f) {
    double total = 0.0;
    for (std::size_t k = d.shareholder_offsets[f]; k < d.shareholder_offsets[f + 1]; ++k) {
      total += d.shareholder_edges[k].ratio;
    }
    if (total > 1.0 + 1e-9) ++over_owned;
  }
  if (over_owned > 0) {
    d.report.warnings.push_back(std::to_string(over_owned) +
                                " firms have inbound ownership ratios summing above 1.0");
  }

  return MultilayerNetwork(std::move(data));
}

}  // namespace taxnet
