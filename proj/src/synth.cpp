#include "taxnet/synth.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <cmath>
#include <numbers>
#include <set>

#include "taxnet/csv.hpp"
#include "taxnet/errors.hpp"

namespace taxnet {

std::uint64_t SynthRng::below(std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

double SynthRng::normal() {
  double u1 = uniform();
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

std::string lowered_key(std::string key) {
  for (char& c : key) {
    if (c == '-') c = '_';
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return key;
}

template <class T>
T parse_integer(const std::string& key, const std::string& value) {
  T out{};
  const std::string v = csv::trim(value);
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw InputError("synth setting " + key + ": not an integer: " + value);
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  auto x = csv::parse_double(value);
  if (!x) throw InputError("synth setting " + key + ": not a number: " + value);
  return *x;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  for (auto& item : csv::split_line(value)) {
    std::string t = csv::trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

std::vector<PairKey> parse_pairs(const std::string& key, const std::string& value) {
  std::vector<PairKey> out;
  if (lowered_key(csv::trim(value)) == "none") return out;
  for (const auto& item : split_list(value)) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw InputError("synth setting " + key + ": expected CODE:SECTOR, got " + item);
    }
    auto code = normalize_jurisdiction_code(item.substr(0, colon));
    auto sector = normalize_sector(item.substr(colon + 1));
    if (!code || !sector) throw InputError("synth setting " + key + ": bad pair " + item);
    out.push_back(PairKey{*code, *sector});
  }
  return out;
}

std::string firm_name(std::size_t index, std::size_t width) {
  std::string digits = std::to_string(index);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return "F" + digits;
}

struct Plan {
  std::vector<std::string> codes;
  std::vector<PairKey> sinks;
  std::vector<PairKey> conduits;
  std::vector<std::string> clique;
  std::vector<std::string> background_codes;
};

Plan plan(const SynthConfig& c) {
  const auto iso = iso_alpha3_codes();
  if (c.jurisdictions < 2 || c.jurisdictions > iso.size()) {
    throw InputError("synth: jurisdictions must be between 2 and " + std::to_string(iso.size()));
  }
  if (c.sectors < 1 || c.sectors > kSectorCount) {
    throw InputError("synth: sectors must be between 1 and 21");
  }
  if (c.firms < 1) throw InputError("synth: firms must be positive");
  if (!(c.links_per_firm >= 0.0)) throw InputError("synth: links_per_firm must be >= 0");
  if (!(c.depth_continuation >= 0.0 && c.depth_continuation < 1.0)) {
    throw InputError("synth: depth_continuation must be in [0, 1)");
  }
  if (c.max_depth < 0) throw InputError("synth: max_depth must be >= 0");
  if (!(c.income_log_sd >= 0.0) || !std::isfinite(c.income_log_mean)) {
    throw InputError("synth: bad income distribution");
  }
  if (!(c.planted_strength >= 0.0 && c.planted_strength <= 1.0) ||
      !(c.bypass_share >= 0.0 && c.bypass_share <= 1.0) ||
      c.planted_strength + c.bypass_share > 1.0) {
    throw InputError("synth: planted_strength and bypass_share must be shares summing to <= 1");
  }

  Plan p;
  std::vector<std::string> all(iso.begin(), iso.end());
  std::sort(all.begin(), all.end());
  p.codes.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(c.jurisdictions));

  const char last_sector = static_cast<char>('A' + c.sectors - 1);
  const char default_sector = std::min('K', last_sector);
  p.sinks = c.planted_sinks.value_or(
      std::vector<PairKey>{{p.codes[p.codes.size() - 1], default_sector}});
  p.conduits = c.planted_conduits.value_or(
      std::vector<PairKey>{{p.codes[p.codes.size() - 2], default_sector}});

  const std::set<std::string> known(p.codes.begin(), p.codes.end());
  std::set<PairKey> seen;
  std::set<std::string> planted_codes;
  for (const auto* list : {&p.sinks, &p.conduits}) {
    for (const auto& k : *list) {
      if (!known.contains(k.jurisdiction) || k.sector > last_sector) {
        throw InputError("synth: planted pair " + to_string(k) + " is not a generated pair");
      }
      if (!seen.insert(k).second) {
        throw InputError("synth: planted pair " + to_string(k) + " listed twice");
      }
      planted_codes.insert(k.jurisdiction);
    }
  }
  if (!p.conduits.empty() && p.sinks.empty()) {
    throw InputError("synth: planted conduits need at least one planted sink");
  }
  for (const auto& code : p.codes) {
    if (!planted_codes.contains(code)) p.background_codes.push_back(code);
  }
  if (p.background_codes.empty()) {
    throw InputError("synth: every jurisdiction hosts a planted pair; none left for background");
  }

  if (!c.zero_tax_clique.empty()) {
    for (const auto& raw : c.zero_tax_clique) {
      auto code = normalize_jurisdiction_code(raw);
      if (!code || !known.contains(*code)) {
        throw InputError("synth: zero-tax clique code " + raw + " is not generated");
      }
      p.clique.push_back(*code);
    }
  } else {
    if (c.zero_tax_clique_size > p.codes.size()) {
      throw InputError("synth: zero_tax_clique_size exceeds jurisdictions");
    }
    p.clique.assign(p.codes.begin(),
                    p.codes.begin() + static_cast<std::ptrdiff_t>(c.zero_tax_clique_size));
  }
  std::sort(p.clique.begin(), p.clique.end());
  p.clique.erase(std::unique(p.clique.begin(), p.clique.end()), p.clique.end());
  return p;
}

// One shareholder gets the majority; any others split the rest.
void assign_ratios(SynthRng& rng, std::vector<double>& ratios) {
  const std::size_t k = ratios.size();
  if (k == 0) return;
  double majority = (k == 1 && rng.chance(0.5)) ? 1.0 : rng.uniform(0.5, 1.0);
  if (k > 1) majority = std::min(majority, std::nextafter(1.0, 0.0));
  ratios[0] = majority;
  if (k == 1) return;
  std::vector<double> w(k - 1);
  double total = 0.0;
  for (auto& x : w) total += (x = rng.uniform(0.1, 1.0));
  for (std::size_t i = 1; i < k; ++i) ratios[i] = (1.0 - majority) * w[i - 1] / total;
}

}  // namespace

void apply_synth_setting(SynthConfig& c, const std::string& raw_key, const std::string& value) {
  const std::string key = lowered_key(csv::trim(raw_key));
  if (key == "seed") {
    c.seed = parse_integer<std::uint64_t>(key, value);
  } else if (key == "jurisdictions" || key == "n_jurisdictions") {
    c.jurisdictions = parse_integer<std::size_t>(key, value);
  } else if (key == "sectors" || key == "n_sectors") {
    c.sectors = parse_integer<std::size_t>(key, value);
  } else if (key == "firms" || key == "n_firms") {
    c.firms = parse_integer<std::size_t>(key, value);
  } else if (key == "links_per_firm") {
    c.links_per_firm = parse_real(key, value);
  } else if (key == "depth_continuation") {
    c.depth_continuation = parse_real(key, value);
  } else if (key == "max_depth") {
    c.max_depth = parse_integer<int>(key, value);
  } else if (key == "income_log_mean") {
    c.income_log_mean = parse_real(key, value);
  } else if (key == "income_log_sd") {
    c.income_log_sd = parse_real(key, value);
  } else if (key == "planted_sinks") {
    c.planted_sinks = parse_pairs(key, value);
  } else if (key == "planted_conduits") {
    c.planted_conduits = parse_pairs(key, value);
  } else if (key == "planted_strength") {
    c.planted_strength = parse_real(key, value);
  } else if (key == "bypass_share") {
    c.bypass_share = parse_real(key, value);
  } else if (key == "zero_tax_clique") {
    c.zero_tax_clique = split_list(value);
  } else if (key == "zero_tax_clique_size") {
    c.zero_tax_clique_size = parse_integer<std::size_t>(key, value);
  } else {
    throw InputError("unknown synth setting: " + raw_key);
  }
}

SynthConfig parse_synth_config(std::istream& in, const std::string& name) {
  SynthConfig config;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = csv::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw InputError(name + ":" + std::to_string(number) + ": expected key=value");
    }
    apply_synth_setting(config, t.substr(0, eq), t.substr(eq + 1));
  }
  return config;
}

SynthConfig parse_synth_config(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  return parse_synth_config(in, path.string());
}

SynthData generate_synthetic(const SynthConfig& config) {
  const Plan p = plan(config);
  SynthRng rng(config.seed);
  const std::size_t nj = p.codes.size();

  // Tax layer: domestic rates on a 5% grid, half of all pairs get a treaty
  // halving the rate, and the clique trades tax-free.
  std::vector<int> domestic(nj);
  for (auto& d : domestic) d = static_cast<int>(rng.below(7));
  std::vector<double> rates(nj * nj, 0.0);
  const std::set<std::string> clique(p.clique.begin(), p.clique.end());
  for (std::size_t i = 0; i < nj; ++i) {
    for (std::size_t j = 0; j < nj; ++j) {
      if (i == j) continue;
      int units = domestic[i];
      if (rng.chance(0.5)) units /= 2;
      if (clique.contains(p.codes[i]) && clique.contains(p.codes[j])) units = 0;
      rates[i * nj + j] = static_cast<double>(units) / 20.0;
    }
  }

  std::size_t sink_firms = 0;
  std::size_t out_firms = 0;
  if (!p.sinks.empty()) {
    sink_firms = p.sinks.size() * std::max<std::size_t>(1, config.firms / 200);
    out_firms = p.conduits.size() * std::max<std::size_t>(2, config.firms / 80);
  }
  const std::size_t in_firms = p.conduits.empty() ? 0 : sink_firms;
  const std::size_t planted = sink_firms + out_firms + in_firms;
  if (config.firms < planted + 20) {
    throw InputError("synth: " + std::to_string(config.firms) +
                     " firms is too few for the planted structure (need at least " +
                     std::to_string(planted + 20) + ")");
  }
  const std::size_t background = config.firms - planted;

  auto income = [&] {
    return std::round(std::exp(config.income_log_mean + config.income_log_sd * rng.normal()));
  };

  std::vector<Firm> firms(config.firms);
  const std::size_t width = std::to_string(config.firms - 1).size();
  for (std::size_t i = 0; i < firms.size(); ++i) firms[i].id = firm_name(i, width);

  // Background firms and their chain levels; empty levels are squeezed out.
  std::vector<int> level(background);
  for (std::size_t i = 0; i < background; ++i) {
    int d = 0;
    while (d < config.max_depth && rng.chance(config.depth_continuation)) ++d;
    level[i] = d;
    firms[i].jurisdiction = p.background_codes[rng.below(p.background_codes.size())];
    firms[i].sector = static_cast<char>('A' + rng.below(config.sectors));
    firms[i].operating_income = income();
  }
  {
    std::set<int> used(level.begin(), level.end());
    std::vector<int> rank(static_cast<std::size_t>(config.max_depth) + 1, 0);
    int r = 0;
    for (int d : used) rank[static_cast<std::size_t>(d)] = r++;
    for (auto& d : level) d = rank[static_cast<std::size_t>(d)];
  }
  std::vector<std::size_t> by_level(background);
  for (std::size_t i = 0; i < background; ++i) by_level[i] = i;
  std::stable_sort(by_level.begin(), by_level.end(),
                   [&](std::size_t a, std::size_t b) { return level[a] < level[b]; });
  const int top_level = background > 0 ? level[by_level.back()] : 0;
  std::vector<std::size_t> level_start(static_cast<std::size_t>(top_level) + 2, background);
  for (std::size_t k = background; k-- > 0;) {
    level_start[static_cast<std::size_t>(level[by_level[k]])] = k;
  }

  // shareholders[owned] in insertion order; ratios assigned afterwards.
  std::vector<std::vector<std::size_t>> shareholders(config.firms);
  auto link = [&](std::size_t holder, std::size_t owned) {
    auto& list = shareholders[owned];
    if (std::find(list.begin(), list.end(), holder) != list.end()) return false;
    list.push_back(holder);
    return true;
  };

  std::size_t links = 0;
  for (std::size_t k = level_start[1]; k < background; ++k) {
    const std::size_t f = by_level[k];
    const auto d = static_cast<std::size_t>(level[f]);
    const std::size_t lo = level_start[d - 1];
    const std::size_t hi = level_start[d];
    links += link(f, by_level[lo + rng.below(hi - lo)]) ? 1 : 0;
  }
  const auto target = static_cast<std::size_t>(
      std::llround(config.links_per_firm * static_cast<double>(background)));
  const std::size_t lower_firms = level_start[static_cast<std::size_t>(top_level)];
  for (std::size_t attempts = 0; links < target && lower_firms > 0 && attempts < 20 * target;
       ++attempts) {
    const std::size_t owned = by_level[rng.below(lower_firms)];
    const std::size_t above = level_start[static_cast<std::size_t>(level[owned]) + 1];
    const std::size_t holder = by_level[above + rng.below(background - above)];
    links += link(holder, owned) ? 1 : 0;
  }

  // Planted firms: sinks, then outward conduit firms, then inward ones.
  auto place = [&](std::size_t i, const PairKey& key) {
    firms[i].jurisdiction = key.jurisdiction;
    firms[i].sector = key.sector;
    firms[i].operating_income = income();
  };
  std::vector<std::size_t> sink_ids, out_ids, in_ids;
  std::size_t next = background;
  for (std::size_t s = 0; s < sink_firms; ++s) {
    place(next, p.sinks[s % p.sinks.size()]);
    sink_ids.push_back(next++);
  }
  for (std::size_t s = 0; s < out_firms; ++s) {
    place(next, p.conduits[s % p.conduits.size()]);
    out_ids.push_back(next++);
  }
  for (std::size_t s = 0; s < in_firms; ++s) {
    place(next, p.conduits[s % p.conduits.size()]);
    in_ids.push_back(next++);
  }

  // Fixed ratios for planted links; everything else goes through
  // assign_ratios.
  std::vector<std::vector<double>> fixed(config.firms);
  if (!sink_ids.empty()) {
    std::vector<std::size_t> unowned;
    for (std::size_t i = 0; i < background; ++i) {
      if (shareholders[i].empty()) unowned.push_back(i);
    }
    for (std::size_t k = unowned.size(); k > 1; --k) {
      std::swap(unowned[k - 1], unowned[rng.below(k)]);
    }
    // Owners above the inward conduit firms are taken first so they exist
    // whatever the shares.
    std::size_t u = 0;
    for (std::size_t k = 0; k < in_ids.size(); ++k) {
      link(in_ids[k], sink_ids[k]);
      fixed[sink_ids[k]] = {rng.uniform(0.1, 0.2)};
      if (u < unowned.size()) link(unowned[u++], in_ids[k]);
    }
    const double rest = static_cast<double>(unowned.size() - u);
    const auto share = [&](double s) { return static_cast<std::size_t>(std::llround(s * rest)); };
    const std::size_t to_conduits = out_ids.empty() ? 0 : share(config.planted_strength);
    const std::size_t to_sinks =
        std::min(share(config.bypass_share), unowned.size() - u - to_conduits);
    for (std::size_t k = 0; k < to_conduits; ++k, ++u) {
      link(out_ids[k % out_ids.size()], unowned[u]);
      fixed[unowned[u]] = {1.0};
    }
    for (std::size_t k = 0; k < to_sinks; ++k, ++u) link(sink_ids[k % sink_ids.size()], unowned[u]);
    for (std::size_t k = 0; k < out_ids.size(); ++k) {
      link(sink_ids[k % sink_ids.size()], out_ids[k]);
      fixed[out_ids[k]] = {1.0};
    }
  }

  SynthData data;
  for (std::size_t owned = 0; owned < config.firms; ++owned) {
    const auto& holders = shareholders[owned];
    std::vector<double> ratios(holders.size());
    if (!fixed[owned].empty()) {
      ratios = fixed[owned];
    } else {
      assign_ratios(rng, ratios);
    }
    for (std::size_t k = 0; k < holders.size(); ++k) {
      data.links.push_back({firms[holders[k]].id, firms[owned].id, ratios[k]});
    }
  }
  std::sort(data.links.begin(), data.links.end(),
            [](const OwnershipLink& a, const OwnershipLink& b) {
              return a.shareholder != b.shareholder ? a.shareholder < b.shareholder
                                                    : a.owned < b.owned;
            });

  // GDP tracks the number of firms hosted, with noise; rounded to millions.
  std::map<std::string, std::size_t> hosted;
  for (const auto& f : firms) ++hosted[f.jurisdiction];
  for (const auto& code : p.codes) {
    const double count = static_cast<double>(hosted[code] + 1);
    data.gdp[code] = std::round(count * std::exp(0.25 * rng.normal()) * 1e3) * 1e6;
  }

  data.firms = std::move(firms);
  data.tax = TaxNetwork(p.codes, std::move(rates));
  data.planted_sinks = p.sinks;
  data.planted_conduits = p.conduits;
  data.zero_tax_clique = p.clique;
  return data;
}

void write_synthetic(const SynthData& data, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create directory " + dir.string() + ": " + ec.message());
  {
    auto out = csv::open_output(dir / "firms.csv");
    write_firms_csv(out, data.firms);
  }
  {
    auto out = csv::open_output(dir / "ownership.csv");
    write_ownership_csv(out, data.links);
  }
  {
    auto out = csv::open_output(dir / "tax.csv");
    write_tax_csv(out, data.tax);
  }
  {
    auto out = csv::open_output(dir / "gdp.csv");
    write_gdp_csv(out, data.gdp);
  }
}

}  // namespace taxnet
