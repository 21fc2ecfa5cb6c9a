#include "taxnet/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>
#include <unordered_map>

#include "taxnet/csv.hpp"
#include "taxnet/errors.hpp"

namespace taxnet {

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

void expect_header(csv::Reader& reader, const std::string& name,
                   const std::vector<std::string>& expected) {
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw InputError(name + ": missing header row");
  bool ok = fields.size() == expected.size();
  for (std::size_t i = 0; ok && i < fields.size(); ++i) {
    ok = lower(csv::trim(fields[i])) == expected[i];
  }
  if (!ok) {
    std::string want;
    for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
    throw InputError(name + ": malformed header, expected " + want);
  }
}

std::string field(const std::vector<std::string>& row, std::size_t i) {
  return i < row.size() ? csv::trim(row[i]) : std::string();
}

}  // namespace

std::size_t IngestReport::rows_dropped() const {
  return std::accumulate(dropped.begin(), dropped.end(), std::size_t{0},
                         [](std::size_t acc, const auto& kv) { return acc + kv.second; });
}

FirmsInput parse_firms(std::istream& in, const std::string& name) {
  FirmsInput result;
  result.report.file = name;
  csv::Reader reader(in);
  expect_header(reader, name, {"firm_id", "jurisdiction", "sector", "operating_income"});

  std::vector<std::string> row;
  while (reader.next(row)) {
    ++result.report.rows_read;
    const std::string id = field(row, 0);
    const std::string juris = field(row, 1);
    const std::string sector = field(row, 2);
    const std::string income = field(row, 3);
    if (id.empty()) {
      result.report.drop("missing firm id");
      continue;
    }
    if (juris.empty()) {
      result.report.drop("missing jurisdiction");
      continue;
    }
    if (sector.empty()) {
      result.report.drop("missing sector");
      continue;
    }
    if (income.empty()) {
      result.report.drop("missing operating income");
      continue;
    }
    auto code = normalize_jurisdiction_code(juris);
    if (!code) {
      result.report.drop("invalid jurisdiction");
      continue;
    }
    auto sec = normalize_sector(sector);
    if (!sec) {
      result.report.drop("invalid sector");
      continue;
    }
    auto value = csv::parse_double(income);
    if (!value) {
      result.report.drop("unparseable operating income");
      continue;
    }
    result.firms.push_back(Firm{id, *code, *sec, *value});
  }
  return result;
}

FirmsInput parse_firms(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  return parse_firms(in, path.string());
}

OwnershipInput parse_ownership(std::istream& in, const OwnershipParseOptions& options,
                               const std::string& name) {
  OwnershipInput result;
  result.report.file = name;
  csv::Reader reader(in);
  expect_header(reader, name, {"shareholder_id", "owned_id", "ratio"});

  std::unordered_map<std::string, std::size_t> seen;  // "s\0o" -> index in links
  std::vector<std::string> row;
  std::size_t merged = 0;
  std::size_t capped = 0;
  while (reader.next(row)) {
    ++result.report.rows_read;
    const std::string s = field(row, 0);
    const std::string o = field(row, 1);
    const std::string r = field(row, 2);
    if (s.empty() || o.empty()) {
      result.report.drop("missing firm id");
      continue;
    }
    if (r.empty()) {
      result.report.drop("missing ratio");
      continue;
    }
    if (s == o) {
      result.report.drop("self-loop");
      continue;
    }
    auto ratio = csv::parse_double(r);
    if (!ratio) {
      result.report.drop("unparseable ratio");
      continue;
    }
    double value = options.ratios_as_percent ? *ratio / 100.0 : *ratio;
    if (!(value > 0.0 && value <= 1.0)) {
      result.report.drop("ratio out of range");
      continue;
    }
    std::string key = s;
    key.push_back('\0');
    key += o;
    auto [it, inserted] = seen.emplace(std::move(key), result.links.size());
    if (inserted) {
      result.links.push_back(OwnershipLink{s, o, value});
    } else {
      ++merged;
      double& total = result.links[it->second].ratio;
      total += value;
      if (total > 1.0) {
        total = 1.0;
        ++capped;
      }
    }
  }
  if (merged > 0) {
    result.report.warnings.push_back(std::to_string(merged) +
                                     " duplicate ownership rows merged by summing ratios");
  }
  if (capped > 0) {
    result.report.warnings.push_back(std::to_string(capped) +
                                     " merged ownership ratios capped at 1.0");
  }
  return result;
}

OwnershipInput parse_ownership(const std::filesystem::path& path,
                               const OwnershipParseOptions& options) {
  auto in = csv::open_input(path);
  return parse_ownership(in, options, path.string());
}

namespace {

double checked_rate(const std::string& name, const std::string& text, bool percent,
                    const std::string& what) {
  auto v = csv::parse_double(text);
  if (!v) throw InputError(name + ": unparseable rate for " + what);
  double rate = percent ? *v / 100.0 : *v;
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw InputError(name + ": rate for " + what + " outside [0, 1]");
  }
  return rate;
}

std::string checked_code(const std::string& name, const std::string& text) {
  auto code = normalize_jurisdiction_code(text);
  if (!code) throw InputError(name + ": invalid jurisdiction code '" + text + "'");
  return *code;
}

struct RateSheet {
  std::vector<std::string> codes;
  std::map<std::pair<std::string, std::string>, double> rates;
  std::map<std::string, double> domestic;
};

TaxInput complete(RateSheet sheet, const TaxParseOptions& options, IngestReport report) {
  std::sort(sheet.codes.begin(), sheet.codes.end());
  sheet.codes.erase(std::unique(sheet.codes.begin(), sheet.codes.end()), sheet.codes.end());
  const std::size_t n = sheet.codes.size();
  std::vector<double> matrix(n * n, 0.0);
  std::size_t filled_domestic = 0;
  std::size_t filled_default = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      auto it = sheet.rates.find({sheet.codes[i], sheet.codes[j]});
      if (it != sheet.rates.end()) {
        matrix[i * n + j] = it->second;
      } else if (auto d = sheet.domestic.find(sheet.codes[i]); d != sheet.domestic.end()) {
        matrix[i * n + j] = d->second;
        ++filled_domestic;
      } else {
        matrix[i * n + j] = options.default_rate;
        ++filled_default;
      }
    }
  }
  if (filled_domestic > 0) {
    report.warnings.push_back(std::to_string(filled_domestic) +
                              " missing tax pairs filled with the origin's domestic rate");
  }
  if (filled_default > 0) {
    report.warnings.push_back(std::to_string(filled_default) +
                              " missing tax pairs filled with the default rate " +
                              csv::format_double(options.default_rate));
  }
  return TaxInput{TaxNetwork(std::move(sheet.codes), std::move(matrix)), std::move(report)};
}

}  // namespace

TaxInput parse_tax_matrix(std::istream& in, const TaxParseOptions& options,
                          const std::string& name) {
  if (!(options.default_rate >= 0.0 && options.default_rate <= 1.0)) {
    throw InputError("default tax rate outside [0, 1]");
  }
  csv::Reader reader(in);
  std::vector<std::string> header;
  if (!reader.next(header)) throw InputError(name + ": missing header row");
  for (auto& h : header) h = csv::trim(h);

  IngestReport report;
  report.file = name;
  RateSheet sheet;
  std::vector<std::string> row;

  const bool long_form = header.size() == 3 && lower(header[0]) == "from" &&
                         lower(header[1]) == "to" && lower(header[2]) == "rate";
  if (long_form) {
    while (reader.next(row)) {
      ++report.rows_read;
      if (row.size() < 3) throw InputError(name + ": short row at line " +
                                           std::to_string(reader.line_number()));
      const std::string from = checked_code(name, csv::trim(row[0]));
      const std::string to_text = csv::trim(row[1]);
      const std::string what = from + "->" + to_text;
      const double rate = checked_rate(name, row[2], options.rates_as_percent, what);
      sheet.codes.push_back(from);
      if (to_text == "*") {
        if (!sheet.domestic.emplace(from, rate).second) {
          throw InputError(name + ": duplicate domestic rate for " + from);
        }
        continue;
      }
      const std::string to = checked_code(name, to_text);
      sheet.codes.push_back(to);
      if (from == to) {
        report.drop("diagonal entry");
        continue;
      }
      if (!sheet.rates.emplace(std::make_pair(from, to), rate).second) {
        throw InputError(name + ": duplicate pair " + from + "->" + to);
      }
    }
    return complete(std::move(sheet), options, std::move(report));
  }

  const bool square = header.size() >= 2 &&
                      (header[0].empty() || lower(header[0]) == "from" ||
                       lower(header[0]) == "from\\to" || lower(header[0]) == "jurisdiction");
  if (!square) throw InputError(name + ": unknown tax matrix format");

  std::vector<std::string> columns;  // "*" or alpha-3
  for (std::size_t c = 1; c < header.size(); ++c) {
    columns.push_back(header[c] == "*" ? std::string("*") : checked_code(name, header[c]));
    if (columns.back() != "*") sheet.codes.push_back(columns.back());
  }
  while (reader.next(row)) {
    ++report.rows_read;
    const std::string from = checked_code(name, csv::trim(row.empty() ? "" : row[0]));
    sheet.codes.push_back(from);
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const std::string cell = c + 1 < row.size() ? csv::trim(row[c + 1]) : std::string();
      if (cell.empty()) continue;
      const std::string what = from + "->" + columns[c];
      const double rate = checked_rate(name, cell, options.rates_as_percent, what);
      if (columns[c] == "*") {
        sheet.domestic[from] = rate;
      } else if (columns[c] != from) {
        if (!sheet.rates.emplace(std::make_pair(from, columns[c]), rate).second) {
          throw InputError(name + ": duplicate pair " + what);
        }
      }
    }
  }
  return complete(std::move(sheet), options, std::move(report));
}

TaxInput parse_tax_matrix(const std::filesystem::path& path, const TaxParseOptions& options) {
  auto in = csv::open_input(path);
  return parse_tax_matrix(in, options, path.string());
}

GdpTable parse_gdp(std::istream& in, const std::string& name) {
  csv::Reader reader(in);
  expect_header(reader, name, {"jurisdiction", "gdp"});
  GdpTable table;
  std::vector<std::string> row;
  while (reader.next(row)) {
    const std::string line = std::to_string(reader.line_number());
    const std::string code = checked_code(name, field(row, 0));
    auto value = csv::parse_double(field(row, 1));
    if (!value) throw InputError(name + ": unparseable GDP at line " + line);
    if (!(*value > 0.0)) throw InputError(name + ": non-positive GDP for " + code);
    if (!table.emplace(code, *value).second) {
      throw InputError(name + ": duplicate jurisdiction " + code);
    }
  }
  return table;
}

GdpTable parse_gdp(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  return parse_gdp(in, path.string());
}

void write_firms_csv(std::ostream& out, const std::vector<Firm>& firms) {
  out << "firm_id,jurisdiction,sector,operating_income\n";
  for (const auto& f : firms) {
    out << f.id << ',' << f.jurisdiction << ',' << f.sector << ','
        << csv::format_double(f.operating_income) << '\n';
  }
}

void write_ownership_csv(std::ostream& out, const std::vector<OwnershipLink>& links) {
  out << "shareholder_id,owned_id,ratio\n";
  for (const auto& l : links) {
    out << l.shareholder << ',' << l.owned << ',' << csv::format_double(l.ratio) << '\n';
  }
}

void write_tax_csv(std::ostream& out, const TaxNetwork& tax) {
  out << "from,to,rate\n";
  for (JurisdictionIndex i = 0; i < tax.size(); ++i) {
    for (JurisdictionIndex j = 0; j < tax.size(); ++j) {
      if (i == j) continue;
      out << tax.code(i) << ',' << tax.code(j) << ',' << csv::format_double(tax.rate(i, j))
          << '\n';
    }
  }
}

void write_gdp_csv(std::ostream& out, const GdpTable& gdp) {
  out << "jurisdiction,gdp\n";
  for (const auto& [code, value] : gdp) out << code << ',' << csv::format_double(value) << '\n';
}

}  // namespace taxnet
