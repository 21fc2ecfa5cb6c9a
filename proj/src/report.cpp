#include "taxnet/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <map>

#include "taxnet/csv.hpp"
#include "taxnet/errors.hpp"

namespace taxnet::report {

namespace {

constexpr const char* kSinkHeader = "jurisdiction,sector,S";
constexpr const char* kConduitHeader = "jurisdiction,sector,c_out_raw,c_in_raw,C_out,C_in,C";
constexpr const char* kLoadHeader = "jurisdiction,l_raw,L";
constexpr const char* kMultilayerHeader = "jurisdiction,sector,M_out,M_in,M";

std::string optional_field(const std::optional<double>& v) {
  return v ? csv::format_double(*v) : std::string();
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  return out;
}

// Reads a table with a fixed header and a fixed number of columns.
class TableReader {
 public:
  TableReader(std::istream& in, std::string name, const char* header)
      : reader_(in), name_(std::move(name)) {
    std::vector<std::string> fields;
    if (!reader_.next(fields)) throw InputError(name_ + ": empty file, expected header " + header);
    for (auto& f : fields) f = csv::trim(f);
    if (join(fields) != header) {
      throw InputError(name_ + ": malformed header, expected " + std::string(header));
    }
    columns_ = fields.size();
  }

  bool next(std::vector<std::string>& fields) {
    if (!reader_.next(fields)) return false;
    if (fields.size() != columns_) {
      fail("expected " + std::to_string(columns_) + " fields, got " +
           std::to_string(fields.size()));
    }
    for (auto& f : fields) f = csv::trim(f);
    return true;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw InputError(name_ + ":" + std::to_string(reader_.line_number()) + ": " + what);
  }

  std::string code(const std::string& field) const {
    auto c = normalize_jurisdiction_code(field);
    if (!c) fail("invalid jurisdiction '" + field + "'");
    return *c;
  }
  char sector(const std::string& field) const {
    auto s = normalize_sector(field);
    if (!s) fail("invalid sector '" + field + "'");
    return *s;
  }
  double number(const std::string& field) const {
    auto x = csv::parse_double(field);
    if (!x) fail("unparseable number '" + field + "'");
    return *x;
  }
  std::optional<double> maybe(const std::string& field) const {
    if (field.empty()) return std::nullopt;
    return number(field);
  }

 private:
  csv::Reader reader_;
  std::string name_;
  std::size_t columns_ = 0;
};

template <class T>
void sort_by_pair(std::vector<T>& rows) {
  std::sort(rows.begin(), rows.end(), [](const T& a, const T& b) { return a.pair < b.pair; });
}

template <class F>
auto read_file(const std::filesystem::path& path, F&& read) {
  auto in = csv::open_input(path);
  return read(in, path.string());
}

}  // namespace

void write_sink_scores(std::ostream& out, std::span<const SinkScore> scores) {
  std::vector<SinkScore> rows(scores.begin(), scores.end());
  sort_by_pair(rows);
  out << kSinkHeader << '\n';
  for (const auto& s : rows) {
    out << s.pair.jurisdiction << ',' << s.pair.sector << ',' << csv::format_double(s.s) << '\n';
  }
}

std::vector<SinkScore> read_sink_scores(std::istream& in, const std::string& name) {
  TableReader t(in, name, kSinkHeader);
  std::vector<SinkScore> rows;
  std::vector<std::string> f;
  while (t.next(f)) rows.push_back({{t.code(f[0]), t.sector(f[1])}, t.number(f[2])});
  return rows;
}

std::vector<SinkScore> read_sink_scores(const std::filesystem::path& path) {
  return read_file(path, [](std::istream& in, const std::string& n) {
    return read_sink_scores(in, n);
  });
}

void write_conduit_scores(std::ostream& out, std::span<const ConduitScore> scores) {
  std::vector<ConduitScore> rows(scores.begin(), scores.end());
  sort_by_pair(rows);
  out << kConduitHeader << '\n';
  for (const auto& c : rows) {
    out << c.pair.jurisdiction << ',' << c.pair.sector << ',' << csv::format_double(c.c_out_raw)
        << ',' << csv::format_double(c.c_in_raw) << ',' << optional_field(c.c_out_std) << ','
        << optional_field(c.c_in_std) << ',' << optional_field(c.c_combined) << '\n';
  }
}

std::vector<ConduitScore> read_conduit_scores(std::istream& in, const std::string& name) {
  TableReader t(in, name, kConduitHeader);
  std::vector<ConduitScore> rows;
  std::vector<std::string> f;
  while (t.next(f)) {
    ConduitScore c;
    c.pair = {t.code(f[0]), t.sector(f[1])};
    c.c_out_raw = t.maybe(f[2]).value_or(0.0);
    c.c_in_raw = t.maybe(f[3]).value_or(0.0);
    c.c_out_std = t.maybe(f[4]);
    c.c_in_std = t.maybe(f[5]);
    c.c_combined = t.maybe(f[6]);
    rows.push_back(c);
  }
  return rows;
}

std::vector<ConduitScore> read_conduit_scores(const std::filesystem::path& path) {
  return read_file(path, [](std::istream& in, const std::string& n) {
    return read_conduit_scores(in, n);
  });
}

void write_load_scores(std::ostream& out, std::span<const LoadRow> rows) {
  std::vector<LoadRow> sorted(rows.begin(), rows.end());
  std::sort(sorted.begin(), sorted.end(), [](const LoadRow& a, const LoadRow& b) {
    return a.jurisdiction < b.jurisdiction;
  });
  out << kLoadHeader << '\n';
  for (const auto& r : sorted) {
    out << r.jurisdiction << ',' << optional_field(r.l_raw) << ',' << csv::format_double(r.l_std)
        << '\n';
  }
}

std::vector<LoadRow> read_load_scores(std::istream& in, const std::string& name) {
  TableReader t(in, name, kLoadHeader);
  std::vector<LoadRow> rows;
  std::vector<std::string> f;
  while (t.next(f)) rows.push_back({t.code(f[0]), t.maybe(f[1]), t.number(f[2])});
  return rows;
}

std::vector<LoadRow> read_load_scores(const std::filesystem::path& path) {
  return read_file(path, [](std::istream& in, const std::string& n) {
    return read_load_scores(in, n);
  });
}

std::vector<LoadRow> load_rows(const TaxNetwork& tax, const LoadResult& result,
                               std::span<const double> standardized) {
  std::vector<LoadRow> rows;
  for (JurisdictionIndex j = 0; j < tax.size(); ++j) {
    rows.push_back({tax.code(j), result.load[j], standardized[j]});
  }
  return rows;
}

std::map<std::string, double> standardized_load_map(std::span<const LoadRow> rows) {
  std::map<std::string, double> out;
  for (const auto& r : rows) {
    if (!out.emplace(r.jurisdiction, r.l_std).second) {
      throw InputError("load table lists " + r.jurisdiction + " twice");
    }
  }
  return out;
}

std::string multilayer_file_name(double beta) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, beta);
  return "multilayer_scores_beta" + std::string(buf, end) + ".csv";
}

void write_multilayer_scores(std::ostream& out, const MultilayerTable& table) {
  std::vector<MultilayerScore> rows = table.scores;
  sort_by_pair(rows);
  out << kMultilayerHeader << '\n';
  for (const auto& m : rows) {
    out << m.pair.jurisdiction << ',' << m.pair.sector << ',' << csv::format_double(m.m_out) << ','
        << csv::format_double(m.m_in) << ',' << csv::format_double(m.m) << '\n';
  }
}

std::vector<MultilayerScore> read_multilayer_scores(std::istream& in, const std::string& name) {
  TableReader t(in, name, kMultilayerHeader);
  std::vector<MultilayerScore> rows;
  std::vector<std::string> f;
  while (t.next(f)) {
    MultilayerScore m;
    m.pair = {t.code(f[0]), t.sector(f[1])};
    m.m_out = t.number(f[2]);
    m.m_in = t.number(f[3]);
    m.m = t.number(f[4]);
    rows.push_back(m);
  }
  return rows;
}

std::vector<MultilayerScore> read_multilayer_scores(const std::filesystem::path& path) {
  return read_file(path, [](std::istream& in, const std::string& n) {
    return read_multilayer_scores(in, n);
  });
}

void write_beta_sweep(std::ostream& out, const SweepReport& sweep) {
  out << "beta,threshold,count\n";
  for (const auto& e : sweep.entries) {
    for (const auto& [threshold, count] : e.counts) {
      out << csv::format_double(e.table.beta) << ',' << csv::format_double(threshold) << ','
          << count << '\n';
    }
  }
}

void write_value_flow(std::ostream& out, const MultilayerNetwork& network,
                      const OwnershipView& view, const ValueFlowResult& flow) {
  std::vector<std::pair<std::string, NodeIndex>> labels;
  labels.reserve(view.node_count());
  for (NodeIndex n = 0; n < view.node_count(); ++n) labels.emplace_back(view.label(network, n), n);
  std::sort(labels.begin(), labels.end());
  out << "firm_id,in_value,out_value\n";
  for (const auto& [label, n] : labels) {
    out << label << ',' << csv::format_double(flow.in_value[n]) << ','
        << csv::format_double(flow.out_value[n]) << '\n';
  }
}

std::vector<Bin> histogram(std::span<const double> values, double width) {
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw InputError("histogram bin width must be positive");
  }
  std::map<long long, std::size_t> counts;
  for (double x : values) {
    if (!std::isfinite(x)) throw InputError("histogram input holds a non-finite value");
    auto k = static_cast<long long>(std::floor(x / width));
    // Division rounding can land a value one bin off near an edge.
    if (x < static_cast<double>(k) * width) --k;
    if (x >= static_cast<double>(k + 1) * width) ++k;
    ++counts[k];
  }
  std::vector<Bin> bins;
  if (counts.empty()) return bins;
  const long long lo = counts.begin()->first;
  const long long hi = counts.rbegin()->first;
  for (long long k = lo; k <= hi; ++k) {
    auto it = counts.find(k);
    bins.push_back({static_cast<double>(k) * width, static_cast<double>(k + 1) * width,
                    it == counts.end() ? 0 : it->second});
  }
  return bins;
}

void write_histogram(std::ostream& out, std::span<const Bin> bins) {
  out << "bin_low,bin_high,count\n";
  for (const auto& b : bins) {
    out << csv::format_double(b.low) << ',' << csv::format_double(b.high) << ',' << b.count
        << '\n';
  }
}

ColumnValues read_column(std::istream& in, const std::string& name, const std::string& column) {
  csv::Reader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) throw InputError(name + ": empty file, expected a header row");
  for (auto& f : fields) f = csv::trim(f);
  std::size_t index = fields.size() - 1;
  if (!column.empty()) {
    auto it = std::find(fields.begin(), fields.end(), column);
    if (it == fields.end()) throw InputError(name + ": no column named " + column);
    index = static_cast<std::size_t>(it - fields.begin());
  }
  ColumnValues out;
  out.column = fields[index];
  const std::size_t width = fields.size();
  while (reader.next(fields)) {
    const std::string where = name + ":" + std::to_string(reader.line_number());
    if (fields.size() != width) throw InputError(where + ": wrong number of fields");
    const std::string f = csv::trim(fields[index]);
    if (f.empty()) {
      ++out.empty;
      continue;
    }
    auto x = csv::parse_double(f);
    if (!x) throw InputError(where + ": unparseable number '" + f + "'");
    out.values.push_back(*x);
  }
  return out;
}

ColumnValues read_column(const std::filesystem::path& path, const std::string& column) {
  auto in = csv::open_input(path);
  return read_column(in, path.string(), column);
}

std::vector<std::pair<std::string, double>> cartogram(std::span<const MultilayerScore> scores,
                                                      char sector) {
  std::vector<std::pair<std::string, double>> rows;
  for (const auto& s : scores) {
    if (s.pair.sector == sector) rows.emplace_back(s.pair.jurisdiction, s.m);
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

void write_cartogram(std::ostream& out, std::span<const std::pair<std::string, double>> rows) {
  out << "jurisdiction,M\n";
  for (const auto& [code, m] : rows) out << code << ',' << csv::format_double(m) << '\n';
}

void print_multilayer_table(std::ostream& out, const MultilayerTable& table, double threshold) {
  out << "beta=" << csv::format_fixed2(table.beta) << " pairs with M above "
      << csv::format_fixed2(threshold) << ":\n";
  out << "  jurisdiction  sector  M_out    M_in     M\n";
  std::size_t shown = 0;
  for (const auto& s : table.scores) {
    if (!(s.m > threshold)) continue;
    char line[128];
    std::snprintf(line, sizeof line, "  %-12s  %-6c  %-7s  %-7s  %s\n", s.pair.jurisdiction.c_str(),
                  s.pair.sector, csv::format_fixed2(s.m_out).c_str(),
                  csv::format_fixed2(s.m_in).c_str(), csv::format_fixed2(s.m).c_str());
    out << line;
    ++shown;
  }
  if (shown == 0) out << "  (none)\n";
}

}  // namespace taxnet::report
