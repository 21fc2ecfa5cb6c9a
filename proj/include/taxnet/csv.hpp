#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace taxnet::csv {

// Splits one line of comma-separated values. Double-quoted fields may contain
// commas and doubled quotes; fields are otherwise taken verbatim.
std::vector<std::string> split_line(std::string_view line);

// Whitespace-trimmed copy.
std::string trim(std::string_view s);

// Strict parse of the whole (trimmed) field; nullopt on empty or trailing junk.
std::optional<double> parse_double(std::string_view field);

// 17 significant digits, enough for an exact round trip through parse_double.
std::string format_double(double value);

// Two decimals, for human-facing tables.
std::string format_fixed2(double value);

// Line-oriented reader that skips blank lines and strips a UTF-8 BOM and
// trailing CR.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  bool next(std::vector<std::string>& fields);
  std::size_t line_number() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

// Opens `path` for reading; throws InputError naming the file on failure.
std::ifstream open_input(const std::filesystem::path& path);
// Opens `path` for writing (binary, so output is byte-stable); throws
// InputError naming the file on failure.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace taxnet::csv
