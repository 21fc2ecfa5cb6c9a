#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "taxnet/network_model.hpp"

namespace taxnet::test {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string pattern = (std::filesystem::temp_directory_path() / "taxnet-XXXXXX").string();
    if (!mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Every ordered pair at the same rate.
inline TaxNetwork uniform_tax(const std::vector<std::string>& codes, double rate) {
  const std::size_t n = codes.size();
  std::vector<double> rates(n * n, rate);
  for (std::size_t i = 0; i < n; ++i) rates[i * n + i] = 0.0;
  return TaxNetwork(codes, std::move(rates));
}

inline std::map<std::string, double> unit_gdp(const std::vector<std::string>& codes) {
  std::map<std::string, double> gdp;
  for (const auto& c : codes) gdp[c] = 1.0;
  return gdp;
}

inline Firm firm(std::string id, std::string jurisdiction, char sector, double income) {
  return Firm{std::move(id), std::move(jurisdiction), sector, income};
}

inline OwnershipLink link(std::string shareholder, std::string owned, double ratio) {
  return OwnershipLink{std::move(shareholder), std::move(owned), ratio};
}

}  // namespace taxnet::test
