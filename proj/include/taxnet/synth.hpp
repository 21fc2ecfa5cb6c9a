#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "taxnet/ingest.hpp"
#include "taxnet/network_model.hpp"

namespace taxnet {

// Draws from std::mt19937_64 with fixed transforms. The standard library
// distributions are implementation-defined, so they are not used.
class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }
  // [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // [0, n) by rejection, no modulo bias. n must be positive.
  std::uint64_t below(std::uint64_t n);
  bool chance(double p) { return uniform() < p; }
  // Box-Muller; one value per call.
  double normal();

 private:
  std::mt19937_64 engine_;
};

struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t jurisdictions = 20;
  std::size_t sectors = 21;  // the first n section letters
  std::size_t firms = 200;
  double links_per_firm = 1.5;
  // Chain level of a background firm: level d+1 follows d with this
  // probability, up to max_depth.
  double depth_continuation = 0.45;
  int max_depth = 5;
  double income_log_mean = 13.8;
  double income_log_sd = 1.5;
  // nullopt plants one sink and one conduit in the last two jurisdictions,
  // sector K (or the last generated sector).
  std::optional<std::vector<PairKey>> planted_sinks;
  std::optional<std::vector<PairKey>> planted_conduits;
  // Share of unowned background firms placed under outward conduit firms.
  double planted_strength = 0.8;
  // Share of unowned background firms held directly by sink firms.
  double bypass_share = 0.1;
  std::vector<std::string> zero_tax_clique;
  // Used when zero_tax_clique is empty: the first n generated codes.
  std::size_t zero_tax_clique_size = 0;
};

struct SynthData {
  std::vector<Firm> firms;
  std::vector<OwnershipLink> links;
  TaxNetwork tax;
  GdpTable gdp;
  std::vector<PairKey> planted_sinks;
  std::vector<PairKey> planted_conduits;
  std::vector<std::string> zero_tax_clique;
};

// Applies one key=value setting; throws InputError on an unknown key or bad
// value. Pair lists are comma-separated CODE:SECTOR items, or "none".
void apply_synth_setting(SynthConfig& config, const std::string& key, const std::string& value);

// Flat key=value file; '#' starts a comment.
SynthConfig parse_synth_config(std::istream& in, const std::string& name = "synth config");
SynthConfig parse_synth_config(const std::filesystem::path& path);

// Throws InputError for an infeasible configuration.
SynthData generate_synthetic(const SynthConfig& config);

// Writes firms.csv, ownership.csv, tax.csv and gdp.csv into `dir`.
void write_synthetic(const SynthData& data, const std::filesystem::path& dir);

}  // namespace taxnet
