#include "taxnet/multilayer.hpp"

#include <algorithm>
#include <cmath>

#include "taxnet/errors.hpp"

namespace taxnet {

double multilayer_component(double c_std, double l_std, double alpha, double beta,
                            bool* clamped) {
  if (!(alpha > 0.0) || !(beta >= 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    throw InputError("multilayer weights need alpha > 0 and beta >= 0");
  }
  const bool low = c_std < kMultilayerFloor || l_std < kMultilayerFloor;
  if (clamped != nullptr) *clamped = low;
  const double c = std::max(c_std, kMultilayerFloor);
  const double l = std::max(l_std, kMultilayerFloor);
  if (beta == 0.0) return c;
  return std::exp((alpha * std::log(c) + beta * std::log(l)) / (alpha + beta));
}

std::optional<MultilayerScore> multilayer_score(const ConduitScore& conduit, double load_std,
                                                double alpha, double beta) {
  if (!conduit.c_out_std || !conduit.c_in_std) return std::nullopt;
  MultilayerScore s;
  s.pair = conduit.pair;
  s.alpha = alpha;
  s.beta = beta;
  bool clamped_out = false;
  bool clamped_in = false;
  s.m_out = multilayer_component(*conduit.c_out_std, load_std, alpha, beta, &clamped_out);
  s.m_in = multilayer_component(*conduit.c_in_std, load_std, alpha, beta, &clamped_in);
  s.m = combine_euclidean(s.m_in, s.m_out);
  s.clamped = clamped_out || clamped_in;
  return s;
}

MultilayerTable multilayer_scores(std::span<const ConduitScore> conduits,
                                  const std::map<std::string, double>& load_std, double alpha,
                                  double beta) {
  MultilayerTable table;
  table.alpha = alpha;
  table.beta = beta;
  for (const auto& c : conduits) {
    auto load = load_std.find(c.pair.jurisdiction);
    if (load == load_std.end()) {
      ++table.excluded_no_load;
      continue;
    }
    auto s = multilayer_score(c, load->second, alpha, beta);
    if (!s) {
      ++table.excluded_incomplete;
      continue;
    }
    if (s->clamped) ++table.clamped_pairs;
    table.scores.push_back(*s);
  }
  std::sort(table.scores.begin(), table.scores.end(),
            [](const MultilayerScore& a, const MultilayerScore& b) {
              return a.m != b.m ? a.m > b.m : a.pair < b.pair;
            });
  return table;
}

SweepReport beta_sweep(std::span<const ConduitScore> conduits,
                       const std::map<std::string, double>& load_std, double alpha,
                       std::span<const double> betas, double report_threshold) {
  if (betas.empty()) throw InputError("beta sweep needs at least one beta");
  std::vector<double> thresholds = {1.0, 1.5, 2.0, report_threshold};
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  SweepReport report;
  report.alpha = alpha;
  report.report_threshold = report_threshold;
  for (double beta : betas) {
    SweepEntry entry;
    entry.table = multilayer_scores(conduits, load_std, alpha, beta);
    for (double t : thresholds) {
      const auto count = static_cast<std::size_t>(
          std::count_if(entry.table.scores.begin(), entry.table.scores.end(),
                        [t](const MultilayerScore& s) { return s.m > t; }));
      entry.counts.emplace_back(t, count);
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace taxnet
