#include "taxnet/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <functional>
#include <sstream>

#include "taxnet/csv.hpp"
#include "taxnet/errors.hpp"
#include "taxnet/manifest.hpp"
#include "taxnet/pipeline.hpp"
#include "taxnet/report.hpp"
#include "taxnet/synth.hpp"

#ifndef TAXNET_VERSION
#define TAXNET_VERSION "0.0.0"
#endif

namespace taxnet::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct InputOptions {
  std::string dir = ".";
  std::string firms, ownership, tax, gdp;

  InputPaths paths() const {
    InputPaths p = InputPaths::in_directory(dir);
    if (!firms.empty()) p.firms = firms;
    if (!ownership.empty()) p.ownership = ownership;
    if (!tax.empty()) p.tax = tax;
    if (!gdp.empty()) p.gdp = gdp;
    return p;
  }
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::string stage = "arguments";
};

void add_input_options(CLI::App* sub, InputOptions& in, AnalysisParams& params) {
  sub->add_option("--input", in.dir, "Directory holding firms.csv, ownership.csv, tax.csv, gdp.csv")
      ->capture_default_str();
  sub->add_option("--firms", in.firms, "Override the firms file");
  sub->add_option("--ownership", in.ownership, "Override the ownership file");
  sub->add_option("--tax", in.tax, "Override the tax matrix file");
  sub->add_option("--gdp", in.gdp, "Override the GDP file");
  sub->add_flag("--ratios-as-percent", params.ratios_as_percent,
                "Ownership ratios are percentages (0-100)");
  sub->add_flag("--tax-rates-as-percent", params.tax_rates_as_percent,
                "Withholding rates are percentages (0-100)");
  sub->add_option("--default-rate", params.default_rate,
                  "Rate for tax pairs absent from the matrix when the origin has no domestic rate")
      ->capture_default_str();
  sub->add_flag("--exclude-negative-income", params.exclude_negative_income,
                "Drop firms reporting negative operating income");
}

void add_flow_options(CLI::App* sub, AnalysisParams& params, std::string& total_mode) {
  sub->add_flag("--inject-all", params.inject_all,
                "Inject every firm's income, not only chain-end firms'");
  sub->add_option("--total-value", total_mode, "V_total: sum of received value or of injections")
      ->check(CLI::IsMember({"received", "injected"}))
      ->capture_default_str();
}

void add_threads(CLI::App* sub, AnalysisParams& params) {
  sub->add_option("--threads", params.threads, "Worker threads (0 = all cores)")
      ->capture_default_str();
}

void add_load_options(CLI::App* sub, AnalysisParams& params, std::string& routing) {
  sub->add_option("--routing-cost", routing, "Edge cost model for tax routing")
      ->check(CLI::IsMember({"additive", "multiplicative"}))
      ->capture_default_str();
  sub->add_option("--max-hops", params.max_hops, "Longest route considered, in hops")
      ->capture_default_str();
}

void add_multilayer_options(CLI::App* sub, AnalysisParams& params) {
  sub->add_option("--alpha", params.alpha, "Weight of the conduit score")->capture_default_str();
  sub->add_option("--beta", params.betas, "Weight of the load score; repeatable")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->capture_default_str();
  sub->add_option("--report-threshold", params.report_threshold,
                  "M above which a pair is reported")
      ->capture_default_str();
}

void finish_params(AnalysisParams& params, const std::string& routing,
                   const std::string& total_mode) {
  params.routing = routing == "multiplicative" ? RoutingCost::multiplicative : RoutingCost::additive;
  params.total_mode =
      total_mode == "injected" ? TotalValueMode::injected : TotalValueMode::received;
  if (params.max_hops < 1 || params.max_hops > kMaxLoadHops) {
    throw InputError("--max-hops must lie between 1 and " + std::to_string(kMaxLoadHops));
  }
  if (!(params.default_rate >= 0.0 && params.default_rate <= 1.0)) {
    throw InputError("--default-rate must lie in [0, 1]");
  }
  if (params.betas.empty()) throw InputError("at least one --beta is needed");
  for (double b : params.betas) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw InputError("--beta values must be >= 0");
  }
  if (!(params.alpha > 0.0) || !std::isfinite(params.alpha)) {
    throw InputError("--alpha must be positive");
  }
}

fs::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create directory " + dir + ": " + ec.message());
  return dir;
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  auto out = csv::open_output(path);
  body(out);
  out.close();
  if (!out) throw InputError("cannot write " + path.string());
}

// Writes to a file, or to `fallback` when the path is "-".
void write_target(const std::string& path, std::ostream& fallback,
                  const std::function<void(std::ostream&)>& body) {
  if (path == "-") {
    body(fallback);
  } else {
    write_file(path, body);
  }
}

json ingest_json(const IngestReport& r) {
  json dropped = json::object();
  for (const auto& [reason, count] : r.dropped) dropped[reason] = count;
  return {{"file", r.file},
          {"rows_read", r.rows_read},
          {"rows_dropped", r.rows_dropped()},
          {"dropped", dropped},
          {"warnings", r.warnings}};
}

json params_json(const AnalysisParams& p) {
  return {{"alpha", p.alpha},
          {"betas", p.betas},
          {"sink_threshold", p.sink_threshold},
          {"report_threshold", p.report_threshold},
          {"routing_cost", to_string(p.routing)},
          {"max_hops", p.max_hops},
          {"seed", p.seed ? json(*p.seed) : json(nullptr)},
          {"inject_all", p.inject_all},
          {"total_value", to_string(p.total_mode)},
          {"ratios_as_percent", p.ratios_as_percent},
          {"tax_rates_as_percent", p.tax_rates_as_percent},
          {"default_rate", p.default_rate},
          {"exclude_negative_income", p.exclude_negative_income}};
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void print_warnings(Context& ctx, const IngestReport& r) {
  for (const auto& w : r.warnings) ctx.err << "warning: " << r.file << ": " << w << '\n';
  for (const auto& [reason, count] : r.dropped) {
    ctx.err << "warning: " << r.file << ": dropped " << count << " row(s): " << reason << '\n';
  }
}

std::set<PairKey> sinks_from(std::span<const SinkScore> scores, const AnalysisParams& params) {
  return identify_sinks(scores, params.sink_threshold);
}

std::vector<ConduitScore> compute_conduits(const MultilayerNetwork& network,
                                           const OwnershipAnalysis& a,
                                           const std::set<PairKey>& sinks) {
  return conduit_scores(network, a.condensed.view, a.flow, sinks);
}

SweepReport sweep_of(std::span<const ConduitScore> conduits,
                     std::span<const report::LoadRow> load, const AnalysisParams& params) {
  return beta_sweep(conduits, report::standardized_load_map(load), params.alpha, params.betas,
                    params.report_threshold);
}

void write_multilayer_outputs(const fs::path& dir, const SweepReport& sweep,
                              std::vector<std::string>* written) {
  for (const auto& e : sweep.entries) {
    const std::string name = report::multilayer_file_name(e.table.beta);
    write_file(dir / name, [&](std::ostream& o) { report::write_multilayer_scores(o, e.table); });
    if (written) written->push_back(name);
  }
  write_file(dir / "beta_sweep.csv", [&](std::ostream& o) { report::write_beta_sweep(o, sweep); });
  if (written) written->push_back("beta_sweep.csv");
}

void print_sweep(std::ostream& out, const SweepReport& sweep) {
  for (const auto& e : sweep.entries) {
    report::print_multilayer_table(out, e.table, sweep.report_threshold);
    out << "  counts:";
    for (const auto& [t, c] : e.counts) out << " >" << csv::format_fixed2(t) << ": " << c;
    out << "  (scored " << e.table.scores.size() << ", incomplete "
        << e.table.excluded_incomplete << ", no load " << e.table.excluded_no_load
        << ", clamped " << e.table.clamped_pairs << ")\n";
  }
}

struct Loaded {
  LoadedInputs inputs;
  MultilayerNetwork network;
};

Loaded ingest_and_build(Context& ctx, const InputOptions& in, const AnalysisParams& params) {
  ctx.stage = "ingest";
  LoadedInputs inputs = load_inputs(in.paths(), params);
  print_warnings(ctx, inputs.firms.report);
  print_warnings(ctx, inputs.ownership.report);
  print_warnings(ctx, inputs.tax.report);
  ctx.stage = "build";
  MultilayerNetwork network = build_from_inputs(inputs, params);
  for (const auto& w : network.report().warnings) ctx.err << "warning: " << w << '\n';
  if (network.report().links_dropped > 0) {
    ctx.err << "warning: dropped " << network.report().links_dropped
            << " link(s) naming unknown firms\n";
  }
  return {std::move(inputs), std::move(network)};
}

int cmd_run(Context& ctx, const InputOptions& in, const AnalysisParams& params,
            const std::string& out_dir, bool timestamp) {
  auto [inputs, network] = ingest_and_build(ctx, in, params);

  ctx.stage = "value-flow";
  OwnershipAnalysis own = analyze_ownership(network, params);
  ctx.stage = "sink";
  const auto sinks = sinks_from(own.sink_scores, params);
  ctx.stage = "conduit";
  const auto conduits = compute_conduits(network, own, sinks);
  ctx.stage = "load";
  const LoadAnalysis load = analyze_load(network.tax(), params);
  ctx.stage = "multilayer";
  const SweepReport sweep = sweep_of(conduits, load.rows, params);

  ctx.stage = "report";
  const fs::path dir = ensure_dir(out_dir);
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::function<void(std::ostream&)>& body) {
    write_file(dir / name, body);
    written.push_back(name);
  };
  emit("sink_scores.csv", [&](std::ostream& o) { report::write_sink_scores(o, own.sink_scores); });
  emit("value_flow.csv", [&](std::ostream& o) {
    report::write_value_flow(o, network, own.condensed.view, own.flow);
  });
  emit("conduit_scores.csv", [&](std::ostream& o) { report::write_conduit_scores(o, conduits); });
  emit("load_scores.csv", [&](std::ostream& o) { report::write_load_scores(o, load.rows); });
  write_multilayer_outputs(dir, sweep, &written);

  const InputPaths paths = in.paths();
  json manifest_inputs = json::array();
  json digest_inputs = json::array();
  const std::pair<const char*, const fs::path*> roles[] = {
      {"firms", &paths.firms}, {"ownership", &paths.ownership}, {"tax", &paths.tax},
      {"gdp", &paths.gdp}};
  for (const auto& [role, path] : roles) {
    const std::string sha = file_sha256(*path);
    manifest_inputs.push_back({{"role", role}, {"path", path->string()}, {"sha256", sha}});
    digest_inputs.push_back({{"role", role}, {"sha256", sha}});
  }
  const json params_j = params_json(params);
  const std::string run_digest = sha256_hex(
      json{{"tool_version", TAXNET_VERSION}, {"inputs", digest_inputs}, {"params", params_j}}
          .dump());

  std::size_t outward = 0, inward = 0, combined = 0;
  for (const auto& c : conduits) {
    outward += c.c_out_std ? 1 : 0;
    inward += c.c_in_std ? 1 : 0;
    combined += c.c_combined ? 1 : 0;
  }
  json sink_list = json::array();
  for (const auto& s : sinks) sink_list.push_back(to_string(s));
  json multilayer = json::array();
  for (const auto& e : sweep.entries) {
    json counts = json::array();
    for (const auto& [t, c] : e.counts) counts.push_back({{"threshold", t}, {"count", c}});
    multilayer.push_back({{"beta", e.table.beta},
                          {"scored_pairs", e.table.scores.size()},
                          {"excluded_incomplete", e.table.excluded_incomplete},
                          {"excluded_no_load", e.table.excluded_no_load},
                          {"clamped_pairs", e.table.clamped_pairs},
                          {"counts", counts}});
  }
  const auto& build = network.report();
  const json diagnostics = {
      {"run_digest", run_digest},
      {"ingest",
       {ingest_json(inputs.firms.report), ingest_json(inputs.ownership.report),
        ingest_json(inputs.tax.report)}},
      {"build",
       {{"firms", network.firm_count()},
        {"links", network.link_count()},
        {"links_dropped", build.links_dropped},
        {"firms_excluded_negative_income", build.firms_excluded_negative_income},
        {"warnings", build.warnings}}},
      {"cycles", own.condensed.report.components},
      {"value_flow",
       {{"nodes", own.condensed.view.node_count()},
        {"sources", find_sources(own.condensed.view).size()},
        {"v_total", own.flow.v_total}}},
      {"sinks", sink_list},
      {"conduit",
       {{"pairs", conduits.size()},
        {"outward_scored", outward},
        {"inward_scored", inward},
        {"combined_scored", combined}}},
      {"load",
       {{"jurisdictions", network.tax().size()},
        {"unreachable_packets", load.result.unreachable_packets},
        {"minimal_routes", load.result.routes}}},
      {"multilayer", multilayer}};
  emit("diagnostics.json", [&](std::ostream& o) { o << diagnostics.dump(2) << '\n'; });

  json outputs = json::array();
  for (const auto& name : written) {
    outputs.push_back({{"file", name}, {"sha256", file_sha256(dir / name)}});
  }
  json manifest = {{"tool_version", TAXNET_VERSION},
                   {"run_digest", run_digest},
                   {"inputs", manifest_inputs},
                   {"params", params_j},
                   {"outputs", outputs}};
  if (timestamp) manifest["created"] = utc_now();
  write_file(dir / "manifest.json", [&](std::ostream& o) { o << manifest.dump(2) << '\n'; });

  ctx.out << "firms " << network.firm_count() << ", links " << network.link_count()
          << ", collapsed cycles " << own.condensed.report.components.size() << '\n';
  ctx.out << "sinks (S > " << csv::format_fixed2(params.sink_threshold) << "): " << sinks.size()
          << '\n';
  ctx.out << "conduit pairs " << conduits.size() << ", with C " << combined << '\n';
  ctx.out << "unreachable packets " << load.result.unreachable_packets << '\n';
  print_sweep(ctx.out, sweep);
  ctx.out << "wrote " << written.size() + 1 << " files to " << dir.string() << " (run "
          << run_digest.substr(0, 16) << ")\n";
  return kOk;
}

int cmd_synth(Context& ctx, const std::string& config_path,
              const std::vector<std::pair<std::string, std::string>>& settings,
              const std::string& out_dir) {
  ctx.stage = "synth";
  SynthConfig config;
  if (!config_path.empty()) config = parse_synth_config(fs::path(config_path));
  for (const auto& [k, v] : settings) apply_synth_setting(config, k, v);
  const SynthData data = generate_synthetic(config);
  write_synthetic(data, out_dir);
  write_file(fs::path(out_dir) / "planted.csv", [&](std::ostream& o) {
    o << "role,jurisdiction,sector\n";
    for (const auto& k : data.planted_sinks) o << "sink," << k.jurisdiction << ',' << k.sector << '\n';
    for (const auto& k : data.planted_conduits) {
      o << "conduit," << k.jurisdiction << ',' << k.sector << '\n';
    }
  });
  ctx.out << "wrote " << data.firms.size() << " firms, " << data.links.size() << " links, "
          << data.tax.size() << " jurisdictions to " << out_dir << '\n';
  return kOk;
}

int cmd_histogram(Context& ctx, const std::string& scores, const std::string& column,
                  double width, const std::string& output) {
  ctx.stage = "histogram";
  const auto values = report::read_column(fs::path(scores), column);
  if (values.empty > 0) {
    ctx.err << "warning: " << scores << ": skipped " << values.empty << " empty " << values.column
            << " field(s)\n";
  }
  const auto bins = report::histogram(values.values, width);
  write_target(output, ctx.out, [&](std::ostream& o) { report::write_histogram(o, bins); });
  return kOk;
}

int cmd_cartogram(Context& ctx, const std::string& scores, const std::string& sector_code,
                  const std::string& output) {
  ctx.stage = "cartogram-data";
  const auto sector = normalize_sector(sector_code);
  if (!sector) throw InputError("unknown sector '" + sector_code + "' (expected a letter A-U)");
  const auto rows = report::cartogram(report::read_multilayer_scores(fs::path(scores)), *sector);
  if (rows.empty()) {
    ctx.err << "warning: no scored pairs for sector " << *sector << " in " << scores << '\n';
  }
  write_target(output, ctx.out, [&](std::ostream& o) { report::write_cartogram(o, rows); });
  return kOk;
}

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

void report_error(Context& ctx, const char* kind, const std::string& message) {
  ctx.err << "error: kind=" << kind << " stage=" << ctx.stage
          << " message=" << json(one_line(message)).dump() << '\n';
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Context ctx{out, err};
  CLI::App app{"Ownership and withholding-tax network analysis"};
  app.set_version_flag("--version", TAXNET_VERSION);
  app.require_subcommand(1);

  InputOptions in;
  AnalysisParams params;
  std::string routing = "additive";
  std::string total_mode = "received";
  std::string out_dir = "out";
  bool timestamp = false;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "Run the whole pipeline and write every table");
  add_input_options(run, in, params);
  add_flow_options(run, params, total_mode);
  add_load_options(run, params, routing);
  add_multilayer_options(run, params);
  add_threads(run, params);
  run->add_option("--sink-threshold", params.sink_threshold, "S above which a pair is a sink")
      ->capture_default_str();
  run->add_option("--seed", seed, "Recorded in the manifest");
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run->add_flag("--timestamp", timestamp, "Record the creation time in manifest.json");

  auto* sink = app.add_subcommand("compute-sink", "Value flow and sink scores");
  add_input_options(sink, in, params);
  add_flow_options(sink, params, total_mode);
  add_threads(sink, params);
  sink->add_option("--out", out_dir, "Output directory")->capture_default_str();

  std::string sink_scores_path;
  auto* conduit = app.add_subcommand("compute-conduit", "Conduit scores from sink scores");
  add_input_options(conduit, in, params);
  add_flow_options(conduit, params, total_mode);
  add_threads(conduit, params);
  conduit->add_option("--sink-threshold", params.sink_threshold, "S above which a pair is a sink")
      ->capture_default_str();
  conduit->add_option("--sink-scores", sink_scores_path,
                      "sink_scores.csv to read (default: OUT/sink_scores.csv)");
  conduit->add_option("--out", out_dir, "Output directory")->capture_default_str();

  auto* load = app.add_subcommand("compute-load", "Load centrality over the tax layer");
  add_input_options(load, in, params);
  add_load_options(load, params, routing);
  add_threads(load, params);
  load->add_option("--out", out_dir, "Output directory")->capture_default_str();

  std::string conduit_path, load_path;
  auto add_stage_inputs = [&](CLI::App* sub) {
    sub->add_option("--conduit-scores", conduit_path,
                    "conduit_scores.csv to read (default: OUT/conduit_scores.csv)");
    sub->add_option("--load-scores", load_path,
                    "load_scores.csv to read (default: OUT/load_scores.csv)");
    sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
  };
  auto* multi = app.add_subcommand("compute-multilayer", "Multilayer scores per beta");
  add_multilayer_options(multi, params);
  add_stage_inputs(multi);

  auto* sweep = app.add_subcommand("sweep-beta", "Multilayer scores over several betas");
  add_multilayer_options(sweep, params);
  add_stage_inputs(sweep);

  std::string config_path;
  std::vector<std::string> set_items, planted_sinks, planted_conduits;
  std::string clique;
  std::size_t firms = 0, jurisdictions = 0, sectors = 0, clique_size = 0;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic input bundle");
  synth->add_option("--config", config_path, "key=value configuration file");
  synth->add_option("--set", set_items, "Extra key=value setting; repeatable")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  auto* seed_opt = synth->add_option("--seed", seed, "PRNG seed");
  auto* firms_opt = synth->add_option("--firms", firms, "Number of firms");
  auto* juris_opt = synth->add_option("--jurisdictions", jurisdictions, "Number of jurisdictions");
  auto* sectors_opt = synth->add_option("--sectors", sectors, "Number of sectors (1-21)");
  auto* sinks_opt = synth->add_option("--planted-sink", planted_sinks, "CODE:SECTOR; repeatable")
                        ->expected(1)
                        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  auto* conduits_opt =
      synth->add_option("--planted-conduit", planted_conduits, "CODE:SECTOR; repeatable")
          ->expected(1)
          ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  auto* clique_opt =
      synth->add_option("--zero-tax-clique", clique, "Comma-separated codes trading tax-free");
  auto* clique_size_opt = synth->add_option("--zero-tax-clique-size", clique_size,
                                            "Size of the tax-free clique (first codes)");
  synth->add_option("--out", out_dir, "Output directory")->capture_default_str();

  std::string scores_path, column, output = "-", sector_code;
  double width = 0.0;
  auto* hist = app.add_subcommand("histogram", "Bin a score column");
  hist->add_option("--scores", scores_path, "Score table")->required();
  hist->add_option("--column", column, "Column to bin (default: last)");
  hist->add_option("--width", width, "Bin width")->required();
  hist->add_option("--output", output, "Output file, - for stdout")->capture_default_str();

  auto* carto = app.add_subcommand("cartogram-data", "Per-jurisdiction M for one sector");
  carto->add_option("--scores", scores_path, "multilayer_scores_beta<b>.csv")->required();
  carto->add_option("--sector", sector_code, "Sector letter")->required();
  carto->add_option("--output", output, "Output file, - for stdout")->capture_default_str();

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) {
        const auto* target = app.get_subcommands().empty() ? &app : app.get_subcommands()[0];
        if (dynamic_cast<const CLI::CallForVersion*>(&e) != nullptr) {
          out << TAXNET_VERSION << '\n';
        } else {
          out << target->help();
        }
        return kOk;
      }
      throw InputError(e.what());
    }
    if (sweep->parsed() && sweep->get_option("--beta")->count() == 0) {
      params.betas = {0.1, 0.3, 0.5, 0.8};
    }
    finish_params(params, routing, total_mode);
    if (run->parsed() && run->get_option("--seed")->count() > 0) params.seed = seed;

    if (run->parsed()) return cmd_run(ctx, in, params, out_dir, timestamp);

    if (sink->parsed()) {
      auto [inputs, network] = ingest_and_build(ctx, in, params);
      ctx.stage = "value-flow";
      const auto own = analyze_ownership(network, params);
      ctx.stage = "report";
      const fs::path dir = ensure_dir(out_dir);
      write_file(dir / "sink_scores.csv",
                 [&](std::ostream& o) { report::write_sink_scores(o, own.sink_scores); });
      write_file(dir / "value_flow.csv", [&](std::ostream& o) {
        report::write_value_flow(o, network, own.condensed.view, own.flow);
      });
      out << "sink scores for " << own.sink_scores.size() << " pairs written to " << dir.string()
          << '\n';
      return kOk;
    }

    if (conduit->parsed()) {
      const fs::path scores =
          sink_scores_path.empty() ? fs::path(out_dir) / "sink_scores.csv" : fs::path(sink_scores_path);
      ctx.stage = "ingest";
      const auto sink_rows = report::read_sink_scores(scores);
      auto [inputs, network] = ingest_and_build(ctx, in, params);
      ctx.stage = "value-flow";
      const auto own = analyze_ownership(network, params);
      ctx.stage = "conduit";
      const auto conduits = compute_conduits(network, own, sinks_from(sink_rows, params));
      ctx.stage = "report";
      const fs::path dir = ensure_dir(out_dir);
      write_file(dir / "conduit_scores.csv",
                 [&](std::ostream& o) { report::write_conduit_scores(o, conduits); });
      out << "conduit scores for " << conduits.size() << " pairs written to " << dir.string()
          << '\n';
      return kOk;
    }

    if (load->parsed()) {
      ctx.stage = "ingest";
      const auto tax =
          parse_tax_matrix(in.paths().tax, {params.tax_rates_as_percent, params.default_rate});
      print_warnings(ctx, tax.report);
      ctx.stage = "load";
      const auto result = analyze_load(tax.tax, params);
      ctx.stage = "report";
      const fs::path dir = ensure_dir(out_dir);
      write_file(dir / "load_scores.csv",
                 [&](std::ostream& o) { report::write_load_scores(o, result.rows); });
      out << "load scores for " << result.rows.size() << " jurisdictions written to "
          << dir.string() << " (unreachable packets " << result.result.unreachable_packets
          << ")\n";
      return kOk;
    }

    if (multi->parsed() || sweep->parsed()) {
      ctx.stage = "ingest";
      const fs::path cpath =
          conduit_path.empty() ? fs::path(out_dir) / "conduit_scores.csv" : fs::path(conduit_path);
      const fs::path lpath =
          load_path.empty() ? fs::path(out_dir) / "load_scores.csv" : fs::path(load_path);
      const auto conduits = report::read_conduit_scores(cpath);
      const auto load_rows = report::read_load_scores(lpath);
      ctx.stage = "multilayer";
      const auto report = sweep_of(conduits, load_rows, params);
      ctx.stage = "report";
      write_multilayer_outputs(ensure_dir(out_dir), report, nullptr);
      print_sweep(out, report);
      return kOk;
    }

    if (synth->parsed()) {
      std::vector<std::pair<std::string, std::string>> settings;
      for (const auto& item : set_items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw InputError("--set expects key=value, got " + item);
        settings.emplace_back(item.substr(0, eq), item.substr(eq + 1));
      }
      auto join = [](const std::vector<std::string>& v) {
        std::string s;
        for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
        return s;
      };
      if (seed_opt->count()) settings.emplace_back("seed", std::to_string(seed));
      if (firms_opt->count()) settings.emplace_back("firms", std::to_string(firms));
      if (juris_opt->count()) settings.emplace_back("jurisdictions", std::to_string(jurisdictions));
      if (sectors_opt->count()) settings.emplace_back("sectors", std::to_string(sectors));
      if (sinks_opt->count()) settings.emplace_back("planted_sinks", join(planted_sinks));
      if (conduits_opt->count()) settings.emplace_back("planted_conduits", join(planted_conduits));
      if (clique_opt->count()) settings.emplace_back("zero_tax_clique", clique);
      if (clique_size_opt->count()) {
        settings.emplace_back("zero_tax_clique_size", std::to_string(clique_size));
      }
      return cmd_synth(ctx, config_path, settings, out_dir);
    }

    if (hist->parsed()) return cmd_histogram(ctx, scores_path, column, width, output);
    if (carto->parsed()) return cmd_cartogram(ctx, scores_path, sector_code, output);
    throw InputError("no subcommand given");
  } catch (const InputError& e) {
    report_error(ctx, "input", e.what());
    return kInputError;
  } catch (const ComputationError& e) {
    report_error(ctx, "computation", e.what());
    return kComputationError;
  } catch (const std::exception& e) {
    report_error(ctx, "internal", e.what());
    return kComputationError;
  }
}

}  // namespace taxnet::cli
