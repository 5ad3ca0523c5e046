// poiminer: ingest scan logs, extract daily POI timelines, find shared POI.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "wifipoi/error.hpp"
#include "wifipoi/ingest.hpp"
#include "wifipoi/pipeline.hpp"
#include "wifipoi/simgen.hpp"

#ifndef WIFIPOI_SCENARIO_DIR
#define WIFIPOI_SCENARIO_DIR "scenarios"
#endif

namespace fs = std::filesystem;
using namespace wifipoi;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitDomain = 3;

struct Globals {
  std::string store;
  std::string config;
};

PipelineConfig resolve_config(const Globals& g) {
  PipelineConfig config;
  if (!g.config.empty()) config = load_config(g.config);
  if (const char* env = std::getenv("POI_STORE"); env && *env) config.store_path = env;
  if (!g.store.empty()) config.store_path = g.store;
  return config;
}

// Writes to `path`, or stdout when empty / "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file(path, text);
  }
}

fs::path resolve_scenario(const std::string& name) {
  if (fs::is_regular_file(name)) return name;
  const fs::path bundled = fs::path(WIFIPOI_SCENARIO_DIR) / (name + ".ini");
  if (fs::exists(bundled)) return bundled;
  throw Error(ErrorCode::Io, "no scenario file or bundled scenario named '" + name + "'");
}

int cmd_ingest(const Globals& g, const std::vector<std::string>& files, const std::string& user) {
  const PipelineConfig config = resolve_config(g);
  RawStore store(config.store_path);
  for (const auto& file : files) {
    const std::string owner = user.empty() ? user_from_filename(file) : user;
    try {
      const ScanLog log = load_scan_file(file, owner);
      const IngestReport report = store.store_raw(log);
      std::cout << file << ": user " << owner << ", " << report.added << " rows added, "
                << report.skipped << " skipped\n";
    } catch (const Error&) {
      std::cerr << file << ": ";
      throw;
    }
  }
  return 0;
}

struct ExtractArgs {
  std::string user;
  std::string day;
  std::optional<double> epsilon;
  std::optional<std::size_t> min_pts;
  std::optional<double> match_threshold;
  std::string truth;
  std::string out;
};

int cmd_extract(const Globals& g, const ExtractArgs& a) {
  PipelineConfig config = resolve_config(g);
  if (a.epsilon) config.cluster.epsilon = *a.epsilon;
  if (a.min_pts) config.cluster.min_pts = *a.min_pts;
  if (a.match_threshold) config.match_threshold = *a.match_threshold;
  config.validate();

  const DayWindow day = day_window(a.day, config.utc_offset);
  RawStore raw(config.store_path);
  if (!raw.has_user(a.user)) throw Error(ErrorCode::UnknownUser, "no raw scans for user " + a.user);
  const ScanLog log = raw.load_log(a.user, day);

  std::vector<sim::GroundTruthVisit> truth;
  if (!a.truth.empty()) {
    for (auto& row : read_truth_csv(read_file(a.truth), config.utc_offset)) {
      if (row.user == a.user) truth.push_back(std::move(row.visit));
    }
  }

  SummaryStore store(config.store_path);
  const ExtractResult result = extract_day(log, store, config, day, truth);
  std::cerr << a.user << " " << a.day << ": " << result.scans << " scans, " << result.noise_scans
            << " noise, " << result.clusters << " clusters, " << result.rows.size() << " visits\n";

  std::ostringstream csv;
  write_summary_csv(csv, result.rows, config.utc_offset);
  emit(a.out, csv.str());
  return 0;
}

struct CommunityArgs {
  std::vector<double> thresholds;
  std::optional<double> identify_threshold;
  std::string out_dir = ".";
};

int cmd_communities(const Globals& g, const CommunityArgs& a) {
  PipelineConfig config = resolve_config(g);
  if (!a.thresholds.empty()) config.community_thresholds = a.thresholds;
  if (a.identify_threshold) config.identify_threshold = *a.identify_threshold;
  config.validate();

  SummaryStore store(config.store_path);
  const CommunityReport report = detect_communities(store, config);
  std::cerr << report.nodes.size() << " POI, " << report.graph.candidate_pairs << " pairs, "
            << report.graph.edges().size() << " edges at " << config.identify_threshold << '\n';

  const fs::path dir = a.out_dir;
  fs::create_directories(dir);
  std::ostringstream sweep, communities, edges;
  write_sweep_csv(sweep, report.sweep);
  write_community_csv(communities, report);
  write_edge_list(edges, report.graph);
  write_file(dir / "sweep.csv", sweep.str());
  write_file(dir / "communities.csv", communities.str());
  write_file(dir / "edges.txt", edges.str());
  std::cout << sweep.str();
  std::cout << "communities: " << report.partition.community_count()
            << " modularity: " << report.partition.modularity << '\n';
  return 0;
}

int cmd_simulate(const std::string& scenario_name, std::uint64_t seed, const std::string& out_dir) {
  const sim::Scenario scenario = sim::load_scenario(resolve_scenario(scenario_name));
  const auto traces = sim::run_scenario(scenario, seed);
  const fs::path dir = out_dir;
  fs::create_directories(dir);
  std::ostringstream truth;
  bool header = true;
  for (const auto& trace : traces) {
    const fs::path file = dir / (trace.log.user + ".scan.gz");
    write_file(file, compress_batch(encode_log(trace.log)));
    sim::write_truth_csv(truth, trace.log.user, trace.truth, 0, header);
    header = false;
    std::cout << file.string() << ": " << trace.log.entries.size() << " scans, "
              << trace.truth.size() << " visits\n";
  }
  write_file(dir / "truth.csv", truth.str());
  return 0;
}

int cmd_score(const Globals& g, const std::string& summary_path, const std::string& truth_path,
              const std::string& user, const std::string& day_text) {
  const PipelineConfig config = resolve_config(g);
  const DayWindow day = day_window(day_text, config.utc_offset);
  const auto summary = read_summary_csv(read_file(summary_path), day, config.utc_offset);
  std::vector<sim::GroundTruthVisit> truth;
  for (auto& row : read_truth_csv(read_file(truth_path), config.utc_offset)) {
    if (row.user == user && row.day == day_text) truth.push_back(std::move(row.visit));
  }
  write_score_report(std::cout, score_visits(summary, truth));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Indoor POI mining from Wi-Fi scan logs"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--store", g.store, "SQLite store path (overrides POI_STORE and config)");
  app.add_option("--config", g.config, "key = value configuration file");

  std::vector<std::string> files;
  std::string ingest_user;
  auto* ingest = app.add_subcommand("ingest", "Load .scan / .scan.gz files into the raw store");
  ingest->add_option("files", files)->required()->check(CLI::ExistingFile);
  ingest->add_option("--user", ingest_user, "Owner of the scans (default: from file name)");

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Cluster one day and print its POI timeline");
  extract->add_option("--user", ex.user)->required();
  extract->add_option("--day", ex.day, "YYYY-MM-DD")->required();
  extract->add_option("--epsilon", ex.epsilon);
  extract->add_option("--min-pts", ex.min_pts);
  extract->add_option("--match-threshold", ex.match_threshold);
  extract->add_option("--truth", ex.truth, "Ground-truth CSV used to label new POI");
  extract->add_option("--out", ex.out, "Summary CSV path (default stdout)");

  CommunityArgs co;
  auto* communities = app.add_subcommand("communities", "Detect POI shared across users");
  communities->add_option("--thresholds", co.thresholds)->delimiter(',');
  communities->add_option("--identify-threshold", co.identify_threshold);
  communities->add_option("--out-dir", co.out_dir);

  std::string scenario;
  std::uint64_t seed = 1;
  std::string sim_out = ".";
  auto* simulate = app.add_subcommand("simulate", "Generate synthetic scan files and ground truth");
  simulate->add_option("--scenario", scenario, "Bundled scenario name or file path")->required();
  simulate->add_option("--seed", seed);
  simulate->add_option("--out-dir", sim_out);

  std::string summary_path, truth_path, score_user, score_day;
  auto* score = app.add_subcommand("score", "Compare a summary CSV with ground truth");
  score->add_option("summary", summary_path)->required()->check(CLI::ExistingFile);
  score->add_option("truth", truth_path)->required()->check(CLI::ExistingFile);
  score->add_option("--user", score_user)->required();
  score->add_option("--day", score_day)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*ingest) return cmd_ingest(g, files, ingest_user);
    if (*extract) return cmd_extract(g, ex);
    if (*communities) return cmd_communities(g, co);
    if (*simulate) return cmd_simulate(scenario, seed, sim_out);
    if (*score) return cmd_score(g, summary_path, truth_path, score_user, score_day);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_input_error(e.code()) ? kExitInput : kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  return 0;
}
