#include "wifipoi/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

#include "wifipoi/csv.hpp"
#include "wifipoi/error.hpp"
#include "wifipoi/ingest.hpp"

namespace wifipoi {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view text, std::string_view key) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::ConfigParse,
                "bad value '" + std::string(text) + "' for " + std::string(key));
  }
  return value;
}

struct Span {
  Timestamp start;
  Timestamp end;
};

Timestamp overlap(Span a, Span b) { return std::min(a.end, b.end) - std::max(a.start, b.start); }

// Closed intervals; touching endpoints only count when one side is a single
// instant.
bool intersects(Span a, Span b) {
  const Timestamp ov = overlap(a, b);
  if (ov > 0) return true;
  return ov == 0 && (a.start == a.end || b.start == b.end);
}

std::optional<std::string> majority_label(std::span<const VisitInterval> visits,
                                          std::span<const sim::GroundTruthVisit> truth) {
  std::map<std::string, Timestamp> votes;
  for (const auto& v : visits) {
    for (const auto& t : truth) {
      if (intersects({v.start, v.end}, {t.start, t.end})) {
        votes[t.label] += std::max<Timestamp>(overlap({v.start, v.end}, {t.start, t.end}), 0) + 1;
      }
    }
  }
  if (votes.empty()) return std::nullopt;
  return std::max_element(votes.begin(), votes.end(),
                          [](const auto& a, const auto& b) { return a.second < b.second; })
      ->first;
}

std::vector<std::vector<std::string>> read_csv_rows(std::string_view text,
                                                     std::string_view expected_header) {
  std::vector<std::vector<std::string>> rows;
  bool header = true;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto cut = text.find('\n');
    const std::string_view line = trim(text.substr(0, cut));
    text = cut == std::string_view::npos ? std::string_view{} : text.substr(cut + 1);
    if (line.empty()) continue;
    if (header) {
      if (line != expected_header) {
        throw Error(ErrorCode::ConfigParse, "expected header '" + std::string(expected_header) + "'",
                    line_no);
      }
      header = false;
      continue;
    }
    auto fields = csv::split(line);
    if (fields.size() != 5 && std::count(expected_header.begin(), expected_header.end(), ',') == 4) {
      throw Error(ErrorCode::ConfigParse, "expected 5 fields", line_no);
    }
    rows.push_back(std::move(fields));
  }
  if (header) throw Error(ErrorCode::ConfigParse, "missing header");
  return rows;
}

}  // namespace

void PipelineConfig::validate() const {
  cluster.validate();
  auto check = [](SimilarityScore t, const char* what) {
    if (!(t > 0.0 && t <= 1.0)) {
      throw Error(ErrorCode::InvalidParams, std::string(what) + " must lie in (0, 1]");
    }
  };
  check(match_threshold, "match_threshold");
  check(identify_threshold, "identify_threshold");
  for (const auto t : community_thresholds) check(t, "community threshold");
}

void PipelineConfig::set(std::string_view key, std::string_view value) {
  if (key == "epsilon") {
    cluster.epsilon = parse_number<double>(value, key);
  } else if (key == "min_pts") {
    cluster.min_pts = parse_number<std::size_t>(value, key);
  } else if (key == "scan_interval") {
    cluster.scan_interval = parse_number<Timestamp>(value, key);
  } else if (key == "match_threshold") {
    match_threshold = parse_number<double>(value, key);
  } else if (key == "identify_threshold") {
    identify_threshold = parse_number<double>(value, key);
  } else if (key == "community_thresholds") {
    community_thresholds.clear();
    for (const auto& item : csv::split(value)) {
      community_thresholds.push_back(parse_number<double>(trim(item), key));
    }
  } else if (key == "refresh_fingerprints") {
    if (value != "true" && value != "false") {
      throw Error(ErrorCode::ConfigParse, "refresh_fingerprints must be true or false");
    }
    refresh_fingerprints = value == "true";
  } else if (key == "utc_offset") {
    utc_offset = parse_number<Timestamp>(value, key);
  } else if (key == "store") {
    store_path = std::string(value);
  } else {
    throw Error(ErrorCode::ConfigParse, "unknown setting '" + std::string(key) + "'");
  }
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
  const std::string text = read_file(path);
  std::string_view rest = text;
  std::size_t line_no = 0;
  while (!rest.empty()) {
    ++line_no;
    const auto cut = rest.find('\n');
    std::string_view line = rest.substr(0, cut);
    rest = cut == std::string_view::npos ? std::string_view{} : rest.substr(cut + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::ConfigParse, "expected key = value", line_no);
    }
    try {
      base.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigParse, e.what(), line_no);
    }
  }
  return base;
}

ExtractResult extract_day(const ScanLog& day_log, SummaryStore& store, const PipelineConfig& config,
                          const DayWindow& day, std::span<const sim::GroundTruthVisit> truth) {
  config.validate();
  ScanLog log;
  log.user = day_log.user;
  log.device = day_log.device;
  for (const auto& scan : day_log.entries) {
    if (!day.contains(scan.timestamp)) continue;
    try {
      log.entries.push_back(validate_scan(scan));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyScan) throw;
    }
  }
  normalize_log(log);

  ExtractResult result;
  result.scans = log.entries.size();
  if (!log.entries.empty()) {
    const auto labels = dbscan(log, config.cluster);
    result.visits = segment_visits(log, labels, config.cluster);
    int max_id = 0;
    for (const auto label : labels) {
      if (label.is_noise()) {
        ++result.noise_scans;
      } else {
        max_id = std::max(max_id, label.id());
      }
    }
    result.clusters = static_cast<std::size_t>(max_id);

    for (int id = 1; id <= max_id; ++id) {
      std::vector<ScanResult> members;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i].id() == id) members.push_back(log.entries[i]);
      }
      std::vector<VisitInterval> visits;
      std::copy_if(result.visits.begin(), result.visits.end(), std::back_inserter(visits),
                   [&](const VisitInterval& v) { return v.cluster == id; });
      UpsertOptions options;
      options.match_threshold = config.match_threshold;
      options.refresh_fingerprint = config.refresh_fingerprints;
      if (!truth.empty()) options.label = majority_label(visits, truth);
      store.upsert_poi(log.user, build_fingerprint(members), visits, options);
    }
  }
  if (store.has_user(log.user)) result.rows = store.daily_summary(log.user, day);
  return result;
}

CommunityReport detect_communities(const SummaryStore& store, const PipelineConfig& config) {
  config.validate();
  CommunityReport report;
  report.nodes = store.all_records();
  std::vector<Fingerprint> fps;
  fps.reserve(report.nodes.size());
  for (const auto& node : report.nodes) fps.push_back(node.fingerprint);

  report.graph = build_graph(fps, config.identify_threshold);
  report.partition = louvain(report.graph);
  report.sweep = threshold_sweep(fps, config.community_thresholds);
  return report;
}

void write_community_csv(std::ostream& out, const CommunityReport& report) {
  out << "community_id,poi_id,user\n";
  for (std::size_t i = 0; i < report.nodes.size(); ++i) {
    out << report.partition.community[i] << ',' << report.nodes[i].poi_id << ','
        << csv::escape(report.nodes[i].user) << '\n';
  }
}

std::vector<TruthRow> read_truth_csv(std::string_view text, Timestamp utc_offset) {
  std::vector<TruthRow> out;
  for (auto& fields : read_csv_rows(text, "user,day,label,start,end")) {
    TruthRow row;
    row.user = fields[0];
    row.day = fields[1];
    const DayWindow day = day_window(row.day, utc_offset);
    row.visit.label = fields[2];
    row.visit.start = day.begin + Timestamp{parse_hhmm(fields[3])} * 60;
    row.visit.end = day.begin + Timestamp{parse_hhmm(fields[4])} * 60;
    if (row.visit.end < row.visit.start) row.visit.end += kSecondsPerDay;
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<SummaryRow> read_summary_csv(std::string_view text, const DayWindow& day,
                                         Timestamp utc_offset) {
  (void)utc_offset;  // the window already carries the offset
  std::vector<SummaryRow> out;
  for (auto& fields : read_csv_rows(text, "poi_id,label,start,end")) {
    if (fields.size() != 4) throw Error(ErrorCode::ConfigParse, "expected 4 fields");
    SummaryRow row;
    row.poi_id = parse_number<PoiId>(fields[0], "poi_id");
    if (!fields[1].empty()) row.label = fields[1];
    row.start = day.begin + Timestamp{parse_hhmm(fields[2])} * 60;
    row.end = day.begin + Timestamp{parse_hhmm(fields[3])} * 60;
    if (row.end < row.start) row.end += kSecondsPerDay;
    out.push_back(std::move(row));
  }
  return out;
}

ScoreReport score_visits(std::span<const SummaryRow> summary,
                         std::span<const sim::GroundTruthVisit> truth) {
  ScoreReport report;
  report.truth_visits = truth.size();
  report.summary_rows = summary.size();

  // Best-overlap match per ground-truth visit.
  std::vector<std::optional<std::size_t>> match(truth.size());
  double error_sum = 0.0;
  std::size_t error_terms = 0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    const Span ts{truth[t].start, truth[t].end};
    Timestamp best_overlap = -1;
    for (std::size_t s = 0; s < summary.size(); ++s) {
      const Span ss{summary[s].start, summary[s].end};
      if (!intersects(ts, ss)) continue;
      if (overlap(ts, ss) > best_overlap) {
        best_overlap = overlap(ts, ss);
        match[t] = s;
      }
    }
    if (!match[t]) continue;
    ++report.matched;
    const auto& row = summary[*match[t]];
    for (const double err : {std::abs(static_cast<double>(row.start - truth[t].start)) / 60.0,
                             std::abs(static_cast<double>(row.end - truth[t].end)) / 60.0}) {
      report.max_boundary_error_min = std::max(report.max_boundary_error_min, err);
      error_sum += err;
      ++error_terms;
    }
  }
  if (error_terms > 0) report.mean_boundary_error_min = error_sum / static_cast<double>(error_terms);

  // Identity: every place should map to one POI id of its own.
  std::map<std::string, std::map<PoiId, std::size_t>> ids_per_label;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    if (match[t]) ++ids_per_label[truth[t].label][summary[*match[t]].poi_id];
  }
  std::map<std::string, PoiId> majority;
  std::map<PoiId, std::size_t> claimed;
  for (const auto& [label, counts] : ids_per_label) {
    const auto best = std::max_element(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
      return a.second < b.second;
    });
    majority[label] = best->first;
    ++claimed[best->first];
  }
  std::size_t correct = 0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    if (!match[t]) continue;
    const PoiId id = summary[*match[t]].poi_id;
    if (majority[truth[t].label] == id && claimed[id] == 1) ++correct;
  }
  if (!truth.empty()) {
    report.identity_accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  }

  std::map<std::string, std::set<PoiId>> ids_touching_label;
  std::map<PoiId, std::set<std::string>> labels_touching_id;
  for (const auto& row : summary) {
    bool touched = false;
    for (const auto& visit : truth) {
      if (!intersects({row.start, row.end}, {visit.start, visit.end})) continue;
      touched = true;
      ids_touching_label[visit.label].insert(row.poi_id);
      labels_touching_id[row.poi_id].insert(visit.label);
    }
    if (!touched) ++report.spurious;
  }
  for (const auto& [label, ids] : ids_touching_label) report.splits += ids.size() - 1;
  for (const auto& [id, labels] : labels_touching_id) report.merges += labels.size() - 1;
  return report;
}

void write_score_report(std::ostream& out, const ScoreReport& r) {
  out << "truth_visits: " << r.truth_visits << '\n'
      << "summary_rows: " << r.summary_rows << '\n'
      << "matched: " << r.matched << '\n'
      << "max_boundary_error_min: " << r.max_boundary_error_min << '\n'
      << "mean_boundary_error_min: " << r.mean_boundary_error_min << '\n'
      << "identity_accuracy: " << r.identity_accuracy << '\n'
      << "splits: " << r.splits << '\n'
      << "merges: " << r.merges << '\n'
      << "spurious: " << r.spurious << '\n';
}

}  // namespace wifipoi
