#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wifipoi/clustering.hpp"
#include "wifipoi/community.hpp"
#include "wifipoi/registry.hpp"
#include "wifipoi/simgen.hpp"

namespace wifipoi {

struct PipelineConfig {
  ClusterParams cluster;
  SimilarityScore match_threshold = 0.5;
  std::vector<SimilarityScore> community_thresholds{0.2, 0.3, 0.4, 0.5};
  /// Edge threshold of the graph whose partition is reported.
  SimilarityScore identify_threshold = 0.5;
  bool refresh_fingerprints = true;
  /// Fixed offset of local time from UTC, seconds.
  Timestamp utc_offset = 0;
  std::string store_path = "poi.db";

  /// Throws InvalidParams.
  void validate() const;
  /// Applies one `key = value` setting. Throws ConfigParse on unknown keys.
  void set(std::string_view key, std::string_view value);
};

/// Reads `key = value` lines ('#' starts a comment).
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});

struct ExtractResult {
  std::size_t scans = 0;
  std::size_t noise_scans = 0;
  std::size_t clusters = 0;
  std::vector<VisitInterval> visits;
  std::vector<SummaryRow> rows;
};

/// Clusters one day of a user's scans, registers every cluster as a POI
/// (matching earlier ones) and returns that day's timeline. When `truth` is
/// given, new POI are labelled with the ground-truth place they overlap most.
ExtractResult extract_day(const ScanLog& day_log, SummaryStore& store, const PipelineConfig& config,
                          const DayWindow& day,
                          std::span<const sim::GroundTruthVisit> truth = {});

struct CommunityReport {
  std::vector<PoiRecord> nodes;
  PoiGraph graph;
  Partition partition;
  std::vector<SweepRow> sweep;
};

/// Cross-user graph of every registered POI: a threshold sweep plus the
/// partition at identify_threshold. Throws TooFewNodes / EmptyGraph.
CommunityReport detect_communities(const SummaryStore& store, const PipelineConfig& config);

/// CSV `community_id,poi_id,user`.
void write_community_csv(std::ostream& out, const CommunityReport& report);

struct TruthRow {
  std::string user;
  std::string day;
  sim::GroundTruthVisit visit;
};

/// Reads `user,day,label,start,end`. Throws ConfigParse.
std::vector<TruthRow> read_truth_csv(std::string_view text, Timestamp utc_offset = 0);

/// Reads `poi_id,label,start,end` for the given day. Throws ConfigParse.
std::vector<SummaryRow> read_summary_csv(std::string_view text, const DayWindow& day,
                                         Timestamp utc_offset = 0);

struct ScoreReport {
  std::size_t truth_visits = 0;
  std::size_t summary_rows = 0;
  std::size_t matched = 0;
  /// Over matched visits, |start error| and |end error| in minutes.
  double max_boundary_error_min = 0.0;
  double mean_boundary_error_min = 0.0;
  /// Share of ground-truth visits whose matched POI is the one consistently
  /// used for that place (and no other place).
  double identity_accuracy = 0.0;
  /// Extra POI ids per place, summed.
  std::size_t splits = 0;
  /// Extra places per POI id, summed.
  std::size_t merges = 0;
  /// Summary rows overlapping no ground-truth visit.
  std::size_t spurious = 0;
};

/// Each ground-truth visit is matched to the summary row that overlaps it
/// most.
ScoreReport score_visits(std::span<const SummaryRow> summary,
                         std::span<const sim::GroundTruthVisit> truth);

void write_score_report(std::ostream& out, const ScoreReport& report);

}  // namespace wifipoi
