#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wifipoi/clustering.hpp"
#include "wifipoi/model.hpp"
#include "wifipoi/similarity.hpp"
#include "wifipoi/timeutil.hpp"

namespace wifipoi {

/// Per-user POI identifier, allocated from 1.
using PoiId = std::int64_t;

struct PoiRecord {
  PoiId poi_id = 0;
  std::string user;
  Fingerprint fingerprint;
  Timestamp created_at = 0;
  std::vector<VisitInterval> visits;
  /// Ground-truth label, evaluation only.
  std::optional<std::string> label;
};

/// Per-MAC mean of the RSS readings that actually observed the MAC. Scans
/// missing a MAC do not pull its mean down. Throws EmptyCluster.
Fingerprint build_fingerprint(std::span<const ScanResult> cluster_scans);

/// Best-scoring record when its score reaches `threshold`; ties go to the
/// lowest poi_id. std::nullopt means a new POI.
std::optional<PoiId> match_poi(const Fingerprint& fp, std::span<const PoiRecord> registry,
                               SimilarityScore threshold);

/// "mac:mean:count" triples sorted by MAC, joined with ';'. Means use the
/// shortest round-tripping decimal form.
std::string encode_fingerprint(const Fingerprint& fp);
Fingerprint decode_fingerprint(std::string_view text);

struct UpsertOptions {
  SimilarityScore match_threshold = 0.5;
  /// Fold the new observations into a matched POI's fingerprint.
  bool refresh_fingerprint = true;
  /// Applied to a newly created POI, or to a matched one without a label.
  std::optional<std::string> label;
};

/// One row of a daily timeline: poi_id, label, start, end.
struct SummaryRow {
  PoiId poi_id = 0;
  std::optional<std::string> label;
  Timestamp start = 0;
  Timestamp end = 0;

  friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

struct IntegrityReport {
  std::size_t pois = 0;
  std::size_t visits = 0;
  std::size_t orphan_visits = 0;
  std::size_t bad_fingerprints = 0;

  bool ok() const noexcept { return orphan_visits == 0 && bad_fingerprints == 0; }
};

/// File-backed summary database: poi_properties and poi_visits tables.
///
/// Every upsert is one transaction. A visit is identified by (user, start);
/// re-submitting known visits leaves the store untouched, so re-running the
/// pipeline over the same day is idempotent. Single writer.
class SummaryStore {
 public:
  /// Called at named checkpoints inside write transactions. Throwing from it
  /// simulates a crash at that point; the transaction is rolled back.
  using FaultHook = std::function<void(std::string_view checkpoint)>;

  /// ":memory:" gives a private in-memory store.
  explicit SummaryStore(const std::string& path);
  ~SummaryStore();
  SummaryStore(SummaryStore&&) noexcept;
  SummaryStore& operator=(SummaryStore&&) noexcept;

  /// Matches `fp` against the user's POIs; on a match appends the visits
  /// (and refreshes the fingerprint), otherwise allocates the next poi_id.
  /// Throws StorageFailure.
  PoiId upsert_poi(const std::string& user, const Fingerprint& fp,
                   std::span<const VisitInterval> visits, const UpsertOptions& options = {});

  std::vector<PoiRecord> records(std::string_view user) const;
  /// Ordered by (user, poi_id).
  std::vector<PoiRecord> all_records() const;
  std::vector<std::string> users() const;
  bool has_user(std::string_view user) const;

  void set_label(std::string_view user, PoiId poi_id, std::string_view label);

  /// Visits starting inside `day`, ordered by start. Throws UnknownUser when
  /// the user has no POI at all.
  std::vector<SummaryRow> daily_summary(std::string_view user, const DayWindow& day) const;

  IntegrityReport check_integrity() const;

  void set_fault_hook(FaultHook hook);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// CSV with header `poi_id,label,start,end`, times as HH:mm.
void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows,
                       Timestamp utc_offset = 0);

}  // namespace wifipoi
