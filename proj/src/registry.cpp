#include "wifipoi/registry.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <ostream>

#include "sqlite_db.hpp"
#include "wifipoi/csv.hpp"
#include "wifipoi/error.hpp"

namespace wifipoi {
namespace {

constexpr std::string_view kSchema = R"sql(
CREATE TABLE IF NOT EXISTS poi_properties (
  user        TEXT    NOT NULL,
  poi_id      INTEGER NOT NULL,
  fingerprint TEXT    NOT NULL,
  created_at  INTEGER NOT NULL,
  label       TEXT,
  PRIMARY KEY (user, poi_id)
);
CREATE TABLE IF NOT EXISTS poi_visits (
  visit_id    INTEGER PRIMARY KEY AUTOINCREMENT,
  user        TEXT    NOT NULL,
  poi_id      INTEGER NOT NULL,
  start_time  INTEGER NOT NULL,
  end_time    INTEGER NOT NULL,
  scan_count  INTEGER NOT NULL,
  UNIQUE (user, start_time),
  FOREIGN KEY (user, poi_id) REFERENCES poi_properties (user, poi_id)
);
CREATE INDEX IF NOT EXISTS poi_visits_by_poi ON poi_visits (user, poi_id);
)sql";

std::string format_mean(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

}  // namespace

Fingerprint build_fingerprint(std::span<const ScanResult> cluster_scans) {
  if (cluster_scans.empty()) throw Error(ErrorCode::EmptyCluster, "no scans in cluster");
  struct Accumulator {
    double sum = 0.0;
    std::size_t count = 0;
  };
  std::map<MacAddress, Accumulator> acc;
  for (const auto& scan : cluster_scans) {
    for (const auto& obs : scan.observations) {
      auto& a = acc[obs.mac];
      a.sum += obs.rssi;
      ++a.count;
    }
  }
  if (acc.empty()) throw Error(ErrorCode::EmptyCluster, "cluster scans carry no observations");
  std::vector<FingerprintEntry> entries;
  entries.reserve(acc.size());
  for (const auto& [mac, a] : acc) {
    entries.push_back({mac, a.sum / static_cast<double>(a.count), a.count});
  }
  return Fingerprint(std::move(entries));
}

std::optional<PoiId> match_poi(const Fingerprint& fp, std::span<const PoiRecord> registry,
                               SimilarityScore threshold) {
  std::optional<PoiId> best;
  SimilarityScore best_score = -1.0;
  for (const auto& record : registry) {
    const SimilarityScore score = cosine_similarity(fp, record.fingerprint);
    if (score < threshold) continue;
    if (score > best_score || (score == best_score && record.poi_id < *best)) {
      best = record.poi_id;
      best_score = score;
    }
  }
  return best;
}

std::string encode_fingerprint(const Fingerprint& fp) {
  std::string out;
  for (const auto& e : fp.entries()) {
    if (!out.empty()) out.push_back(';');
    out += e.mac.str();
    out.push_back(':');
    out += format_mean(e.mean_rssi);
    out.push_back(':');
    out += std::to_string(e.count);
  }
  return out;
}

Fingerprint decode_fingerprint(std::string_view text) {
  std::vector<FingerprintEntry> entries;
  while (!text.empty()) {
    const auto cut = text.find(';');
    const std::string_view item = text.substr(0, cut);
    text = cut == std::string_view::npos ? std::string_view{} : text.substr(cut + 1);

    constexpr std::size_t kMacLength = 17;
    const auto bad = [&] {
      return Error(ErrorCode::StorageFailure, "bad fingerprint triple '" + std::string(item) + "'");
    };
    if (item.size() < kMacLength + 4 || item[kMacLength] != ':') throw bad();
    FingerprintEntry entry;
    entry.mac = MacAddress::parse(item.substr(0, kMacLength));
    const std::string_view rest = item.substr(kMacLength + 1);
    const auto colon = rest.find(':');
    if (colon == std::string_view::npos) throw bad();
    const char* mean_end = rest.data() + colon;
    if (std::from_chars(rest.data(), mean_end, entry.mean_rssi).ptr != mean_end) throw bad();
    const std::string_view count = rest.substr(colon + 1);
    if (std::from_chars(count.data(), count.data() + count.size(), entry.count).ptr !=
        count.data() + count.size()) {
      throw bad();
    }
    entries.push_back(entry);
  }
  return Fingerprint(std::move(entries));
}

struct SummaryStore::Impl {
  explicit Impl(const std::string& path) : db(path) { db.exec(kSchema); }

  void checkpoint(std::string_view name) const {
    if (hook) hook(name);
  }

  std::vector<PoiRecord> load(std::string_view user, bool all_users) {
    std::vector<PoiRecord> out;
    std::map<std::pair<std::string, PoiId>, std::size_t> index;
    {
      auto stmt = db.prepare(
          all_users ? "SELECT user, poi_id, fingerprint, created_at, label FROM poi_properties "
                      "ORDER BY user, poi_id"
                    : "SELECT user, poi_id, fingerprint, created_at, label FROM poi_properties "
                      "WHERE user = ?1 ORDER BY poi_id");
      if (!all_users) stmt.bind(1, user);
      while (stmt.step()) {
        PoiRecord r;
        r.user = stmt.column_text(0);
        r.poi_id = stmt.column_int64(1);
        r.fingerprint = decode_fingerprint(stmt.column_text(2));
        r.created_at = stmt.column_int64(3);
        if (!stmt.column_is_null(4)) r.label = stmt.column_text(4);
        index[{r.user, r.poi_id}] = out.size();
        out.push_back(std::move(r));
      }
    }
    auto stmt = db.prepare(
        all_users ? "SELECT user, poi_id, start_time, end_time, scan_count FROM poi_visits "
                    "ORDER BY user, start_time"
                  : "SELECT user, poi_id, start_time, end_time, scan_count FROM poi_visits "
                    "WHERE user = ?1 ORDER BY start_time");
    if (!all_users) stmt.bind(1, user);
    while (stmt.step()) {
      const auto it = index.find({stmt.column_text(0), stmt.column_int64(1)});
      if (it == index.end()) continue;
      VisitInterval v;
      v.cluster = static_cast<int>(stmt.column_int64(1));
      v.start = stmt.column_int64(2);
      v.end = stmt.column_int64(3);
      v.scan_count = static_cast<std::size_t>(stmt.column_int64(4));
      out[it->second].visits.push_back(v);
    }
    return out;
  }

  std::optional<PoiId> owner_of_visit(const std::string& user, Timestamp start) {
    auto stmt = db.prepare("SELECT poi_id FROM poi_visits WHERE user = ?1 AND start_time = ?2");
    stmt.bind(1, user).bind(2, start);
    if (stmt.step()) return stmt.column_int64(0);
    return std::nullopt;
  }

  sqlite::Database db;
  FaultHook hook;
};

SummaryStore::SummaryStore(const std::string& path) : impl_(std::make_unique<Impl>(path)) {}
SummaryStore::~SummaryStore() = default;
SummaryStore::SummaryStore(SummaryStore&&) noexcept = default;
SummaryStore& SummaryStore::operator=(SummaryStore&&) noexcept = default;

void SummaryStore::set_fault_hook(FaultHook hook) { impl_->hook = std::move(hook); }

PoiId SummaryStore::upsert_poi(const std::string& user, const Fingerprint& fp,
                               std::span<const VisitInterval> visits,
                               const UpsertOptions& options) {
  if (fp.empty()) throw Error(ErrorCode::EmptyFingerprint, "cannot register an empty fingerprint");
  auto& db = impl_->db;
  sqlite::Transaction tx(db);

  std::vector<VisitInterval> fresh;
  std::optional<PoiId> known_owner;
  for (const auto& v : visits) {
    if (const auto owner = impl_->owner_of_visit(user, v.start)) {
      if (!known_owner) known_owner = owner;
    } else {
      fresh.push_back(v);
    }
  }
  // Every visit is already recorded: this cluster was registered before.
  if (fresh.empty() && known_owner) {
    tx.commit();
    return *known_owner;
  }

  const auto records = impl_->load(user, false);
  const auto match = match_poi(fp, records, options.match_threshold);
  PoiId id = 0;
  if (match) {
    id = *match;
    const auto& record = *std::find_if(records.begin(), records.end(),
                                       [&](const PoiRecord& r) { return r.poi_id == id; });
    if (options.refresh_fingerprint && !fresh.empty()) {
      auto update = db.prepare(
          "UPDATE poi_properties SET fingerprint = ?1 WHERE user = ?2 AND poi_id = ?3");
      update.bind(1, encode_fingerprint(record.fingerprint.merged_with(fp)))
          .bind(2, user)
          .bind(3, id)
          .run();
    }
    if (options.label && !record.label) {
      auto update =
          db.prepare("UPDATE poi_properties SET label = ?1 WHERE user = ?2 AND poi_id = ?3");
      update.bind(1, options.label).bind(2, user).bind(3, id).run();
    }
  } else {
    id = records.empty() ? 1 : records.back().poi_id + 1;
    Timestamp created_at = 0;
    if (!visits.empty()) {
      created_at = std::min_element(visits.begin(), visits.end(), [](const auto& a, const auto& b) {
                     return a.start < b.start;
                   })->start;
    }
    auto insert = db.prepare(
        "INSERT INTO poi_properties (user, poi_id, fingerprint, created_at, label) "
        "VALUES (?1, ?2, ?3, ?4, ?5)");
    insert.bind(1, user)
        .bind(2, id)
        .bind(3, encode_fingerprint(fp))
        .bind(4, created_at)
        .bind(5, options.label)
        .run();
  }
  impl_->checkpoint("properties-written");

  auto insert_visit = db.prepare(
      "INSERT INTO poi_visits (user, poi_id, start_time, end_time, scan_count) "
      "VALUES (?1, ?2, ?3, ?4, ?5)");
  for (const auto& v : fresh) {
    insert_visit.reset();
    insert_visit.bind(1, user)
        .bind(2, id)
        .bind(3, v.start)
        .bind(4, v.end)
        .bind(5, static_cast<std::int64_t>(v.scan_count))
        .run();
    impl_->checkpoint("visit-written");
  }
  impl_->checkpoint("before-commit");
  tx.commit();
  return id;
}

std::vector<PoiRecord> SummaryStore::records(std::string_view user) const {
  return impl_->load(user, false);
}

std::vector<PoiRecord> SummaryStore::all_records() const { return impl_->load({}, true); }

std::vector<std::string> SummaryStore::users() const {
  std::vector<std::string> out;
  auto stmt = impl_->db.prepare("SELECT DISTINCT user FROM poi_properties ORDER BY user");
  while (stmt.step()) out.push_back(stmt.column_text(0));
  return out;
}

bool SummaryStore::has_user(std::string_view user) const {
  auto stmt = impl_->db.prepare("SELECT 1 FROM poi_properties WHERE user = ?1 LIMIT 1");
  stmt.bind(1, user);
  return stmt.step();
}

void SummaryStore::set_label(std::string_view user, PoiId poi_id, std::string_view label) {
  auto stmt =
      impl_->db.prepare("UPDATE poi_properties SET label = ?1 WHERE user = ?2 AND poi_id = ?3");
  stmt.bind(1, label).bind(2, user).bind(3, poi_id).run();
}

std::vector<SummaryRow> SummaryStore::daily_summary(std::string_view user,
                                                    const DayWindow& day) const {
  if (!has_user(user)) {
    throw Error(ErrorCode::UnknownUser, "no POI registered for '" + std::string(user) + "'");
  }
  auto stmt = impl_->db.prepare(
      "SELECT v.poi_id, p.label, v.start_time, v.end_time FROM poi_visits v "
      "JOIN poi_properties p ON p.user = v.user AND p.poi_id = v.poi_id "
      "WHERE v.user = ?1 AND v.start_time >= ?2 AND v.start_time < ?3 "
      "ORDER BY v.start_time");
  stmt.bind(1, user).bind(2, day.begin).bind(3, day.end);
  std::vector<SummaryRow> rows;
  while (stmt.step()) {
    SummaryRow row;
    row.poi_id = stmt.column_int64(0);
    if (!stmt.column_is_null(1)) row.label = stmt.column_text(1);
    row.start = stmt.column_int64(2);
    row.end = stmt.column_int64(3);
    rows.push_back(std::move(row));
  }
  return rows;
}

IntegrityReport SummaryStore::check_integrity() const {
  IntegrityReport report;
  auto& db = impl_->db;
  {
    auto stmt = db.prepare("SELECT COUNT(*) FROM poi_visits");
    stmt.step();
    report.visits = static_cast<std::size_t>(stmt.column_int64(0));
  }
  {
    auto stmt = db.prepare(
        "SELECT COUNT(*) FROM poi_visits v LEFT JOIN poi_properties p "
        "ON p.user = v.user AND p.poi_id = v.poi_id WHERE p.poi_id IS NULL");
    stmt.step();
    report.orphan_visits = static_cast<std::size_t>(stmt.column_int64(0));
  }
  auto stmt = db.prepare("SELECT fingerprint FROM poi_properties");
  while (stmt.step()) {
    ++report.pois;
    try {
      if (decode_fingerprint(stmt.column_text(0)).empty()) ++report.bad_fingerprints;
    } catch (const Error&) {
      ++report.bad_fingerprints;
    }
  }
  return report;
}

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows,
                       Timestamp utc_offset) {
  out << "poi_id,label,start,end\n";
  for (const auto& row : rows) {
    out << row.poi_id << ',' << csv::escape(row.label.value_or("")) << ','
        << format_hhmm(row.start, utc_offset) << ',' << format_hhmm(row.end, utc_offset) << '\n';
  }
}

}  // namespace wifipoi
