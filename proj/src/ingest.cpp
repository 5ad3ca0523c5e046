#include "wifipoi/ingest.hpp"

#include <zlib.h>

#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "sqlite_db.hpp"
#include "wifipoi/csv.hpp"
#include "wifipoi/error.hpp"

namespace wifipoi {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ScanResult decode_line(std::string_view line, std::size_t line_no, std::string& device,
                       bool& have_device) {
  const auto malformed = [&](const std::string& why) {
    return Error(ErrorCode::MalformedLine, why, line_no);
  };
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::parse_error& e) {
    throw malformed(e.what());
  }
  if (!doc.is_object() || doc.size() != 3 || !doc.contains("t") || !doc.contains("dev") ||
      !doc.contains("aps")) {
    throw malformed("expected an object with keys t, dev, aps");
  }
  const auto& t = doc["t"];
  const auto& dev = doc["dev"];
  const auto& aps = doc["aps"];
  if (!t.is_number_integer()) throw malformed("t must be an integer");
  if (!dev.is_string()) throw malformed("dev must be a string");
  if (!aps.is_array()) throw malformed("aps must be an array");

  const auto& dev_text = dev.get_ref<const std::string&>();
  if (!have_device) {
    device = dev_text;
    have_device = true;
  } else if (dev_text != device) {
    throw malformed("device changes from '" + device + "' to '" + dev_text + "'");
  }

  ScanResult scan;
  scan.timestamp = t.get<Timestamp>();
  scan.observations.reserve(aps.size());
  for (const auto& ap : aps) {
    if (!ap.is_array() || ap.size() != 2 || !ap[0].is_string() || !ap[1].is_number_integer()) {
      throw malformed("each AP must be [\"mac\", rssi]");
    }
    MacAddress mac;
    try {
      mac = MacAddress::parse(ap[0].get_ref<const std::string&>());
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedMac, e.what(), line_no);
    }
    const auto rssi = ap[1].get<std::int64_t>();
    if (rssi < kMinRssi || rssi >= kMaxRssiExclusive) {
      throw Error(ErrorCode::RssiOutOfRange, "rssi " + std::to_string(rssi) + " outside [-100, 0)",
                  line_no);
    }
    scan.observations.push_back({mac, static_cast<int>(rssi)});
  }
  if (!scan.observations.empty()) scan = validate_scan(scan);
  return scan;
}

[[noreturn]] void zlib_failure(const z_stream& zs, std::string_view what) {
  std::string message(what);
  if (zs.msg != nullptr) {
    message += ": ";
    message += zs.msg;
  }
  throw Error(ErrorCode::CorruptStream, message);
}

}  // namespace

std::string encode_log(const ScanLog& log) {
  std::string out;
  for (const auto& scan : log.entries) {
    ordered_json line;
    line["t"] = scan.timestamp;
    line["dev"] = log.device;
    auto aps = ordered_json::array();
    for (const auto& obs : scan.observations) aps.push_back({obs.mac.str(), obs.rssi});
    line["aps"] = std::move(aps);
    out += line.dump();
    out.push_back('\n');
  }
  return out;
}

ScanLog decode_log(std::string_view bytes, std::string user) {
  ScanLog log;
  log.user = std::move(user);
  bool have_device = false;
  std::size_t line_no = 0;
  while (!bytes.empty()) {
    ++line_no;
    const auto cut = bytes.find('\n');
    std::string_view line = bytes.substr(0, cut);
    bytes = cut == std::string_view::npos ? std::string_view{} : bytes.substr(cut + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    log.entries.push_back(decode_line(line, line_no, log.device, have_device));
  }
  normalize_log(log);
  return log;
}

std::string compress_batch(std::string_view bytes) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    zlib_failure(zs, "deflateInit2");
  }
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
  zs.avail_in = static_cast<uInt>(bytes.size());
  std::string out;
  char buf[16384];
  int rc = Z_OK;
  do {
    zs.next_out = reinterpret_cast<Bytef*>(buf);
    zs.avail_out = sizeof buf;
    rc = deflate(&zs, Z_FINISH);
    if (rc == Z_STREAM_ERROR) {
      deflateEnd(&zs);
      zlib_failure(zs, "deflate");
    }
    out.append(buf, sizeof buf - zs.avail_out);
  } while (rc != Z_STREAM_END);
  deflateEnd(&zs);
  return out;
}

std::string decompress_batch(std::string_view bytes) {
  if (!looks_gzipped(bytes)) throw Error(ErrorCode::CorruptStream, "not a gzip stream");
  z_stream zs{};
  if (inflateInit2(&zs, 15 + 16) != Z_OK) zlib_failure(zs, "inflateInit2");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
  zs.avail_in = static_cast<uInt>(bytes.size());
  std::string out;
  char buf[16384];
  for (;;) {
    zs.next_out = reinterpret_cast<Bytef*>(buf);
    zs.avail_out = sizeof buf;
    const int rc = inflate(&zs, Z_NO_FLUSH);
    out.append(buf, sizeof buf - zs.avail_out);
    if (rc == Z_STREAM_END) {
      if (zs.avail_in == 0) break;
      // Another member follows.
      if (inflateReset(&zs) != Z_OK) {
        inflateEnd(&zs);
        zlib_failure(zs, "inflateReset");
      }
      continue;
    }
    if (rc == Z_OK) continue;
    if (rc == Z_BUF_ERROR && zs.avail_in == 0) {
      inflateEnd(&zs);
      throw Error(ErrorCode::CorruptStream, "truncated gzip stream");
    }
    if (rc == Z_BUF_ERROR) continue;
    inflateEnd(&zs);
    zlib_failure(zs, "inflate");
  }
  inflateEnd(&zs);
  return out;
}

bool looks_gzipped(std::string_view bytes) noexcept {
  return bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1f &&
         static_cast<unsigned char>(bytes[1]) == 0x8b;
}

std::string read_file(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) {
    throw Error(ErrorCode::Io, "'" + path.string() + "' is a directory");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "short write to '" + path.string() + "'");
}

ScanLog load_scan_file(const std::filesystem::path& path, std::string user) {
  std::string bytes = read_file(path);
  const bool gz_name = path.extension() == ".gz";
  if (gz_name || looks_gzipped(bytes)) bytes = decompress_batch(bytes);
  return decode_log(bytes, std::move(user));
}

std::string user_from_filename(const std::filesystem::path& path) {
  std::string name = path.filename().string();
  for (const std::string_view suffix : {".gz", ".scan"}) {
    if (name.size() > suffix.size() && name.ends_with(suffix)) {
      name.erase(name.size() - suffix.size());
    }
  }
  return name;
}

struct RawStore::Impl {
  explicit Impl(const std::string& path) : db(path) {
    db.exec(R"sql(
CREATE TABLE IF NOT EXISTS raw_observations (
  user   TEXT    NOT NULL,
  t      INTEGER NOT NULL,
  mac    TEXT    NOT NULL,
  rssi   INTEGER NOT NULL,
  device TEXT    NOT NULL,
  PRIMARY KEY (user, t, mac)
) WITHOUT ROWID;
)sql");
  }

  sqlite::Database db;
  FaultHook hook;
};

RawStore::RawStore(const std::string& path) : impl_(std::make_unique<Impl>(path)) {}
RawStore::~RawStore() = default;
RawStore::RawStore(RawStore&&) noexcept = default;
RawStore& RawStore::operator=(RawStore&&) noexcept = default;

void RawStore::set_fault_hook(FaultHook hook) { impl_->hook = std::move(hook); }

IngestReport RawStore::store_raw(const ScanLog& log) {
  IngestReport report;
  sqlite::Transaction tx(impl_->db);
  auto insert = impl_->db.prepare(
      "INSERT OR IGNORE INTO raw_observations (user, t, mac, rssi, device) "
      "VALUES (?1, ?2, ?3, ?4, ?5)");
  for (const auto& scan : log.entries) {
    for (const auto& obs : scan.observations) {
      insert.reset();
      insert.bind(1, log.user)
          .bind(2, scan.timestamp)
          .bind(3, obs.mac.str())
          .bind(4, static_cast<std::int64_t>(obs.rssi))
          .bind(5, log.device)
          .run();
      if (impl_->db.changes() > 0) {
        ++report.added;
      } else {
        ++report.skipped;
      }
    }
    if (impl_->hook) impl_->hook("scan-written");
  }
  tx.commit();
  return report;
}

ScanLog RawStore::load_log(std::string_view user, std::optional<DayWindow> window) const {
  ScanLog log;
  log.user = std::string(user);
  auto stmt = impl_->db.prepare(
      "SELECT t, mac, rssi, device FROM raw_observations "
      "WHERE user = ?1 AND t >= ?2 AND t < ?3 ORDER BY t, mac");
  stmt.bind(1, user)
      .bind(2, window ? window->begin : std::numeric_limits<std::int64_t>::min())
      .bind(3, window ? window->end : std::numeric_limits<std::int64_t>::max());
  while (stmt.step()) {
    const Timestamp t = stmt.column_int64(0);
    if (log.entries.empty() || log.entries.back().timestamp != t) {
      log.entries.push_back({t, {}});
    }
    if (log.device.empty()) log.device = stmt.column_text(3);
    log.entries.back().observations.push_back(
        {MacAddress::parse(stmt.column_text(1)), static_cast<int>(stmt.column_int64(2))});
  }
  return log;
}

std::vector<std::string> RawStore::users() const {
  std::vector<std::string> out;
  auto stmt = impl_->db.prepare("SELECT DISTINCT user FROM raw_observations ORDER BY user");
  while (stmt.step()) out.push_back(stmt.column_text(0));
  return out;
}

bool RawStore::has_user(std::string_view user) const {
  auto stmt = impl_->db.prepare("SELECT 1 FROM raw_observations WHERE user = ?1 LIMIT 1");
  stmt.bind(1, user);
  return stmt.step();
}

std::size_t RawStore::row_count() const {
  auto stmt = impl_->db.prepare("SELECT COUNT(*) FROM raw_observations");
  stmt.step();
  return static_cast<std::size_t>(stmt.column_int64(0));
}

void RawStore::export_csv(std::ostream& out) const {
  out << "user,t,mac,rssi\n";
  auto stmt = impl_->db.prepare(
      "SELECT user, t, mac, rssi FROM raw_observations ORDER BY user, t, mac");
  while (stmt.step()) {
    out << csv::escape(stmt.column_text(0)) << ',' << stmt.column_int64(1) << ','
        << stmt.column_text(2) << ',' << stmt.column_int64(3) << '\n';
  }
}

std::string RawBatch::payload() const { return compress_batch(encode_log(fragment)); }

std::vector<RawBatch> plan_uploads(const ScanLog& log, Timestamp period,
                                   std::span<const bool> wifi_available) {
  if (period <= 0) throw Error(ErrorCode::InvalidParams, "upload period must be positive");
  std::vector<RawBatch> batches;
  if (log.entries.empty()) return batches;

  const Timestamp origin = log.entries.front().timestamp;
  auto connected = [&](std::size_t slot) {
    return slot >= wifi_available.size() || wifi_available[slot];
  };
  for (const auto& scan : log.entries) {
    const auto slot = static_cast<std::size_t>((scan.timestamp - origin) / period);
    const Timestamp begin = origin + static_cast<Timestamp>(slot) * period;
    if (batches.empty() || batches.back().span_begin != begin) {
      RawBatch batch;
      batch.device = log.device;
      batch.fragment.user = log.user;
      batch.fragment.device = log.device;
      batch.span_begin = begin;
      batch.span_end = begin + period;
      std::size_t upload_slot = slot;
      while (!connected(upload_slot)) ++upload_slot;
      batch.upload_at = origin + static_cast<Timestamp>(upload_slot + 1) * period;
      batches.push_back(std::move(batch));
    }
    batches.back().fragment.entries.push_back(scan);
  }
  return batches;
}

}  // namespace wifipoi
