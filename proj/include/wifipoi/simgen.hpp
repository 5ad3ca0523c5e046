#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wifipoi/model.hpp"

namespace wifipoi::sim {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point a, Point b);

struct AccessPoint {
  MacAddress mac;
  Point position;
  /// RSS at the 1 m reference distance, dBm.
  double tx_power = -40.0;
  double path_loss_exponent = 2.5;
};

struct Place {
  std::string label;
  Point position;
  /// Scans inside a visit are taken uniformly within this radius (m).
  double radius = 2.0;
  /// Optional grouping used as planted ground truth for community tests.
  std::string zone;
};

struct Environment {
  std::vector<AccessPoint> aps;
  std::vector<Place> places;

  const Place* find_place(std::string_view label) const;
  /// Throws InvalidParams on duplicate AP MACs or duplicate place labels.
  void validate() const;
};

struct ItineraryEntry {
  std::string place;
  Timestamp arrival = 0;
  Timestamp departure = 0;
};

/// Stays in time order; entries must not overlap.
using Itinerary = std::vector<ItineraryEntry>;

struct GroundTruthVisit {
  std::string label;
  Timestamp start = 0;
  Timestamp end = 0;

  friend bool operator==(const GroundTruthVisit&, const GroundTruthVisit&) = default;
};

struct TraceOptions {
  Timestamp scan_interval = 300;
  double noise_sigma = 2.0;
  /// APs modelled below this RSS are absent from the scan.
  double visibility_floor = -95.0;
  /// Between stays the user wanders at random points at least this far (m)
  /// from every place centre.
  double transit_clearance = 15.0;
};

struct Trace {
  ScanLog log;
  std::vector<GroundTruthVisit> truth;
};

/// Log-distance path loss: tx - 10 * gamma * log10(d / 1 m) + N(0, sigma),
/// rounded to integer dBm and clamped to [-100, -1]. Throws ZeroDistance.
int rss_at(const AccessPoint& ap, Point position, double noise_sigma, std::mt19937_64& rng);
int rss_at(const AccessPoint& ap, Point position, double noise_sigma, std::uint64_t seed);

/// One scan every scan_interval from the first arrival until the last
/// departure. Scans with no visible AP are omitted. Deterministic per seed.
/// Throws UnknownPlace and InvalidItinerary.
Trace generate_trace(const Environment& env, const Itinerary& itinerary,
                     const TraceOptions& options, std::uint64_t seed, std::string user = "user",
                     std::string device = "sim");

void validate_itinerary(const Itinerary& itinerary);

struct UserPlan {
  std::string user;
  std::string device;
  Itinerary itinerary;
};

struct Scenario {
  std::string name;
  Timestamp start = 0;  // 00:00 UTC of the first day
  TraceOptions trace;
  Environment env;
  std::vector<UserPlan> users;
};

/// Parses the key-value scenario format (see docs/scenario-format.md).
/// Throws ConfigParse with the offending line.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

/// One trace per user, in scenario order. User i draws from its own stream
/// derived from `seed`.
std::vector<Trace> run_scenario(const Scenario& scenario, std::uint64_t seed);

/// Ground truth rows split at local midnight. CSV header
/// `user,day,label,start,end` with HH:mm times.
void write_truth_csv(std::ostream& out, std::string_view user,
                     std::span<const GroundTruthVisit> truth, Timestamp utc_offset = 0,
                     bool header = true);

}  // namespace wifipoi::sim
