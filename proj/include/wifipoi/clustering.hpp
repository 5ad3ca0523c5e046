#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wifipoi/model.hpp"

namespace wifipoi {

/// Noise, or a cluster id >= 1.
class ClusterLabel {
 public:
  constexpr ClusterLabel() = default;
  static constexpr ClusterLabel noise() { return ClusterLabel(); }
  static constexpr ClusterLabel cluster(int id) { return ClusterLabel(id); }

  constexpr bool is_noise() const noexcept { return id_ == 0; }
  constexpr int id() const noexcept { return id_; }

  friend constexpr bool operator==(ClusterLabel, ClusterLabel) = default;

 private:
  constexpr explicit ClusterLabel(int id) : id_(id) {}
  int id_ = 0;
};

struct VisitInterval {
  int cluster = 0;
  Timestamp start = 0;
  Timestamp end = 0;
  std::size_t scan_count = 0;
  /// Run holds fewer than min_pts scans; kept because the cluster itself is
  /// dense elsewhere (a short revisit).
  bool sub_minimal = false;

  friend bool operator==(const VisitInterval&, const VisitInterval&) = default;
};

/// Indices i (ascending) with cosine_similarity(point, all[i]) >= eps.
std::vector<std::size_t> find_neighbours(const Fingerprint& point,
                                         std::span<const Fingerprint> all,
                                         double eps);

/// Density clustering with cosine similarity as the neighbourhood predicate.
/// A point whose neighbourhood (itself included) holds at least min_pts
/// points is a core point; clusters are maximal sets density-reachable from
/// core points. Seeds are taken in input order, so cluster ids follow the
/// first core point of each cluster and a border point reachable from two
/// clusters joins the earlier one.
std::vector<ClusterLabel> dbscan(std::span<const Fingerprint> points,
                                 const ClusterParams& params);

/// Clusters the non-empty scans of `log`; one label per entry, empty scans
/// are labelled noise. Throws EmptyLog.
std::vector<ClusterLabel> dbscan(const ScanLog& log, const ClusterParams& params);

/// Splits each cluster into runs of consecutive scans with gaps of at most
/// 2 * scan_interval. Noise scans break runs. Output is ordered by start.
std::vector<VisitInterval> segment_visits(const ScanLog& log,
                                          std::span<const ClusterLabel> labels,
                                          const ClusterParams& params);

}  // namespace wifipoi
