#include "wifipoi/clustering.hpp"

#include "wifipoi/error.hpp"
#include "wifipoi/similarity.hpp"

namespace wifipoi {

std::vector<std::size_t> find_neighbours(const Fingerprint& point,
                                         std::span<const Fingerprint> all,
                                         double eps) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i].empty()) continue;
    if (cosine_similarity(point, all[i]) >= eps) out.push_back(i);
  }
  return out;
}

std::vector<ClusterLabel> dbscan(std::span<const Fingerprint> points,
                                 const ClusterParams& params) {
  params.validate();
  if (points.empty()) throw Error(ErrorCode::EmptyLog, "nothing to cluster");

  const std::size_t n = points.size();
  std::vector<ClusterLabel> labels(n, ClusterLabel::noise());
  std::vector<bool> visited(n, false);
  int next_id = 0;

  for (std::size_t seed = 0; seed < n; ++seed) {
    if (visited[seed] || points[seed].empty()) continue;
    visited[seed] = true;
    std::vector<std::size_t> frontier =
        find_neighbours(points[seed], points, params.epsilon);
    if (frontier.size() < params.min_pts) continue;

    const ClusterLabel id = ClusterLabel::cluster(++next_id);
    labels[seed] = id;
    // The frontier grows while we walk it; every core point found along the
    // way contributes its own neighbourhood.
    for (std::size_t k = 0; k < frontier.size(); ++k) {
      const std::size_t q = frontier[k];
      if (!visited[q]) {
        visited[q] = true;
        auto reach = find_neighbours(points[q], points, params.epsilon);
        if (reach.size() >= params.min_pts) {
          frontier.insert(frontier.end(), reach.begin(), reach.end());
        }
      }
      if (labels[q].is_noise()) labels[q] = id;
    }
  }
  return labels;
}

std::vector<ClusterLabel> dbscan(const ScanLog& log, const ClusterParams& params) {
  if (log.entries.empty()) {
    throw Error(ErrorCode::EmptyLog, "scan log of '" + log.user + "' is empty");
  }
  std::vector<Fingerprint> points;
  points.reserve(log.entries.size());
  for (const auto& scan : log.entries) points.push_back(Fingerprint::from_scan(scan));
  return dbscan(points, params);
}

std::vector<VisitInterval> segment_visits(const ScanLog& log,
                                          std::span<const ClusterLabel> labels,
                                          const ClusterParams& params) {
  if (labels.size() != log.entries.size()) {
    throw Error(ErrorCode::LabelLengthMismatch,
                std::to_string(labels.size()) + " labels for " +
                    std::to_string(log.entries.size()) + " scans");
  }
  const Timestamp max_gap = 2 * params.scan_interval;
  std::vector<VisitInterval> out;
  bool open = false;

  auto close = [&] {
    if (!open) return;
    out.back().sub_minimal = out.back().scan_count < params.min_pts;
    open = false;
  };

  for (std::size_t i = 0; i < labels.size(); ++i) {
    const ClusterLabel label = labels[i];
    const Timestamp t = log.entries[i].timestamp;
    if (label.is_noise()) {
      close();
      continue;
    }
    if (open && out.back().cluster == label.id() && t - out.back().end <= max_gap) {
      out.back().end = t;
      ++out.back().scan_count;
      continue;
    }
    close();
    out.push_back({label.id(), t, t, 1, false});
    open = true;
  }
  close();
  return out;
}

}  // namespace wifipoi
