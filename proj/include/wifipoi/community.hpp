#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "wifipoi/model.hpp"
#include "wifipoi/similarity.hpp"

namespace wifipoi {

struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  double weight = 0.0;
};

/// Undirected weighted graph over POI nodes. No self loops, at most one edge
/// per pair.
class PoiGraph {
 public:
  explicit PoiGraph(std::size_t node_count = 0);

  /// Throws InvalidParams on self loops, repeated pairs, bad indices or
  /// non-positive weights.
  void add_edge(std::size_t u, std::size_t v, double weight);

  std::size_t node_count() const noexcept { return adjacency_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const std::pair<std::size_t, double>> neighbours(std::size_t node) const {
    return adjacency_[node];
  }
  /// Sum of weights of edges incident to `node`.
  double degree(std::size_t node) const;
  double total_weight() const noexcept { return total_weight_; }

  /// Number of candidate pairs that were scored when the graph was built
  /// from fingerprints.
  std::size_t candidate_pairs = 0;

 private:
  std::vector<std::vector<std::pair<std::size_t, double>>> adjacency_;
  std::vector<Edge> edges_;
  double total_weight_ = 0.0;
};

/// Scores all h(h-1)/2 pairs and keeps those with similarity >= threshold,
/// weighted by the similarity. Throws TooFewNodes.
PoiGraph build_graph(std::span<const Fingerprint> fps, SimilarityScore threshold);

struct Partition {
  /// Community of each node, numbered 0.. in order of first appearance.
  std::vector<int> community;
  double modularity = 0.0;

  std::size_t community_count() const;
};

/// Newman modularity with resolution 1:
///   Q = sum_c [ in_c / 2m - (tot_c / 2m)^2 ]
/// where in_c counts internal edge weight twice and tot_c sums degrees.
/// Zero for an edgeless graph. Throws PartitionMismatch.
double modularity(const PoiGraph& graph, std::span<const int> community);

/// Renumbers communities 0.. by first appearance.
std::vector<int> canonical_communities(std::span<const int> community);

struct LouvainMove {
  std::size_t level = 0;
  /// Node of the level graph (an original node at level 0).
  std::size_t node = 0;
  int from = 0;
  int to = 0;
  /// Modularity gain of the move, always > 0.
  double gain = 0.0;
  /// Community of every original node right after the move.
  std::span<const int> membership;
};

struct LouvainOptions {
  /// Empty: nodes visited in index order. Otherwise the order of each pass is
  /// shuffled with this seed.
  std::optional<std::uint64_t> seed;
  /// Minimum gain for a move to count as an improvement.
  double min_gain = 1e-12;
  std::function<void(const LouvainMove&)> on_move;
};

/// Two-phase Louvain: local moves to the neighbouring community with the
/// largest positive gain until none remains, then aggregation into
/// super-nodes, repeated until a level makes no move. Throws EmptyGraph.
Partition louvain(const PoiGraph& graph, const LouvainOptions& options = {});

struct SweepRow {
  SimilarityScore threshold = 0.0;
  double modularity = 0.0;
  std::size_t edges = 0;
  std::size_t communities = 0;
};

/// build_graph + louvain per threshold. Errors from louvain propagate.
std::vector<SweepRow> threshold_sweep(std::span<const Fingerprint> fps,
                                      std::span<const SimilarityScore> thresholds,
                                      const LouvainOptions& options = {});

/// `i j weight` per line.
void write_edge_list(std::ostream& out, const PoiGraph& graph);

/// CSV with header `threshold,modularity`.
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace wifipoi
