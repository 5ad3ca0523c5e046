#include "wifipoi/community.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_map>

#include "wifipoi/error.hpp"

namespace wifipoi {
namespace {

std::string shortest(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

// Graph of one Louvain level. Self loops carry A_ii, which counts the
// internal weight of the merged community twice.
struct LevelGraph {
  std::vector<std::vector<std::pair<std::size_t, double>>> adjacency;
  std::vector<double> self_loop;
  std::vector<double> degree;
  std::vector<std::vector<std::size_t>> members;  // original nodes

  std::size_t size() const { return adjacency.size(); }
};

LevelGraph level_zero(const PoiGraph& graph) {
  const std::size_t n = graph.node_count();
  LevelGraph g;
  g.adjacency.resize(n);
  g.self_loop.assign(n, 0.0);
  g.degree.resize(n);
  g.members.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto nb = graph.neighbours(i);
    g.adjacency[i].assign(nb.begin(), nb.end());
    std::sort(g.adjacency[i].begin(), g.adjacency[i].end());
    g.degree[i] = graph.degree(i);
    g.members[i] = {i};
  }
  return g;
}

LevelGraph aggregate(const LevelGraph& g, std::span<const int> community, int count) {
  LevelGraph next;
  const auto k = static_cast<std::size_t>(count);
  next.adjacency.resize(k);
  next.self_loop.assign(k, 0.0);
  next.degree.assign(k, 0.0);
  next.members.resize(k);
  std::vector<std::unordered_map<std::size_t, double>> sparse(k);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto ci = static_cast<std::size_t>(community[i]);
    next.self_loop[ci] += g.self_loop[i];
    next.degree[ci] += g.degree[i];
    next.members[ci].insert(next.members[ci].end(), g.members[i].begin(), g.members[i].end());
    for (const auto& [j, w] : g.adjacency[i]) {
      const auto cj = static_cast<std::size_t>(community[j]);
      if (ci == cj) {
        next.self_loop[ci] += w;
      } else {
        sparse[ci][cj] += w;
      }
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    next.adjacency[c].assign(sparse[c].begin(), sparse[c].end());
    std::sort(next.adjacency[c].begin(), next.adjacency[c].end());
    std::sort(next.members[c].begin(), next.members[c].end());
  }
  return next;
}

}  // namespace

PoiGraph::PoiGraph(std::size_t node_count) : adjacency_(node_count) {}

void PoiGraph::add_edge(std::size_t u, std::size_t v, double weight) {
  if (u >= node_count() || v >= node_count()) {
    throw Error(ErrorCode::InvalidParams, "edge endpoint out of range");
  }
  if (u == v) throw Error(ErrorCode::InvalidParams, "self loops are not allowed");
  if (!(weight > 0.0)) throw Error(ErrorCode::InvalidParams, "edge weight must be positive");
  for (const auto& [n, w] : adjacency_[u]) {
    if (n == v) throw Error(ErrorCode::InvalidParams, "duplicate edge");
  }
  adjacency_[u].emplace_back(v, weight);
  adjacency_[v].emplace_back(u, weight);
  edges_.push_back({std::min(u, v), std::max(u, v), weight});
  total_weight_ += weight;
}

double PoiGraph::degree(std::size_t node) const {
  double sum = 0.0;
  for (const auto& [n, w] : adjacency_[node]) sum += w;
  return sum;
}

PoiGraph build_graph(std::span<const Fingerprint> fps, SimilarityScore threshold) {
  if (fps.size() < 2) {
    throw Error(ErrorCode::TooFewNodes,
                "community detection needs at least 2 POI, got " + std::to_string(fps.size()));
  }
  PoiGraph graph(fps.size());
  const auto pairs = pairwise_similarities(fps);
  graph.candidate_pairs = pairs.size();
  for (const auto& p : pairs) {
    if (p.score >= threshold && p.score > 0.0) graph.add_edge(p.i, p.j, p.score);
  }
  return graph;
}

std::size_t Partition::community_count() const {
  if (community.empty()) return 0;
  return static_cast<std::size_t>(*std::max_element(community.begin(), community.end())) + 1;
}

std::vector<int> canonical_communities(std::span<const int> community) {
  std::unordered_map<int, int> renumber;
  std::vector<int> out;
  out.reserve(community.size());
  for (const int c : community) {
    const auto [it, inserted] = renumber.try_emplace(c, static_cast<int>(renumber.size()));
    out.push_back(it->second);
  }
  return out;
}

double modularity(const PoiGraph& graph, std::span<const int> community) {
  if (community.size() != graph.node_count()) {
    throw Error(ErrorCode::PartitionMismatch,
                std::to_string(community.size()) + " labels for " +
                    std::to_string(graph.node_count()) + " nodes");
  }
  const double two_m = 2.0 * graph.total_weight();
  if (two_m == 0.0) return 0.0;
  const auto canonical = canonical_communities(community);
  const std::size_t k = canonical.empty()
                            ? 0
                            : static_cast<std::size_t>(
                                  *std::max_element(canonical.begin(), canonical.end())) + 1;
  std::vector<double> inside(k, 0.0);
  std::vector<double> total(k, 0.0);
  for (const auto& e : graph.edges()) {
    if (canonical[e.u] == canonical[e.v]) inside[static_cast<std::size_t>(canonical[e.u])] += 2.0 * e.weight;
  }
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    total[static_cast<std::size_t>(canonical[i])] += graph.degree(i);
  }
  double q = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const double share = total[c] / two_m;
    q += inside[c] / two_m - share * share;
  }
  return q;
}

Partition louvain(const PoiGraph& graph, const LouvainOptions& options) {
  if (graph.edges().empty()) throw Error(ErrorCode::EmptyGraph, "graph has no edges");

  const double m = graph.total_weight();
  std::vector<int> membership(graph.node_count());
  std::iota(membership.begin(), membership.end(), 0);
  std::mt19937_64 rng(options.seed.value_or(0));

  // Single-node moves until no positive gain remains.
  auto local_moves = [&](const LevelGraph& g, std::size_t level, std::vector<int>& community) {
    const std::size_t n = g.size();
    std::vector<double> tot(n, 0.0);
    std::vector<std::size_t> size(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      tot[static_cast<std::size_t>(community[i])] += g.degree[i];
      ++size[static_cast<std::size_t>(community[i])];
    }
    std::size_t next_free = 0;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> link(n, 0.0);
    std::vector<int> touched;
    bool moved_any = false;

    for (bool improved = true; improved;) {
      improved = false;
      if (options.seed) std::shuffle(order.begin(), order.end(), rng);
      for (const std::size_t i : order) {
        const int own = community[i];
        const double k_i = g.degree[i];
        touched.clear();
        for (const auto& [j, w] : g.adjacency[i]) {
          const int c = community[j];
          if (link[static_cast<std::size_t>(c)] == 0.0) touched.push_back(c);
          link[static_cast<std::size_t>(c)] += w;
        }
        tot[static_cast<std::size_t>(own)] -= k_i;
        // Gain of inserting the isolated node into c, in units of Q.
        auto gain = [&](int c) {
          return (link[static_cast<std::size_t>(c)] -
                  tot[static_cast<std::size_t>(c)] * k_i / (2.0 * m)) /
                 m;
        };
        const double stay = gain(own);
        int best = own;
        double best_gain = stay;
        for (const int c : touched) {
          const double g_c = gain(c);
          if (g_c > best_gain) {
            best = c;
            best_gain = g_c;
          }
        }
        // Leaving for an empty community gains nothing on insertion.
        if (0.0 > best_gain && size[static_cast<std::size_t>(own)] > 1) {
          while (size[next_free % n] != 0) ++next_free;
          best = static_cast<int>(next_free % n);
          best_gain = 0.0;
        }
        if (best != own && best_gain - stay <= options.min_gain) best = own;
        tot[static_cast<std::size_t>(best)] += k_i;
        --size[static_cast<std::size_t>(own)];
        ++size[static_cast<std::size_t>(best)];
        community[i] = best;
        for (const int c : touched) link[static_cast<std::size_t>(c)] = 0.0;

        if (best != own) {
          improved = true;
          moved_any = true;
          for (const std::size_t o : g.members[i]) membership[o] = best;
          if (options.on_move) {
            options.on_move({level, i, own, best, best_gain - stay, membership});
          }
        }
      }
    }
    return moved_any;
  };

  // Local moves then aggregation, level after level, until a level that
  // started from singletons makes no move.
  auto climb = [&](LevelGraph g, std::vector<int> community, bool singletons) {
    bool moved_any = false;
    for (std::size_t level = 0;; ++level) {
      for (std::size_t i = 0; i < g.size(); ++i) {
        for (const std::size_t o : g.members[i]) membership[o] = community[i];
      }
      const bool moved = local_moves(g, level, community);
      moved_any = moved_any || moved;
      if (!moved && singletons) break;
      const auto canonical = canonical_communities(community);
      const auto count = static_cast<std::size_t>(
          *std::max_element(canonical.begin(), canonical.end()) + 1);
      if (count == g.size()) break;
      g = aggregate(g, canonical, static_cast<int>(count));
      community.resize(count);
      std::iota(community.begin(), community.end(), 0);
      singletons = true;
    }
    return moved_any;
  };

  // Aggregation never splits a community again, so later rounds restart on
  // the original nodes from the partition reached so far.
  const LevelGraph base = level_zero(graph);
  for (bool singletons = true; climb(base, membership, singletons); singletons = false) {
  }

  Partition result;
  result.community = canonical_communities(membership);
  result.modularity = modularity(graph, result.community);
  return result;
}

std::vector<SweepRow> threshold_sweep(std::span<const Fingerprint> fps,
                                      std::span<const SimilarityScore> thresholds,
                                      const LouvainOptions& options) {
  std::vector<SweepRow> rows;
  for (const SimilarityScore threshold : thresholds) {
    const PoiGraph graph = build_graph(fps, threshold);
    const Partition partition = louvain(graph, options);
    rows.push_back({threshold, partition.modularity, graph.edges().size(),
                    partition.community_count()});
  }
  return rows;
}

void write_edge_list(std::ostream& out, const PoiGraph& graph) {
  for (const auto& e : graph.edges()) {
    out << e.u << ' ' << e.v << ' ' << shortest(e.weight) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "threshold,modularity\n";
  for (const auto& row : rows) {
    out << shortest(row.threshold) << ',' << shortest(row.modularity) << '\n';
  }
}

}  // namespace wifipoi
