// Shared generators and brute-force reference implementations for the tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "wifipoi/clustering.hpp"
#include "wifipoi/community.hpp"
#include "wifipoi/model.hpp"
#include "wifipoi/similarity.hpp"
#include "wifipoi/timeutil.hpp"

namespace testing_support {

using namespace wifipoi;

inline MacAddress mac(int i) { return MacAddress::from_index(static_cast<std::uint64_t>(i)); }

inline Fingerprint fp(std::initializer_list<std::pair<int, double>> values) {
  std::vector<FingerprintEntry> entries;
  for (const auto& [m, r] : values) entries.push_back({mac(m), r, 1});
  return Fingerprint(std::move(entries));
}

inline Fingerprint random_fingerprint(std::mt19937_64& rng, int mac_pool = 30) {
  std::uniform_int_distribution<int> size(1, std::min(mac_pool, 25));
  std::uniform_int_distribution<int> rss(-100, -1);
  std::vector<int> ids(static_cast<std::size_t>(mac_pool));
  for (int i = 0; i < mac_pool; ++i) ids[static_cast<std::size_t>(i)] = i + 1;
  std::shuffle(ids.begin(), ids.end(), rng);
  std::vector<FingerprintEntry> entries;
  const int n = size(rng);
  for (int k = 0; k < n; ++k) {
    entries.push_back({mac(ids[static_cast<std::size_t>(k)]), static_cast<double>(rss(rng)), 1});
  }
  return Fingerprint(std::move(entries));
}

// Direct evaluation of the cosine definition over string-keyed maps.
inline double naive_cosine(const Fingerprint& a, const Fingerprint& b) {
  std::map<std::string, double> ma, mb;
  for (const auto& e : a.entries()) ma[e.mac.str()] = e.mean_rssi;
  for (const auto& e : b.entries()) mb[e.mac.str()] = e.mean_rssi;
  long double num = 0, da = 0, db = 0;
  for (const auto& [k, v] : ma) {
    da += static_cast<long double>(v) * v;
    if (auto it = mb.find(k); it != mb.end()) num += static_cast<long double>(v) * it->second;
  }
  for (const auto& [k, v] : mb) db += static_cast<long double>(v) * v;
  return static_cast<double>(num / (std::sqrt(da) * std::sqrt(db)));
}

// Scans drawn around a few "rooms" plus scattered outliers.
inline std::vector<Fingerprint> random_scan_cloud(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> room_count(1, 5);
  const int rooms = room_count(rng);
  std::vector<std::vector<std::pair<int, double>>> bases;
  std::uniform_real_distribution<double> base_rss(-90, -40);
  for (int r = 0; r < rooms; ++r) {
    std::vector<std::pair<int, double>> base;
    for (int k = 0; k < 6; ++k) base.push_back({r * 4 + k + 1, base_rss(rng)});
    bases.push_back(std::move(base));
  }
  std::uniform_int_distribution<int> pick(0, rooms - 1);
  std::bernoulli_distribution outlier(0.15), keep(0.7);
  std::normal_distribution<double> noise(0.0, 6.0);
  std::vector<Fingerprint> out;
  while (out.size() < n) {
    if (outlier(rng)) {
      out.push_back(random_fingerprint(rng, 40));
      continue;
    }
    std::vector<FingerprintEntry> entries;
    for (const auto& [m, r] : bases[static_cast<std::size_t>(pick(rng))]) {
      if (!keep(rng)) continue;
      entries.push_back({mac(m), std::clamp(std::round(r + noise(rng)), -100.0, -1.0), 1});
    }
    if (entries.empty()) continue;
    out.push_back(Fingerprint(std::move(entries)));
  }
  return out;
}

// Reference DBSCAN: clusters are connected components of core points, numbered
// by their lowest core index; a border point joins the lowest-numbered cluster
// among its core neighbours.
inline std::vector<int> oracle_dbscan(const std::vector<Fingerprint>& pts, double eps,
                                      std::size_t min_pts) {
  const std::size_t n = pts.size();
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n));
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t deg = 0;
    for (std::size_t j = 0; j < n; ++j) {
      adj[i][j] = cosine_similarity(pts[i], pts[j]) >= eps;
      deg += adj[i][j] ? 1 : 0;
    }
    core[i] = deg >= min_pts;
  }
  std::vector<int> label(n, 0);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i] || label[i] != 0) continue;
    ++next;
    std::vector<std::size_t> stack{i};
    label[i] = next;
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      for (std::size_t v = 0; v < n; ++v) {
        if (adj[u][v] && core[v] && label[v] == 0) {
          label[v] = next;
          stack.push_back(v);
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    int best = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (core[j] && adj[j][i] && (best == 0 || label[j] < best)) best = label[j];
    }
    label[i] = best;
  }
  return label;
}

inline std::vector<int> relabel_first_seen(const std::vector<int>& labels) {
  std::map<int, int> ids;
  std::vector<int> out;
  for (const int l : labels) {
    if (l == 0) {
      out.push_back(0);
      continue;
    }
    auto [it, fresh] = ids.emplace(l, static_cast<int>(ids.size()) + 1);
    out.push_back(it->second);
  }
  return out;
}

// Q from the dense adjacency matrix definition.
inline double oracle_modularity(const PoiGraph& g, const std::vector<int>& c) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (const auto& e : g.edges()) {
    a[e.u][e.v] += e.weight;
    a[e.v][e.u] += e.weight;
  }
  std::vector<double> k(n, 0.0);
  double two_m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) k[i] += a[i][j];
    two_m += k[i];
  }
  if (two_m == 0.0) return 0.0;
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (c[i] == c[j]) q += a[i][j] - k[i] * k[j] / two_m;
    }
  }
  return q / two_m;
}

// Visits every set partition of {0..n-1} as a restricted growth string.
inline void for_each_partition(std::size_t n, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> c(n, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int max_used) {
    if (i == n) {
      f(c);
      return;
    }
    for (int v = 0; v <= max_used + 1; ++v) {
      c[i] = v;
      rec(i + 1, std::max(max_used, v));
    }
  };
  if (n == 0) return;
  c[0] = 0;
  rec(1, 0);
}

inline double optimal_modularity(const PoiGraph& g) {
  double best = -1.0;
  for_each_partition(g.node_count(), [&](const std::vector<int>& c) {
    best = std::max(best, oracle_modularity(g, c));
  });
  return best;
}

inline PoiGraph random_graph(std::mt19937_64& rng, std::size_t n, double density) {
  PoiGraph g(n);
  std::bernoulli_distribution edge(density);
  std::uniform_real_distribution<double> w(0.05, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (edge(rng)) g.add_edge(i, j, w(rng));
    }
  }
  return g;
}

inline PoiGraph two_cliques(double bridge) {
  PoiGraph g(8);
  for (std::size_t base : {0u, 4u}) {
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = i + 1; j < 4; ++j) g.add_edge(base + i, base + j, 1.0);
    }
  }
  g.add_edge(3, 4, bridge);
  return g;
}

// Per-test scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::uint64_t counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("wifipoi-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
