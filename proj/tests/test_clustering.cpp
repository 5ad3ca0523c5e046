#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "wifipoi/clustering.hpp"
#include "wifipoi/error.hpp"

using namespace wifipoi;
using testing_support::fp;

namespace {

std::vector<int> ids(const std::vector<ClusterLabel>& labels) {
  std::vector<int> out;
  for (const auto l : labels) out.push_back(l.id());
  return out;
}

ScanLog log_from(const std::vector<Fingerprint>& fps, Timestamp step = 300) {
  ScanLog log{"u", "d", {}};
  Timestamp t = 1000;
  for (const auto& f : fps) {
    ScanResult s{t, {}};
    for (const auto& e : f.entries()) s.observations.push_back({e.mac, static_cast<int>(e.mean_rssi)});
    log.entries.push_back(s);
    t += step;
  }
  return log;
}

}  // namespace

TEST(FindNeighbours, IdenticalPointsAllIncluded) {
  const std::vector<Fingerprint> all(5, fp({{1, -50}, {2, -60}}));
  EXPECT_EQ(find_neighbours(all[2], all, 0.5), (std::vector<std::size_t>{0, 1, 2, 3, 4}));
}

TEST(FindNeighbours, DisjointPointOnlyItself) {
  std::vector<Fingerprint> all(4, fp({{1, -50}, {2, -60}}));
  all.push_back(fp({{9, -50}}));
  EXPECT_EQ(find_neighbours(all[4], all, 0.5), (std::vector<std::size_t>{4}));
}

TEST(FindNeighbours, MatchesBruteForceFilter) {
  std::mt19937_64 rng(99);
  const auto all = testing_support::random_scan_cloud(rng, 50);
  for (std::size_t i = 0; i < all.size(); ++i) {
    std::vector<std::size_t> expected;
    for (std::size_t j = 0; j < all.size(); ++j) {
      if (cosine_similarity(all[i], all[j]) >= 0.5) expected.push_back(j);
    }
    EXPECT_EQ(find_neighbours(all[i], all, 0.5), expected);
  }
}

TEST(Dbscan, SingleDenseBlob) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0, 1.5);
  std::vector<Fingerprint> desk;
  for (int i = 0; i < 12; ++i) {
    desk.push_back(fp({{1, std::round(-45 + n(rng))}, {2, std::round(-60 + n(rng))},
                       {3, std::round(-72 + n(rng))}}));
  }
  const auto labels = dbscan(desk, ClusterParams{});
  for (const auto l : labels) EXPECT_EQ(l, ClusterLabel::cluster(1));
}

TEST(Dbscan, TooFewPointsAllNoise) {
  const std::vector<Fingerprint> three(3, fp({{1, -50}}));
  for (const auto l : dbscan(three, ClusterParams{})) EXPECT_TRUE(l.is_noise());
}

TEST(Dbscan, EmptyInputThrows) {
  try {
    dbscan(std::span<const Fingerprint>{}, ClusterParams{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyLog);
  }
}

TEST(Dbscan, InvalidParamsThrow) {
  const std::vector<Fingerprint> one(1, fp({{1, -50}}));
  EXPECT_THROW(dbscan(one, ClusterParams{0.0, 4, 300}), Error);
  EXPECT_THROW(dbscan(one, ClusterParams{0.5, 0, 300}), Error);
}

TEST(Dbscan, TwoRoomsMatchOracle) {
  std::vector<Fingerprint> pts;
  for (int i = 0; i < 10; ++i) pts.push_back(fp({{1, -40.0 - i % 3}, {2, -60}, {3, -75}}));
  pts.push_back(fp({{20, -80}}));
  for (int i = 0; i < 8; ++i) pts.push_back(fp({{7, -50}, {8, -55.0 - i % 4}, {9, -70}}));
  const auto labels = ids(dbscan(pts, ClusterParams{}));
  EXPECT_EQ(labels, testing_support::oracle_dbscan(pts, 0.5, 4));
  EXPECT_EQ(labels[0], 1);
  EXPECT_EQ(labels[10], 0);
  EXPECT_EQ(labels[11], 2);
}

TEST(Dbscan, RandomInstancesMatchOracle) {
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<std::size_t> size(20, 150);
  std::uniform_real_distribution<double> eps(0.3, 0.9);
  std::uniform_int_distribution<std::size_t> mp(2, 6);
  for (int trial = 0; trial < 40; ++trial) {
    const auto pts = testing_support::random_scan_cloud(rng, size(rng));
    const ClusterParams params{eps(rng), mp(rng), 300};
    EXPECT_EQ(ids(dbscan(pts, params)),
              testing_support::oracle_dbscan(pts, params.epsilon, params.min_pts))
        << "trial " << trial;
  }
}

TEST(Dbscan, LabelsDenseAndFirstSeenOrdered) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto labels = ids(dbscan(testing_support::random_scan_cloud(rng, 100), ClusterParams{}));
    EXPECT_EQ(labels, testing_support::relabel_first_seen(labels));
  }
}

TEST(Dbscan, NoiseMonotoneInEpsilon) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pts = testing_support::random_scan_cloud(rng, 120);
    std::size_t previous = 0;
    for (const double eps : {0.3, 0.4, 0.5, 0.6, 0.7, 0.8}) {
      const auto labels = dbscan(pts, ClusterParams{eps, 4, 300});
      const auto noise = static_cast<std::size_t>(
          std::count_if(labels.begin(), labels.end(), [](auto l) { return l.is_noise(); }));
      EXPECT_GE(noise, previous);
      previous = noise;
    }
  }
}

TEST(Dbscan, LogOverloadUsesScans) {
  std::vector<Fingerprint> pts(6, fp({{1, -50}, {2, -60}}));
  EXPECT_EQ(ids(dbscan(log_from(pts), ClusterParams{})), std::vector<int>(6, 1));
}

TEST(SegmentVisits, RevisitPattern) {
  const std::vector<int> pattern{1, 1, 1, 1, 2, 2, 2, 2, 1, 1, 1, 1};
  std::vector<Fingerprint> pts(pattern.size(), fp({{1, -50}}));
  const ScanLog log = log_from(pts);
  std::vector<ClusterLabel> labels;
  for (const int p : pattern) labels.push_back(ClusterLabel::cluster(p));
  const auto visits = segment_visits(log, labels, ClusterParams{});
  ASSERT_EQ(visits.size(), 3u);
  EXPECT_EQ(visits[0], (VisitInterval{1, 1000, 1900, 4, false}));
  EXPECT_EQ(visits[1], (VisitInterval{2, 2200, 3100, 4, false}));
  EXPECT_EQ(visits[2], (VisitInterval{1, 3400, 4300, 4, false}));
}

TEST(SegmentVisits, AllNoiseEmpty) {
  std::vector<Fingerprint> pts(5, fp({{1, -50}}));
  const std::vector<ClusterLabel> labels(5, ClusterLabel::noise());
  EXPECT_TRUE(segment_visits(log_from(pts), labels, ClusterParams{}).empty());
}

TEST(SegmentVisits, GapAndNoiseBreakRuns) {
  ScanLog log{"u", "d", {}};
  for (const Timestamp t : {0, 300, 600, 900, 1500, 2400, 2700, 3000}) {
    log.entries.push_back({t, {{testing_support::mac(1), -50}}});
  }
  const auto c = ClusterLabel::cluster(1);
  const std::vector<ClusterLabel> labels{c, c, c, c, c, c, ClusterLabel::noise(), c};
  const auto visits = segment_visits(log, labels, ClusterParams{});
  // 900 -> 1500 is exactly 2 intervals (kept), 1500 -> 2400 is 3 (split).
  ASSERT_EQ(visits.size(), 3u);
  EXPECT_EQ(visits[0], (VisitInterval{1, 0, 1500, 5, false}));
  EXPECT_EQ(visits[1], (VisitInterval{1, 2400, 2400, 1, true}));
  EXPECT_EQ(visits[2], (VisitInterval{1, 3000, 3000, 1, true}));
}

TEST(SegmentVisits, LengthMismatchThrows) {
  std::vector<Fingerprint> pts(3, fp({{1, -50}}));
  const std::vector<ClusterLabel> labels(2);
  try {
    segment_visits(log_from(pts), labels, ClusterParams{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LabelLengthMismatch);
  }
}

TEST(SegmentVisits, IntervalsCoverEveryClusteredScanOnce) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pts = testing_support::random_scan_cloud(rng, 150);
    const ScanLog log = log_from(pts);
    const auto labels = dbscan(log, ClusterParams{});
    const auto visits = segment_visits(log, labels, ClusterParams{});
    std::size_t covered = 0;
    for (std::size_t v = 0; v < visits.size(); ++v) {
      covered += visits[v].scan_count;
      EXPECT_LE(visits[v].start, visits[v].end);
      EXPECT_EQ(visits[v].sub_minimal, visits[v].scan_count < 4);
      if (v > 0) EXPECT_LE(visits[v - 1].start, visits[v].start);
    }
    const auto clustered = static_cast<std::size_t>(
        std::count_if(labels.begin(), labels.end(), [](auto l) { return !l.is_noise(); }));
    EXPECT_EQ(covered, clustered);
  }
}

TEST(TwentyMinuteRule, ShortStayCannotFormCluster) {
  // Three scans (15 minutes) at an isolated place never reach minPts.
  std::vector<Fingerprint> pts(3, fp({{1, -50}, {2, -55}}));
  for (int i = 0; i < 10; ++i) pts.push_back(fp({{10 + i, -70}}));
  for (const auto l : dbscan(pts, ClusterParams{})) EXPECT_TRUE(l.is_noise());
}
