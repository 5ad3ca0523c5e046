#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "wifipoi/error.hpp"
#include "wifipoi/similarity.hpp"

using namespace wifipoi;
using testing_support::fp;

TEST(CommonDot, Examples) {
  EXPECT_EQ(common_dot(fp({{1, -40}, {2, -80}}), fp({{1, -40}, {3, -80}})), 1600.0);
  EXPECT_EQ(common_dot(fp({{1, -50}}), fp({{2, -50}})), 0.0);
  EXPECT_EQ(common_dot(fp({{1, -50}, {2, -60}}), fp({{1, -50}, {2, -60}})), 6100.0);
}

TEST(SelfDot, Examples) {
  EXPECT_EQ(self_dot(fp({{1, -40}, {2, -80}})), 8000.0);
  EXPECT_EQ(self_dot(fp({{1, -1}})), 1.0);
  EXPECT_EQ(self_dot(fp({{1, -50}, {2, -60}})), 6100.0);
}

TEST(Cosine, Examples) {
  EXPECT_EQ(cosine_similarity(fp({{1, -50}, {2, -60}}), fp({{1, -50}, {2, -60}})), 1.0);
  EXPECT_EQ(cosine_similarity(fp({{1, -40}, {2, -80}}), fp({{1, -40}, {3, -80}})), 0.2);
  EXPECT_EQ(cosine_similarity(fp({{1, -50}}), fp({{2, -50}})), 0.0);
}

TEST(Cosine, EmptyFingerprintThrows) {
  try {
    cosine_similarity(Fingerprint{}, fp({{1, -50}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyFingerprint);
  }
}

TEST(Cosine, MatchesNaiveOracle) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 2000; ++i) {
    const auto a = testing_support::random_fingerprint(rng);
    const auto b = testing_support::random_fingerprint(rng);
    EXPECT_NEAR(cosine_similarity(a, b), testing_support::naive_cosine(a, b), 1e-12);
  }
}

TEST(Cosine, SymmetricBoundedAndSelfOne) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    const auto a = testing_support::random_fingerprint(rng);
    const auto b = testing_support::random_fingerprint(rng);
    const double ab = cosine_similarity(a, b);
    EXPECT_EQ(ab, cosine_similarity(b, a));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    EXPECT_EQ(cosine_similarity(a, a), 1.0);
  }
}

TEST(Cosine, ScaleInvariant) {
  const auto a = fp({{1, -40}, {2, -60}, {3, -90}});
  const auto b = fp({{1, -80}, {2, -120}, {3, -180}});
  EXPECT_NEAR(cosine_similarity(a, b), 1.0, 1e-15);
}

TEST(Pairwise, Counts) {
  std::mt19937_64 rng(1);
  for (const std::size_t h : {2u, 5u, 41u}) {
    std::vector<Fingerprint> fps;
    for (std::size_t i = 0; i < h; ++i) fps.push_back(testing_support::random_fingerprint(rng));
    const auto pairs = pairwise_similarities(fps);
    EXPECT_EQ(pairs.size(), pair_count(h));
    EXPECT_EQ(pairs.size(), h * (h - 1) / 2);
  }
  EXPECT_EQ(pair_count(41), 820u);
}

TEST(Pairwise, EachUnorderedPairOnceWithScores) {
  std::mt19937_64 rng(3);
  std::vector<Fingerprint> fps;
  for (int i = 0; i < 9; ++i) fps.push_back(testing_support::random_fingerprint(rng));
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& p : pairwise_similarities(fps)) {
    EXPECT_LT(p.i, p.j);
    EXPECT_TRUE(seen.insert({p.i, p.j}).second);
    EXPECT_EQ(p.score, cosine_similarity(fps[p.i], fps[p.j]));
  }
  EXPECT_EQ(seen.size(), 36u);
}

TEST(Pairwise, TooFewThrows) {
  const std::vector<Fingerprint> one{fp({{1, -40}})};
  try {
    pairwise_similarities(one);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewFingerprints);
  }
}
