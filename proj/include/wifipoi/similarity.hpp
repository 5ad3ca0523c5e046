#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wifipoi/model.hpp"

namespace wifipoi {

/// Cosine score in [0, 1]; higher means more alike.
using SimilarityScore = double;

/// Sum of RSS products over the MACs present in both fingerprints. Zero when
/// the MAC sets are disjoint.
double common_dot(const Fingerprint& a, const Fingerprint& b);

/// Sum of squared RSS over every MAC of the fingerprint.
double self_dot(const Fingerprint& f);

/// common_dot(a, b) / (|a| |b|), where each norm runs over that fingerprint's
/// full MAC set. A MAC seen by only one side therefore lowers the score
/// without contributing to the numerator.
///
/// RSS values enter as raw signed dBm. Throws EmptyFingerprint.
SimilarityScore cosine_similarity(const Fingerprint& a, const Fingerprint& b);

struct PairSimilarity {
  std::size_t i = 0;
  std::size_t j = 0;
  SimilarityScore score = 0.0;
};

/// h(h-1)/2 entries, one per unordered pair with i < j, sorted by (i, j).
/// Throws TooFewFingerprints when fewer than two are given.
std::vector<PairSimilarity> pairwise_similarities(std::span<const Fingerprint> fps);

constexpr std::size_t pair_count(std::size_t h) noexcept {
  return h < 2 ? 0 : h * (h - 1) / 2;
}

}  // namespace wifipoi
