#include "wifipoi/similarity.hpp"

#include <algorithm>
#include <cmath>

#include "wifipoi/error.hpp"

namespace wifipoi {

double common_dot(const Fingerprint& a, const Fingerprint& b) {
  const auto ea = a.entries();
  const auto eb = b.entries();
  double sum = 0.0;
  auto ia = ea.begin();
  auto ib = eb.begin();
  while (ia != ea.end() && ib != eb.end()) {
    if (ia->mac < ib->mac) {
      ++ia;
    } else if (ib->mac < ia->mac) {
      ++ib;
    } else {
      sum += ia->mean_rssi * ib->mean_rssi;
      ++ia;
      ++ib;
    }
  }
  return sum;
}

double self_dot(const Fingerprint& f) {
  double sum = 0.0;
  for (const auto& e : f.entries()) sum += e.mean_rssi * e.mean_rssi;
  return sum;
}

SimilarityScore cosine_similarity(const Fingerprint& a, const Fingerprint& b) {
  if (a.empty() || b.empty()) {
    throw Error(ErrorCode::EmptyFingerprint, "cosine similarity of an empty fingerprint");
  }
  // sqrt(d1 * d2) rather than sqrt(d1) * sqrt(d2): identical fingerprints
  // then score exactly 1.
  const double score = common_dot(a, b) / std::sqrt(self_dot(a) * self_dot(b));
  return std::clamp(score, 0.0, 1.0);
}

std::vector<PairSimilarity> pairwise_similarities(std::span<const Fingerprint> fps) {
  if (fps.size() < 2) {
    throw Error(ErrorCode::TooFewFingerprints,
                "need at least 2 fingerprints, got " + std::to_string(fps.size()));
  }
  std::vector<PairSimilarity> out;
  out.reserve(pair_count(fps.size()));
  for (std::size_t i = 0; i < fps.size(); ++i) {
    for (std::size_t j = i + 1; j < fps.size(); ++j) {
      out.push_back({i, j, cosine_similarity(fps[i], fps[j])});
    }
  }
  return out;
}

}  // namespace wifipoi
