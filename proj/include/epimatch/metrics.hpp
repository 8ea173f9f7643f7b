#pragma once

#include <cstdint>
#include <vector>

#include "epimatch/matching.hpp"
#include "epimatch/scene.hpp"

namespace epimatch {

// Aggregated hit counting for candidate-set coverage. An empty denominator
// reads as perfect coverage: there was nothing to miss.
struct RecallAccumulator {
  std::int64_t hits = 0;
  std::int64_t total = 0;

  void add(std::int64_t h, std::int64_t t) {
    hits += h;
    total += t;
  }
  double value() const {
    return total > 0 ? static_cast<double>(hits) / static_cast<double>(total) : 1.0;
  }
};

struct MatchQuality {
  std::int64_t returned = 0;       // pairs the matcher produced
  std::int64_t correct = 0;        // of those, pairs present in the ground truth
  double matching_recall = 0;      // correct / returned; 0 when nothing returned
  double truth_recovery = 0;       // correct / ground-truth size; 0 when truth empty
};

// Scores a match list against ground-truth correspondences.
MatchQuality score_matches(const std::vector<MatchPair>& matches,
                           const std::vector<GroundTruthPair>& truth);

}  // namespace epimatch
