#include "epimatch/metrics.hpp"

#include <unordered_map>

namespace epimatch {

MatchQuality score_matches(const std::vector<MatchPair>& matches,
                           const std::vector<GroundTruthPair>& truth) {
  std::unordered_map<std::int32_t, std::int32_t> expected;
  expected.reserve(truth.size());
  for (const GroundTruthPair& g : truth) expected.emplace(g.index1, g.index2);

  MatchQuality q;
  q.returned = static_cast<std::int64_t>(matches.size());
  for (const MatchPair& m : matches) {
    const auto it = expected.find(m.query_index);
    if (it != expected.end() && it->second == m.train_index) ++q.correct;
  }
  if (q.returned > 0)
    q.matching_recall = static_cast<double>(q.correct) / static_cast<double>(q.returned);
  if (!truth.empty())
    q.truth_recovery = static_cast<double>(q.correct) / static_cast<double>(truth.size());
  return q;
}

}  // namespace epimatch
