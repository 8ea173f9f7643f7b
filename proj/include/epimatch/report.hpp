#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace epimatch {

// One benchmark measurement. `parameter` is whatever the experiment varies
// (tolerance, keypoint count, perturbation level); a candidate_recall of -1
// marks "not measured" (the unguided path has no candidate stage).
struct ReportRow {
  std::string experiment;
  std::string method;
  double parameter = 0;
  double candidate_ms = 0;
  double descriptor_ms = 0;
  double build_ms = 0;
  double candidate_recall = -1;
  double matching_recall = 0;
  std::int64_t match_count = 0;
  double mean_candidates_per_query = 0;
};

// CSV with a fixed header; numbers use shortest round-trip formatting, so
// equal inputs give byte-equal files.
std::string to_csv(const std::vector<ReportRow>& rows);

// Writes to_csv output to a file; throws Error when the file cannot be
// opened.
void write_csv(const std::string& path, const std::vector<ReportRow>& rows);

}  // namespace epimatch
