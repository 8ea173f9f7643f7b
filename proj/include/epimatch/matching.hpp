#pragma once

#include <cstdint>
#include <vector>

#include "epimatch/geometry.hpp"
#include "epimatch/types.hpp"

namespace epimatch {

// Keypoints of one image, stored column-wise: descriptors are dim x n so a
// candidate's descriptor is one contiguous column.
struct KeypointSet {
  Points2<double> positions;   // 2 x n pixel coordinates
  Eigen::VectorXd responses;   // n detector responses
  Eigen::MatrixXd descriptors; // dim x n

  Eigen::Index size() const { return positions.cols(); }
  Eigen::Index descriptor_dim() const { return descriptors.rows(); }
};

// Throws DimensionMismatch unless positions, responses and descriptors all
// describe the same number of keypoints.
void validate(const KeypointSet& set);

enum class Method { Angular, Brute, Grid, Hash, Unguided };
enum class MatchFilter { RatioTest, NearestOnly };

// Stable lowercase names, used in reports and on the command line.
const char* method_name(Method m);
Method method_from_name(const std::string& name);  // throws Error on unknown names

// Knobs of the individual retrieval structures; zero cell_size means "use the
// pixel tolerance".
struct MethodParams {
  int bins = 256;
  int neighbor_width = 1;
  double cell_size = 0;
};

struct MatchConfig {
  double epsilon = 50;    // pixel tolerance of the epipolar envelope
  double tau = 0.8;       // ratio-test threshold
  MatchFilter filter = MatchFilter::RatioTest;
  Method method = Method::Angular;
  MethodParams params;
  int image_width = 6048;
  int image_height = 4032;
  int threads = 0;        // 0: one per hardware thread
};

struct MatchPair {
  std::int32_t query_index;
  std::int32_t train_index;
  double distance;  // descriptor distance of the accepted pair
};

struct MatchTiming {
  double build_ms = 0;       // one-time index construction
  double candidate_ms = 0;   // retrieval incl. any per-candidate verification
  double descriptor_ms = 0;  // distance computation, ranking, filtering
};

struct MatchResult {
  std::vector<MatchPair> matches;
  MatchTiming timing;
  // Per-batch stage times. Totals above are median-per-batch times scaled by
  // the batch count, which keeps them stable under scheduling noise.
  std::vector<double> candidate_batch_ms;
  std::vector<double> descriptor_batch_ms;
  std::int64_t considered_queries = 0;
  std::int64_t skipped_queries = 0;  // epipolar line or angle undefined
  double mean_candidates_per_query = 0;  // what the descriptor stage saw
  double candidate_recall = -1;          // -1 when not measured
};

// Euclidean distance between two descriptors; throws DimensionMismatch.
double descriptor_distance(const Eigen::Ref<const Eigen::VectorXd>& a,
                           const Eigen::Ref<const Eigen::VectorXd>& b);

struct BestTwo {
  std::int32_t best = -1;
  std::int32_t second = -1;
  double best_distance = 0;
  double second_distance = 0;
};

// Nearest and second-nearest candidate by descriptor distance. Equal
// distances resolve to the lower train index, so the outcome does not depend
// on candidate order. Throws NoCandidates on an empty list.
BestTwo best_two_in_candidates(const Eigen::MatrixXd& train_descriptors,
                               const Eigen::Ref<const Eigen::VectorXd>& query,
                               const std::vector<std::int32_t>& candidates);

// Lowe acceptance: a pair passes when no second neighbor exists or the best
// distance is strictly below tau times the second.
bool ratio_accept(double best_distance, double second_distance, double tau);

// Extra switches used by the benchmark harness; plain matching keeps the
// defaults.
struct PipelineOptions {
  // Compare every raw candidate set against an exact envelope scan (untimed)
  // and report the aggregate recall.
  bool measure_recall = false;
  // Points closer than this to the envelope boundary are left out of the
  // recall numerator and denominator; negative means 1e-6 * max(1, epsilon).
  double boundary_band = -1;
};

// Geometry-guided matching: per query keypoint, retrieve envelope candidates
// with the configured method, then rank them by descriptor distance and
// filter. Every returned pair satisfies the envelope test.
MatchResult match_guided(const KeypointSet& query, const KeypointSet& train,
                         const FundamentalMatrix<double>& f, const MatchConfig& config,
                         const PipelineOptions& options = {});

// Descriptor-first matching over all train keypoints, with the envelope
// applied only as a final filter on accepted pairs. The candidate stage is
// absent, so candidate time is zero by definition.
MatchResult match_unguided(const KeypointSet& query, const KeypointSet& train,
                           const FundamentalMatrix<double>& f, const MatchConfig& config);

}  // namespace epimatch
