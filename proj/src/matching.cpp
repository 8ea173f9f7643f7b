#include "epimatch/matching.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <optional>
#include <thread>

#include "epimatch/angular_index.hpp"
#include "epimatch/baselines.hpp"

namespace epimatch {

namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 0) {
    const double lo = *std::max_element(v.begin(), v.begin() + mid);
    return 0.5 * (lo + hi);
  }
  return hi;
}

// Contiguous query ranges, fixed before any thread runs, so the produced
// matches cannot depend on the thread count. Kept at 20+ batches so the
// median batch time means something.
std::vector<std::pair<std::int64_t, std::int64_t>> plan_batches(std::int64_t n) {
  std::vector<std::pair<std::int64_t, std::int64_t>> ranges;
  if (n <= 0) return ranges;
  const std::int64_t count = std::min(n, std::clamp<std::int64_t>(n / 256, 20, 256));
  ranges.reserve(count);
  std::int64_t begin = 0;
  for (std::int64_t b = 0; b < count; ++b) {
    const std::int64_t end = n * (b + 1) / count;
    ranges.emplace_back(begin, end);
    begin = end;
  }
  return ranges;
}

int resolve_threads(int requested, std::size_t batch_count) {
  int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  return static_cast<int>(std::min<std::size_t>(n, std::max<std::size_t>(batch_count, 1)));
}

void check_inputs(const KeypointSet& query, const KeypointSet& train, const MatchConfig& config) {
  validate(query);
  validate(train);
  if (query.descriptor_dim() != train.descriptor_dim())
    throw DimensionMismatch("query and train descriptor dimensions differ");
  if (!(config.epsilon > 0)) throw Error("pixel tolerance must be positive");
  if (!(config.tau > 0)) throw Error("ratio threshold must be positive");
}

// Nearest/second-nearest scan over every train keypoint, used by the
// unguided path where materializing a candidate list would be silly.
BestTwo best_two_over_all(const Eigen::MatrixXd& train_descriptors,
                          const Eigen::Ref<const Eigen::VectorXd>& query) {
  BestTwo r;
  double best2 = 0, second2 = 0;
  const Eigen::Index n = train_descriptors.cols();
  for (Eigen::Index c = 0; c < n; ++c) {
    const double d2 = (train_descriptors.col(c) - query).squaredNorm();
    if (r.best < 0 || d2 < best2) {
      r.second = r.best;
      second2 = best2;
      r.best = static_cast<std::int32_t>(c);
      best2 = d2;
    } else if (r.second < 0 || d2 < second2) {
      r.second = static_cast<std::int32_t>(c);
      second2 = d2;
    }
  }
  r.best_distance = r.best >= 0 ? std::sqrt(best2) : 0;
  r.second_distance = r.second >= 0 ? std::sqrt(second2) : 0;
  return r;
}

struct BatchOutput {
  std::vector<MatchPair> matches;
  double candidate_ms = 0;
  double descriptor_ms = 0;
  std::int64_t considered = 0;
  std::int64_t skipped = 0;
  std::int64_t candidates_seen = 0;
  std::int64_t recall_hits = 0;
  std::int64_t recall_total = 0;
};

// Everything the per-query retrieval step needs, built once.
struct GuidedContext {
  GuidedContext(const KeypointSet& q, const KeypointSet& t, const FundamentalMatrix<double>& fm,
                const MatchConfig& c, const PipelineOptions& o)
      : query(q), train(t), f(fm), config(c), options(o) {}

  const KeypointSet& query;
  const KeypointSet& train;
  const FundamentalMatrix<double>& f;
  const MatchConfig& config;
  const PipelineOptions& options;
  double band = 0;
  Vec2<double> center{0, 0};
  std::optional<Epipole<double>> epipole;
  std::optional<EpipolarIndexd> angular;
  std::optional<GridIndex<double>> grid;
  std::optional<AngularHashIndexd> hash;
};

// One worker's scratch; sized once so the hot loop never allocates.
struct Scratch {
  std::vector<std::int32_t> candidates;
  std::vector<std::int32_t> raw;
  std::vector<std::uint8_t> member;  // n_train flags for the recall check
};

// Retrieval for one query keypoint. Returns false when the epipolar line or
// its direction angle is undefined for this keypoint (counted as skipped).
bool retrieve(const GuidedContext& ctx, std::int64_t j, Scratch& s, bool want_raw) {
  const Vec2<double> p = ctx.query.positions.col(j);
  EpipolarLine<double> l;
  try {
    l = epipolar_line(ctx.f, p);
  } catch (const DegenerateLine&) {
    return false;
  }
  const double eps = ctx.config.epsilon;
  const bool needs_angle =
      ctx.config.method == Method::Angular || ctx.config.method == Method::Hash;
  QueryAngle<double> alpha{0};
  if (needs_angle) {
    try {
      alpha = line_query_angle(l, *ctx.epipole, ctx.center);
    } catch (const AmbiguousDirection&) {
      return false;
    }
  }
  switch (ctx.config.method) {
    case Method::Angular:
      ctx.angular->query_unordered(alpha, s.candidates);
      if (want_raw) s.raw = s.candidates;
      break;
    case Method::Brute:
      brute_force_candidates(ctx.train.positions, l, eps, s.candidates);
      if (want_raw) s.raw = s.candidates;
      break;
    case Method::Grid:
    case Method::Hash: {
      if (ctx.config.method == Method::Grid)
        ctx.grid->collect(l, eps, s.candidates);
      else
        ctx.hash->collect(alpha, s.candidates);
      if (want_raw) s.raw = s.candidates;
      // The pooled set carries no tolerance guarantee; matching promises one,
      // so the envelope check runs here, inside candidate time.
      s.candidates.erase(std::remove_if(s.candidates.begin(), s.candidates.end(),
                                        [&](std::int32_t c) {
                                          return point_line_distance(
                                                     l, Vec2<double>(ctx.train.positions.col(c))) >
                                                 eps;
                                        }),
                         s.candidates.end());
      break;
    }
    case Method::Unguided:
      break;  // never reaches the guided pipeline
  }
  return true;
}

// Untimed bookkeeping: how much of the exact envelope did the raw candidate
// set cover, ignoring points within the boundary band.
void measure_recall(const GuidedContext& ctx, std::int64_t j, Scratch& s, BatchOutput& out) {
  const EpipolarLine<double> l = epipolar_line(ctx.f, Vec2<double>(ctx.query.positions.col(j)));
  std::vector<std::int32_t> exact;
  brute_force_candidates(ctx.train.positions, l, ctx.config.epsilon, exact);
  for (std::int32_t c : s.raw) s.member[c] = 1;
  for (std::int32_t c : exact) {
    const double d = point_line_distance(l, Vec2<double>(ctx.train.positions.col(c)));
    if (std::abs(d - ctx.config.epsilon) <= ctx.band) continue;
    ++out.recall_total;
    if (s.member[c]) ++out.recall_hits;
  }
  for (std::int32_t c : s.raw) s.member[c] = 0;
}

void run_guided_batch(const GuidedContext& ctx, std::pair<std::int64_t, std::int64_t> range,
                      Scratch& s, BatchOutput& out) {
  const bool want_raw = ctx.options.measure_recall;
  for (std::int64_t j = range.first; j < range.second; ++j) {
    const auto t0 = Clock::now();
    const bool ok = retrieve(ctx, j, s, want_raw);
    const auto t1 = Clock::now();
    out.candidate_ms += ms_between(t0, t1);
    if (!ok) {
      ++out.skipped;
      continue;
    }
    ++out.considered;
    out.candidates_seen += static_cast<std::int64_t>(s.candidates.size());
    if (!s.candidates.empty()) {
      const auto t2 = Clock::now();
      const BestTwo bt =
          best_two_in_candidates(ctx.train.descriptors, ctx.query.descriptors.col(j), s.candidates);
      const bool accept = ctx.config.filter == MatchFilter::NearestOnly ||
                          ratio_accept(bt.best_distance,
                                       bt.second >= 0 ? bt.second_distance : -1, ctx.config.tau);
      if (accept)
        out.matches.push_back({static_cast<std::int32_t>(j), bt.best, bt.best_distance});
      out.descriptor_ms += ms_between(t2, Clock::now());
    }
    if (want_raw) measure_recall(ctx, j, s, out);
  }
}

void run_unguided_batch(const GuidedContext& ctx, std::pair<std::int64_t, std::int64_t> range,
                        BatchOutput& out) {
  const double eps = ctx.config.epsilon;
  for (std::int64_t j = range.first; j < range.second; ++j) {
    const auto t0 = Clock::now();
    ++out.considered;
    out.candidates_seen += ctx.train.size();
    const BestTwo bt = best_two_over_all(ctx.train.descriptors, ctx.query.descriptors.col(j));
    bool accept = bt.best >= 0 &&
                  (ctx.config.filter == MatchFilter::NearestOnly ||
                   ratio_accept(bt.best_distance, bt.second >= 0 ? bt.second_distance : -1,
                                ctx.config.tau));
    if (accept) {
      // Envelope as a final filter on the accepted pair only.
      try {
        const EpipolarLine<double> l =
            epipolar_line(ctx.f, Vec2<double>(ctx.query.positions.col(j)));
        accept = point_line_distance(l, Vec2<double>(ctx.train.positions.col(bt.best))) <= eps;
      } catch (const DegenerateLine&) {
        accept = false;
      }
      if (accept)
        out.matches.push_back({static_cast<std::int32_t>(j), bt.best, bt.best_distance});
    }
    out.descriptor_ms += ms_between(t0, Clock::now());
  }
}

template <typename BatchFn>
MatchResult run_batched(std::int64_t n_query, std::int64_t n_train, int threads_requested,
                        BatchFn&& run_batch) {
  const auto ranges = plan_batches(n_query);
  std::vector<BatchOutput> outputs(ranges.size());
  const int n_threads = resolve_threads(threads_requested, ranges.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    Scratch s;
    s.member.assign(static_cast<std::size_t>(n_train), 0);
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= ranges.size()) break;
      run_batch(ranges[b], s, outputs[b]);
    }
  };
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  MatchResult result;
  std::int64_t hits = 0, total = 0, seen = 0;
  for (const BatchOutput& o : outputs) {
    result.matches.insert(result.matches.end(), o.matches.begin(), o.matches.end());
    result.candidate_batch_ms.push_back(o.candidate_ms);
    result.descriptor_batch_ms.push_back(o.descriptor_ms);
    result.considered_queries += o.considered;
    result.skipped_queries += o.skipped;
    seen += o.candidates_seen;
    hits += o.recall_hits;
    total += o.recall_total;
  }
  const double batches = static_cast<double>(ranges.size());
  result.timing.candidate_ms = median_of(result.candidate_batch_ms) * batches;
  result.timing.descriptor_ms = median_of(result.descriptor_batch_ms) * batches;
  if (result.considered_queries > 0)
    result.mean_candidates_per_query =
        static_cast<double>(seen) / static_cast<double>(result.considered_queries);
  if (total > 0)
    result.candidate_recall = static_cast<double>(hits) / static_cast<double>(total);
  return result;
}

}  // namespace

const char* method_name(Method m) {
  switch (m) {
    case Method::Angular: return "angular";
    case Method::Brute: return "brute";
    case Method::Grid: return "grid";
    case Method::Hash: return "hash";
    case Method::Unguided: return "unguided";
  }
  return "unknown";
}

Method method_from_name(const std::string& name) {
  if (name == "angular") return Method::Angular;
  if (name == "brute") return Method::Brute;
  if (name == "grid") return Method::Grid;
  if (name == "hash") return Method::Hash;
  if (name == "unguided") return Method::Unguided;
  throw Error("unknown method name: " + name);
}

void validate(const KeypointSet& set) {
  if (set.positions.rows() != 2) throw DimensionMismatch("positions must be 2 x n");
  if (set.responses.size() != set.positions.cols())
    throw DimensionMismatch("response count does not match keypoint count");
  if (set.descriptors.cols() != set.positions.cols())
    throw DimensionMismatch("descriptor count does not match keypoint count");
}

double descriptor_distance(const Eigen::Ref<const Eigen::VectorXd>& a,
                           const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != b.size()) throw DimensionMismatch("descriptor lengths differ");
  return (a - b).norm();
}

BestTwo best_two_in_candidates(const Eigen::MatrixXd& train_descriptors,
                               const Eigen::Ref<const Eigen::VectorXd>& query,
                               const std::vector<std::int32_t>& candidates) {
  if (candidates.empty()) throw NoCandidates("candidate list is empty");
  if (query.size() != train_descriptors.rows())
    throw DimensionMismatch("query descriptor length does not match train descriptors");
  BestTwo r;
  double best2 = 0, second2 = 0;
  for (std::int32_t c : candidates) {
    const double d2 = (train_descriptors.col(c) - query).squaredNorm();
    // Ties resolve toward the lower index so candidate order cannot matter.
    if (r.best < 0 || d2 < best2 || (d2 == best2 && c < r.best)) {
      if (r.best >= 0 && r.best != c) {
        r.second = r.best;
        second2 = best2;
      }
      r.best = c;
      best2 = d2;
    } else if (r.second < 0 || d2 < second2 || (d2 == second2 && c < r.second)) {
      r.second = c;
      second2 = d2;
    }
  }
  r.best_distance = std::sqrt(best2);
  r.second_distance = r.second >= 0 ? std::sqrt(second2) : 0;
  return r;
}

bool ratio_accept(double best_distance, double second_distance, double tau) {
  return second_distance < 0 || best_distance < tau * second_distance;
}

MatchResult match_guided(const KeypointSet& query, const KeypointSet& train,
                         const FundamentalMatrix<double>& f, const MatchConfig& config,
                         const PipelineOptions& options) {
  check_inputs(query, train, config);
  if (config.method == Method::Unguided) return match_unguided(query, train, f, config);

  GuidedContext ctx{query, train, f, config, options};
  ctx.band = options.boundary_band >= 0 ? options.boundary_band
                                        : 1e-6 * std::max(1.0, config.epsilon);
  ctx.center = Vec2<double>(config.image_width / 2.0, config.image_height / 2.0);

  const auto b0 = Clock::now();
  switch (config.method) {
    case Method::Angular:
      ctx.epipole = epipole_of(f);
      ctx.angular = build_index(train.positions, *ctx.epipole, config.epsilon);
      break;
    case Method::Grid: {
      const double cs = config.params.cell_size > 0 ? config.params.cell_size : config.epsilon;
      ctx.grid.emplace(train.positions, cs, config.image_width, config.image_height);
      break;
    }
    case Method::Hash:
      ctx.epipole = epipole_of(f);
      ctx.hash.emplace(train.positions, *ctx.epipole, config.params.bins,
                       config.params.neighbor_width);
      break;
    default:
      break;
  }
  const double build_ms = ms_between(b0, Clock::now());

  // Untimed warm-up so first-touch page faults do not land in batch zero.
  if (query.size() > 0) {
    Scratch warm;
    warm.member.assign(static_cast<std::size_t>(train.size()), 0);
    const std::int64_t upto = std::min<std::int64_t>(query.size(), 64);
    for (std::int64_t j = 0; j < upto; ++j) {
      if (retrieve(ctx, j, warm, false) && !warm.candidates.empty())
        best_two_in_candidates(train.descriptors, query.descriptors.col(j), warm.candidates);
    }
  }

  MatchResult result = run_batched(
      query.size(), train.size(), config.threads,
      [&](std::pair<std::int64_t, std::int64_t> range, Scratch& s, BatchOutput& out) {
        run_guided_batch(ctx, range, s, out);
      });
  result.timing.build_ms = build_ms;
  if (!options.measure_recall)
    result.candidate_recall = -1;
  else if (result.candidate_recall < 0)
    result.candidate_recall = 1.0;  // nothing outside the band to recall
  return result;
}

MatchResult match_unguided(const KeypointSet& query, const KeypointSet& train,
                           const FundamentalMatrix<double>& f, const MatchConfig& config) {
  check_inputs(query, train, config);
  const PipelineOptions no_options{};
  GuidedContext ctx{query, train, f, config, no_options};

  // Warm-up: one full scan is already most of a batch; a short slice suffices.
  if (query.size() > 0 && train.size() > 0) {
    const std::int64_t upto = std::min<std::int64_t>(query.size(), 8);
    for (std::int64_t j = 0; j < upto; ++j)
      best_two_over_all(train.descriptors, query.descriptors.col(j));
  }

  MatchResult result = run_batched(
      query.size(), train.size(), config.threads,
      [&](std::pair<std::int64_t, std::int64_t> range, Scratch&, BatchOutput& out) {
        run_unguided_batch(ctx, range, out);
      });
  result.candidate_recall = -1;
  return result;
}

}  // namespace epimatch
