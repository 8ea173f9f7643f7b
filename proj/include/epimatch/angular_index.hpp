#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "epimatch/geometry.hpp"
#include "epimatch/types.hpp"

namespace epimatch {

// Angular span [start, end] in the reduced line-direction domain [0, pi],
// owned by the keypoint at index `source`. A keypoint whose raw span crosses
// 0/pi is stored as two of these.
template <typename S>
struct AngularInterval {
  S start = 0, end = 0;
  std::int32_t source = -1;
};

// Direction angle of an epipolar line, reduced to [0, pi).
template <typename S>
struct QueryAngle {
  S alpha = 0;
};

// Fold an arbitrary direction angle into [0, pi). Lines are undirected, so
// directions pi apart are the same line.
template <typename S>
S reduce_angle(S raw) {
  S a = std::fmod(raw, pi_v<S>);
  if (a < S(0)) a += pi_v<S>;
  if (a >= pi_v<S>) a = S(0);  // fmod result + pi can round up to exactly pi
  return a;
}

// One or two intervals; two exactly when the widened span wrapped at 0/pi.
template <typename S>
struct KeypointIntervals {
  AngularInterval<S> parts[2];
  int count = 0;
};

// The set of line directions through the epipole passing within epsilon of p.
// A keypoint not farther than epsilon from the epipole itself is reached by
// every line and gets the full [0, pi] span.
template <typename S>
KeypointIntervals<S> interval_for_keypoint(const Vec2<S>& p, std::int32_t source,
                                           const Epipole<S>& e, S epsilon) {
  if (!e.finite)
    throw EpipoleAtInfinity("angular intervals need a finite epipole");
  if (!(epsilon > S(0)))
    throw Error("epsilon must be positive");
  KeypointIntervals<S> out;
  const Vec2<S> d = p - e.pixel;
  const S dist = d.norm();
  if (dist <= epsilon) {
    out.parts[0] = {S(0), pi_v<S>, source};
    out.count = 1;
    return out;
  }
  const S theta = reduce_angle(std::atan2(d.y(), d.x()));
  const S delta = std::asin(epsilon / dist);  // < pi/2 because dist > epsilon
  const S lo = theta - delta;
  const S hi = theta + delta;
  if (lo < S(0)) {
    out.parts[0] = {lo + pi_v<S>, pi_v<S>, source};
    out.parts[1] = {S(0), hi, source};
    out.count = 2;
  } else if (hi > pi_v<S>) {
    out.parts[0] = {lo, pi_v<S>, source};
    out.parts[1] = {S(0), hi - pi_v<S>, source};
    out.count = 2;
  } else {
    out.parts[0] = {lo, hi, source};
    out.count = 1;
  }
  return out;
}

// Direction angle under which a line through the epipole is queried: the
// image center is projected orthogonally onto the line and the direction from
// the epipole to that projection is reduced to [0, pi).
template <typename S>
QueryAngle<S> line_query_angle(const EpipolarLine<S>& l, const Epipole<S>& e,
                               const Vec2<S>& image_center) {
  if (!e.finite)
    throw EpipoleAtInfinity("query angles need a finite epipole");
  const S denom = l.a * l.a + l.b * l.b;
  const S s = (l.a * image_center.x() + l.b * image_center.y() + l.c) / denom;
  const Vec2<S> q(image_center.x() - s * l.a, image_center.y() - s * l.b);
  if ((q - e.pixel).norm() <= S(1e-9))
    throw AmbiguousDirection("image center projects onto the epipole; line direction undefined");
  return {reduce_angle(std::atan2(q.y() - e.pixel.y(), q.x() - e.pixel.x()))};
}

struct QueryStats {
  std::int64_t nodes_visited = 0;
  std::int64_t buckets_scanned = 0;
  std::int64_t entries_scanned = 0;
};

// Centered segment tree over angular intervals. Each node keeps the intervals
// spanning its split angle in a bucket; intervals entirely below the split go
// left, entirely above go right. Buckets are stored in two sorted orders —
// by start ascending and by end descending — because every bucket interval
// contains the split: an angle below the split is covered by exactly the
// intervals whose start is small enough, an angle above by exactly those
// whose end is large enough. One query therefore walks a single root-to-leaf
// path and reads just the matching prefix of each bucket it passes.
template <typename S>
class EpipolarIndex {
 public:
  struct Node {
    S split_angle = 0;
    S bucket_min_start = 0;
    S bucket_max_end = 0;
    std::int32_t bucket_begin = 0, bucket_end = 0;  // range into interval arrays
    std::int32_t left = -1, right = -1;
  };

  // Same candidate set as `query` but in storage order, no sort. This is the
  // pipeline path; wrap-split halves can never both contain an angle in
  // [0, pi) (their combined width is below pi), so no dedup is needed.
  void query_unordered(QueryAngle<S> angle, std::vector<std::int32_t>& out,
                       QueryStats* stats = nullptr) const {
    const S a = angle.alpha;
    if (!(a >= S(0) && a < pi_v<S>))
      throw Error("query angle outside [0, pi)");
    out.clear();
    std::int32_t node = root_;
    while (node >= 0) {
      const Node& nd = nodes_[node];
      if (stats) ++stats->nodes_visited;
      if (a < nd.split_angle) {
        // bucket ends all reach the split, so membership is start <= a
        std::int32_t i = nd.bucket_begin;
        for (; i < nd.bucket_end && starts_[i] <= a; ++i) out.push_back(sources_[i]);
        if (stats) {
          ++stats->buckets_scanned;
          stats->entries_scanned += (i - nd.bucket_begin) + (i < nd.bucket_end);
        }
        node = nd.left;
      } else if (a > nd.split_angle) {
        // bucket starts all sit at or below the split; membership is end >= a
        std::int32_t i = nd.bucket_begin;
        for (; i < nd.bucket_end && ends_by_end_[i] >= a; ++i)
          out.push_back(sources_by_end_[i]);
        if (stats) {
          ++stats->buckets_scanned;
          stats->entries_scanned += (i - nd.bucket_begin) + (i < nd.bucket_end);
        }
        node = nd.right;
      } else {
        // the query hits the split angle: the whole bucket contains it, and
        // no other node can hold an interval containing it
        for (std::int32_t i = nd.bucket_begin; i < nd.bucket_end; ++i)
          out.push_back(sources_[i]);
        if (stats) {
          ++stats->buckets_scanned;
          stats->entries_scanned += nd.bucket_end - nd.bucket_begin;
        }
        break;
      }
    }
  }

  // Distinct source indices, ascending.
  void query(QueryAngle<S> angle, std::vector<std::int32_t>& out,
             QueryStats* stats = nullptr) const {
    query_unordered(angle, out, stats);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }

  std::vector<std::int32_t> query(QueryAngle<S> angle) const {
    std::vector<std::int32_t> out;
    query(angle, out);
    return out;
  }

  std::int64_t keypoint_count() const { return keypoint_count_; }
  std::size_t interval_count() const { return starts_.size(); }
  const std::vector<S>& interval_starts() const { return starts_; }
  const std::vector<S>& interval_ends() const { return ends_; }
  const std::vector<std::int32_t>& interval_sources() const { return sources_; }
  std::size_t node_count() const { return nodes_.size(); }
  int depth() const { return depth_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  std::int32_t root() const { return root_; }
  const Epipole<S>& epipole() const { return epipole_; }
  // Zero when the index was built with per-keypoint tolerances.
  S epsilon_default() const { return epsilon_default_; }

  // Structural self-check; throws Error on the first violated invariant.
  void audit() const {
    if (starts_.size() != ends_.size() || starts_.size() != sources_.size() ||
        starts_.size() != ends_by_end_.size() || starts_.size() != sources_by_end_.size())
      throw Error("audit: interval arrays disagree in length");
    if (keypoint_count_ > 0 &&
        (interval_count() < static_cast<std::size_t>(keypoint_count_) ||
         interval_count() > static_cast<std::size_t>(2 * keypoint_count_)))
      throw Error("audit: interval count outside [n, 2n]");
    for (std::size_t i = 0; i < starts_.size(); ++i) {
      if (!(S(0) <= starts_[i] && starts_[i] <= ends_[i] && ends_[i] <= pi_v<S>))
        throw Error("audit: interval outside [0, pi] or inverted");
      if (sources_[i] < 0 || sources_[i] >= keypoint_count_)
        throw Error("audit: interval source out of range");
    }
    std::size_t covered = 0;
    for (const Node& nd : nodes_) {
      if (nd.bucket_end <= nd.bucket_begin) throw Error("audit: empty bucket");
      covered += static_cast<std::size_t>(nd.bucket_end - nd.bucket_begin);
      S min_start = pi_v<S>, max_end = S(0);
      std::vector<std::pair<S, std::int32_t>> by_start, by_end;
      for (std::int32_t i = nd.bucket_begin; i < nd.bucket_end; ++i) {
        if (!(starts_[i] <= nd.split_angle && nd.split_angle <= ends_[i]))
          throw Error("audit: bucket interval does not span the split angle");
        if (i > nd.bucket_begin && starts_[i] < starts_[i - 1])
          throw Error("audit: bucket starts not ascending");
        if (i > nd.bucket_begin && ends_by_end_[i] > ends_by_end_[i - 1])
          throw Error("audit: bucket ends-by-end not descending");
        min_start = std::min(min_start, starts_[i]);
        max_end = std::max(max_end, ends_by_end_[i]);
        by_start.emplace_back(ends_[i], sources_[i]);
        by_end.emplace_back(ends_by_end_[i], sources_by_end_[i]);
      }
      std::sort(by_start.begin(), by_start.end());
      std::sort(by_end.begin(), by_end.end());
      if (by_start != by_end)
        throw Error("audit: the two bucket orders hold different intervals");
      if (min_start != nd.bucket_min_start || max_end != nd.bucket_max_end)
        throw Error("audit: stored bucket hull is stale");
      check_side(nd.left, nd.split_angle, true);
      check_side(nd.right, nd.split_angle, false);
    }
    if (covered != interval_count())
      throw Error("audit: buckets do not partition the interval set");
    if ((root_ < 0) != nodes_.empty())
      throw Error("audit: root/node mismatch");
  }

 private:
  void check_side(std::int32_t node, S split, bool is_left) const {
    if (node < 0) return;
    const Node& nd = nodes_[node];
    for (std::int32_t i = nd.bucket_begin; i < nd.bucket_end; ++i) {
      if (is_left ? !(ends_[i] < split) : !(starts_[i] > split))
        throw Error("audit: subtree interval on the wrong side of an ancestor split");
    }
    check_side(nd.left, split, is_left);
    check_side(nd.right, split, is_left);
  }

  std::int32_t build_rec(std::vector<AngularInterval<S>>&& items, int level) {
    if (items.empty()) return -1;
    depth_ = std::max(depth_, level);
    std::vector<S> mids(items.size());
    for (std::size_t i = 0; i < items.size(); ++i)
      mids[i] = (items[i].start + items[i].end) / S(2);
    const std::size_t nth = (mids.size() - 1) / 2;  // lower median, exact selection
    std::nth_element(mids.begin(), mids.begin() + nth, mids.end());
    const S c = mids[nth];

    std::vector<AngularInterval<S>> left, right, bucket;
    const std::int32_t idx = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    {
      Node nd;
      nd.split_angle = c;
      nd.bucket_begin = static_cast<std::int32_t>(starts_.size());
      for (AngularInterval<S>& iv : items) {
        if (iv.end < c)
          left.push_back(iv);
        else if (iv.start > c)
          right.push_back(iv);
        else
          bucket.push_back(iv);
      }
      // The interval whose midpoint is the median contains c, so the bucket
      // is never empty and each recursion strictly shrinks.
      assert(!bucket.empty());
      // Ties break on the source index to keep rebuilds bit-identical.
      std::sort(bucket.begin(), bucket.end(), [](const auto& x, const auto& y) {
        return x.start != y.start ? x.start < y.start : x.source < y.source;
      });
      for (const AngularInterval<S>& iv : bucket) {
        starts_.push_back(iv.start);
        ends_.push_back(iv.end);
        sources_.push_back(iv.source);
      }
      std::sort(bucket.begin(), bucket.end(), [](const auto& x, const auto& y) {
        return x.end != y.end ? x.end > y.end : x.source < y.source;
      });
      for (const AngularInterval<S>& iv : bucket) {
        ends_by_end_.push_back(iv.end);
        sources_by_end_.push_back(iv.source);
      }
      nd.bucket_end = static_cast<std::int32_t>(starts_.size());
      nd.bucket_min_start = starts_[nd.bucket_begin];
      nd.bucket_max_end = ends_by_end_[nd.bucket_begin];
      nodes_[idx] = nd;
    }
    items.clear();
    items.shrink_to_fit();
    const std::int32_t l = build_rec(std::move(left), level + 1);
    const std::int32_t r = build_rec(std::move(right), level + 1);
    nodes_[idx].left = l;
    nodes_[idx].right = r;
    return idx;
  }

  template <typename T, typename EpsOf>
  friend EpipolarIndex<T> build_index_impl(const Points2<T>&, const Epipole<T>&, T, bool, EpsOf);

  std::vector<Node> nodes_;
  // Bucket-major interval storage in the two query orders: (starts_, ends_,
  // sources_) sorted by start ascending, (ends_by_end_, sources_by_end_) the
  // same intervals sorted by end descending.
  std::vector<S> starts_, ends_, ends_by_end_;
  std::vector<std::int32_t> sources_, sources_by_end_;
  std::int32_t root_ = -1;
  std::int64_t keypoint_count_ = 0;
  int depth_ = 0;
  S epsilon_default_ = S(0);
  Epipole<S> epipole_;
};

template <typename S, typename EpsOf>
EpipolarIndex<S> build_index_impl(const Points2<S>& positions, const Epipole<S>& e,
                                  S epsilon_default, bool uniform, EpsOf eps_of) {
  if (!e.finite)
    throw EpipoleAtInfinity("index construction needs a finite epipole");
  EpipolarIndex<S> index;
  index.keypoint_count_ = positions.cols();
  index.epsilon_default_ = uniform ? epsilon_default : S(0);
  index.epipole_ = e;
  const std::int64_t n = positions.cols();
  std::vector<AngularInterval<S>> work;
  work.reserve(static_cast<std::size_t>(2 * n));
  for (std::int64_t j = 0; j < n; ++j) {
    const KeypointIntervals<S> parts = interval_for_keypoint<S>(
        positions.col(j), static_cast<std::int32_t>(j), e, eps_of(j));
    for (int k = 0; k < parts.count; ++k) work.push_back(parts.parts[k]);
  }
  index.nodes_.reserve(work.size());
  index.starts_.reserve(work.size());
  index.ends_.reserve(work.size());
  index.ends_by_end_.reserve(work.size());
  index.sources_.reserve(work.size());
  index.sources_by_end_.reserve(work.size());
  index.root_ = index.build_rec(std::move(work), 1);
  return index;
}

template <typename S>
EpipolarIndex<S> build_index(const Points2<S>& positions, const Epipole<S>& e, S epsilon) {
  return build_index_impl<S>(positions, e, epsilon, true, [epsilon](std::int64_t) { return epsilon; });
}

// Per-keypoint tolerance variant; epsilons must have one entry per column.
template <typename S>
EpipolarIndex<S> build_index(const Points2<S>& positions, const Epipole<S>& e,
                             const std::vector<S>& epsilons) {
  if (static_cast<std::int64_t>(epsilons.size()) != positions.cols())
    throw Error("per-keypoint epsilon list length does not match keypoint count");
  return build_index_impl<S>(positions, e, S(0), false,
                             [&epsilons](std::int64_t j) { return epsilons[j]; });
}

using AngularIntervald = AngularInterval<double>;
using QueryAngled = QueryAngle<double>;
using EpipolarIndexd = EpipolarIndex<double>;

}  // namespace epimatch
