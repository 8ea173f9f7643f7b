#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "epimatch/angular_index.hpp"
#include "epimatch/geometry.hpp"
#include "epimatch/types.hpp"

namespace epimatch {

// Exact envelope membership by scanning every keypoint. The oracle the other
// methods are measured against.
template <typename S>
void brute_force_candidates(const Points2<S>& pts, const EpipolarLine<S>& l, S epsilon,
                            std::vector<std::int32_t>& out) {
  out.clear();
  const S inv_norm = S(1) / std::hypot(l.a, l.b);
  const std::int64_t n = pts.cols();
  for (std::int64_t j = 0; j < n; ++j) {
    const S d = std::abs(l.a * pts(0, j) + l.b * pts(1, j) + l.c) * inv_norm;
    if (d <= epsilon) out.push_back(static_cast<std::int32_t>(j));
  }
}

template <typename S>
std::vector<std::int32_t> brute_force_candidates(const Points2<S>& pts, const EpipolarLine<S>& l,
                                                 S epsilon) {
  std::vector<std::int32_t> out;
  brute_force_candidates(pts, l, epsilon, out);
  return out;
}

// Uniform grid over the image plane. Retrieval samples the epipolar line at
// cell_size steps and pools the 3x3 neighborhood of every sample's cell — a
// reimplementation of the grid-guided scheme, including its deliberate lack
// of any distance verification.
template <typename S>
class GridIndex {
 public:
  GridIndex(const Points2<S>& pts, S cell_size, int width, int height)
      : cell_size_(cell_size), width_(width), height_(height) {
    if (!(cell_size > S(0))) throw Error("grid cell size must be positive");
    const std::int64_t n = pts.cols();
    // Cover both the (inflated) image rectangle and every keypoint, so each
    // keypoint lands in exactly one stored cell.
    cx0_ = cell_of(-cell_size);
    cy0_ = cell_of(-cell_size);
    std::int64_t cx1 = cell_of(S(width) + cell_size);
    std::int64_t cy1 = cell_of(S(height) + cell_size);
    for (std::int64_t j = 0; j < n; ++j) {
      cx0_ = std::min(cx0_, cell_of(pts(0, j)));
      cy0_ = std::min(cy0_, cell_of(pts(1, j)));
      cx1 = std::max(cx1, cell_of(pts(0, j)));
      cy1 = std::max(cy1, cell_of(pts(1, j)));
    }
    nx_ = cx1 - cx0_ + 1;
    ny_ = cy1 - cy0_ + 1;
    if (nx_ * ny_ > std::int64_t(50'000'000))
      throw Error("grid resolution is unreasonably fine for this image");
    std::vector<std::int32_t> counts(static_cast<std::size_t>(nx_ * ny_ + 1), 0);
    std::vector<std::int32_t> cell_ids(static_cast<std::size_t>(n));
    for (std::int64_t j = 0; j < n; ++j) {
      const std::int64_t id = (cell_of(pts(1, j)) - cy0_) * nx_ + (cell_of(pts(0, j)) - cx0_);
      cell_ids[j] = static_cast<std::int32_t>(id);
      ++counts[id + 1];
    }
    for (std::size_t i = 1; i < counts.size(); ++i) counts[i] += counts[i - 1];
    offsets_ = counts;
    entries_.resize(static_cast<std::size_t>(n));
    std::vector<std::int32_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (std::int64_t j = 0; j < n; ++j)
      entries_[cursor[cell_ids[j]]++] = static_cast<std::int32_t>(j);
  }

  S cell_size() const { return cell_size_; }
  int width() const { return width_; }
  int height() const { return height_; }

  std::int64_t cell_of(S coord) const {
    return static_cast<std::int64_t>(std::floor(coord / cell_size_));
  }

  // Retrieval without ordering guarantees; no duplicates (the sample walk is
  // monotone in both cell coordinates, so no cell is pooled twice).
  void collect(const EpipolarLine<S>& l, S epsilon, std::vector<std::int32_t>& out) const {
    out.clear();
    const S norm = std::hypot(l.a, l.b);
    const Vec2<S> dir(-l.b / norm, l.a / norm);
    const Vec2<S> p0(-l.a * l.c / (norm * norm), -l.b * l.c / (norm * norm));
    S t0 = std::numeric_limits<S>::lowest(), t1 = std::numeric_limits<S>::max();
    if (!clip(p0.x(), dir.x(), -epsilon, S(width_) + epsilon, t0, t1)) return;
    if (!clip(p0.y(), dir.y(), -epsilon, S(height_) + epsilon, t0, t1)) return;
    if (t0 > t1) return;

    // Far enough from any real cell to never match the skip test, close
    // enough to zero that the subtraction below cannot overflow.
    std::int64_t prev_cx = std::numeric_limits<std::int64_t>::min() / 4;
    std::int64_t prev_cy = prev_cx;
    const std::int64_t steps = static_cast<std::int64_t>(std::floor((t1 - t0) / cell_size_));
    for (std::int64_t k = 0; k <= steps + 1; ++k) {
      const S t = k <= steps ? t0 + S(k) * cell_size_ : t1;  // endpoint inclusive
      if (k == steps + 1 && t0 + S(steps) * cell_size_ >= t1) break;
      const Vec2<S> sample = p0 + t * dir;
      const std::int64_t scx = cell_of(sample.x());
      const std::int64_t scy = cell_of(sample.y());
      for (std::int64_t cy = scy - 1; cy <= scy + 1; ++cy) {
        for (std::int64_t cx = scx - 1; cx <= scx + 1; ++cx) {
          if (std::llabs(cx - prev_cx) <= 1 && std::llabs(cy - prev_cy) <= 1)
            continue;  // already pooled around the previous sample
          if (cx < cx0_ || cy < cy0_ || cx >= cx0_ + nx_ || cy >= cy0_ + ny_) continue;
          const std::int64_t id = (cy - cy0_) * nx_ + (cx - cx0_);
          for (std::int32_t i = offsets_[id]; i < offsets_[id + 1]; ++i)
            out.push_back(entries_[i]);
        }
      }
      prev_cx = scx;
      prev_cy = scy;
    }
  }

 private:
  static bool clip(S p, S d, S lo, S hi, S& t0, S& t1) {
    if (std::abs(d) < S(1e-14)) return p >= lo && p <= hi;
    S ta = (lo - p) / d;
    S tb = (hi - p) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    return true;
  }

  S cell_size_;
  int width_, height_;
  std::int64_t cx0_ = 0, cy0_ = 0, nx_ = 0, ny_ = 0;
  std::vector<std::int32_t> offsets_, entries_;
};

// Grid retrieval, deduplicated and ascending. Deliberately unverified: the
// pooled set can include points far outside the tolerance and miss points
// inside it.
template <typename S>
std::vector<std::int32_t> grid_candidates(const GridIndex<S>& index, const EpipolarLine<S>& l,
                                          S epsilon) {
  std::vector<std::int32_t> out;
  index.collect(l, epsilon, out);
  std::sort(out.begin(), out.end());
  return out;
}

// Fixed binning of keypoint direction angles seen from the epipole. Retrieval
// pools the query angle's bin and `neighbor_width` bins to each side
// (circularly); the pixel tolerance is only represented indirectly by bin
// width, which is the method's documented weakness.
template <typename S>
class AngularHashIndex {
 public:
  AngularHashIndex(const Points2<S>& pts, const Epipole<S>& e, int bins = 256,
                   int neighbor_width = 1)
      : bins_(bins), neighbor_width_(neighbor_width), epipole_(e) {
    if (!e.finite) throw EpipoleAtInfinity("angular hashing needs a finite epipole");
    if (bins < 1) throw Error("bin count must be positive");
    if (neighbor_width < 0) throw Error("neighbor width must be non-negative");
    const std::int64_t n = pts.cols();
    std::vector<std::int32_t> counts(static_cast<std::size_t>(bins) + 1, 0);
    std::vector<std::int32_t> bin_ids(static_cast<std::size_t>(n));
    for (std::int64_t j = 0; j < n; ++j) {
      const Vec2<S> d = pts.col(j) - e.pixel;
      const int b = bin_of(reduce_angle(std::atan2(d.y(), d.x())));
      bin_ids[j] = b;
      ++counts[b + 1];
    }
    for (std::size_t i = 1; i < counts.size(); ++i) counts[i] += counts[i - 1];
    offsets_ = counts;
    entries_.resize(static_cast<std::size_t>(n));
    std::vector<std::int32_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (std::int64_t j = 0; j < n; ++j)
      entries_[cursor[bin_ids[j]]++] = static_cast<std::int32_t>(j);
  }

  int bins() const { return bins_; }
  int neighbor_width() const { return neighbor_width_; }
  const Epipole<S>& epipole() const { return epipole_; }

  int bin_of(S reduced_angle) const {
    const int b = static_cast<int>(reduced_angle * S(bins_) / pi_v<S>);
    return std::clamp(b, 0, bins_ - 1);
  }

  // Unordered pooled retrieval; each bin is visited once even when the
  // neighborhood wraps all the way around.
  void collect(QueryAngle<S> angle, std::vector<std::int32_t>& out) const {
    out.clear();
    const int center = bin_of(angle.alpha);
    const int span = std::min(2 * neighbor_width_ + 1, bins_);
    for (int k = 0; k < span; ++k) {
      int b = (center - neighbor_width_ + k) % bins_;
      if (b < 0) b += bins_;
      for (std::int32_t i = offsets_[b]; i < offsets_[b + 1]; ++i) out.push_back(entries_[i]);
    }
  }

 private:
  int bins_, neighbor_width_;
  Epipole<S> epipole_;
  std::vector<std::int32_t> offsets_, entries_;
};

// Hash retrieval, deduplicated and ascending. No pixel-tolerance guarantee in
// either direction.
template <typename S>
std::vector<std::int32_t> hash_candidates(const AngularHashIndex<S>& index, QueryAngle<S> angle) {
  std::vector<std::int32_t> out;
  index.collect(angle, out);
  std::sort(out.begin(), out.end());
  return out;
}

using GridIndexd = GridIndex<double>;
using AngularHashIndexd = AngularHashIndex<double>;

}  // namespace epimatch
