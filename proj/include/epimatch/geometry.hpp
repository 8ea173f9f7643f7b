#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <cstdint>
#include <random>

#include "epimatch/types.hpp"

namespace epimatch {

// Pinhole intrinsics. K is upper triangular with positive focal lengths; width
// and height are in pixels.
template <typename S>
struct CameraIntrinsics {
  Mat3<S> k = Mat3<S>::Identity();
  int width = 0;
  int height = 0;

  Vec2<S> image_center() const { return Vec2<S>(S(width) / 2, S(height) / 2); }
};

// Rigid transform from camera 1 coordinates to camera 2 coordinates:
// x2 = r * x1 + t, with t in meters.
template <typename S>
struct RelativePose {
  Mat3<S> r = Mat3<S>::Identity();
  Vec3<S> t = Vec3<S>::Zero();
};

template <typename S>
struct FundamentalMatrix {
  Mat3<S> m = Mat3<S>::Zero();
};

// Line a*x + b*y + c = 0 in pixel coordinates; (a, b) is never the zero vector.
template <typename S>
struct EpipolarLine {
  S a = 0, b = 0, c = 0;
};

// Right epipole. The homogeneous vector is unit norm with its largest-magnitude
// component positive; pixel is only meaningful when finite is true.
template <typename S>
struct Epipole {
  Vec3<S> homogeneous = Vec3<S>::Zero();
  Vec2<S> pixel = Vec2<S>::Zero();
  bool finite = false;
};

template <typename S>
Mat3<S> skew(const Vec3<S>& v) {
  Mat3<S> m;
  m << S(0), -v.z(), v.y(),
       v.z(), S(0), -v.x(),
       -v.y(), v.x(), S(0);
  return m;
}

template <typename S>
bool is_rotation(const Mat3<S>& r, S tol = S(1e-9)) {
  return (r.transpose() * r - Mat3<S>::Identity()).norm() <= tol &&
         std::abs(r.determinant() - S(1)) <= tol;
}

// F = K2^-T [t]x R K1^-1, mapping image-1 points to image-2 lines.
template <typename S>
FundamentalMatrix<S> fundamental_from_pose(const CameraIntrinsics<S>& cam1,
                                           const CameraIntrinsics<S>& cam2,
                                           const RelativePose<S>& pose) {
  if (!is_rotation(pose.r))
    throw Error("relative pose rotation is not orthonormal");
  if (pose.t.norm() <= S(1e-12))
    throw DegenerateTranslation("translation norm is zero; no epipolar geometry");
  Mat3<S> k1_inv = cam1.k.template triangularView<Eigen::Upper>().solve(Mat3<S>::Identity());
  Mat3<S> k2_inv = cam2.k.template triangularView<Eigen::Upper>().solve(Mat3<S>::Identity());
  FundamentalMatrix<S> f;
  f.m = k2_inv.transpose() * skew(pose.t) * pose.r * k1_inv;
  return f;
}

// Epipolar line in image 2 for a pixel p in image 1: l = F * [p; 1].
template <typename S>
EpipolarLine<S> epipolar_line(const FundamentalMatrix<S>& f, const Vec2<S>& p) {
  Vec3<S> l = f.m * Vec3<S>(p.x(), p.y(), S(1));
  if (std::hypot(l.x(), l.y()) <= S(1e-12))
    throw DegenerateLine("epipolar line has zero normal; query point is the left epipole");
  return {l.x(), l.y(), l.z()};
}

template <typename S>
Epipole<S> epipole_from_homogeneous(const Vec3<S>& h) {
  Epipole<S> e;
  Eigen::Index largest;
  h.cwiseAbs().maxCoeff(&largest);
  e.homogeneous = h.normalized();
  if (e.homogeneous[largest] < S(0)) e.homogeneous = -e.homogeneous;
  e.finite = std::abs(e.homogeneous.z()) > S(1e-12);
  if (e.finite)
    e.pixel = Vec2<S>(e.homogeneous.x() / e.homogeneous.z(),
                      e.homogeneous.y() / e.homogeneous.z());
  return e;
}

// Right epipole: the null vector of F^T, i.e. the point every epipolar line
// passes through. Computed as the left singular vector of F with the smallest
// singular value.
template <typename S>
Epipole<S> epipole_of(const FundamentalMatrix<S>& f) {
  Eigen::JacobiSVD<Mat3<S>> svd(f.m, Eigen::ComputeFullU);
  Epipole<S> e = epipole_from_homogeneous<S>(svd.matrixU().col(2));
  if (!e.finite)
    throw EpipoleAtInfinity("epipole at infinity (translation has no forward component)");
  return e;
}

template <typename S>
S point_line_distance(const EpipolarLine<S>& l, const Vec2<S>& p) {
  return std::abs(l.a * p.x() + l.b * p.y() + l.c) / std::hypot(l.a, l.b);
}

template <typename S>
Mat3<S> orthonormalized(const Mat3<S>& r) {
  Eigen::JacobiSVD<Mat3<S>> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3<S> u = svd.matrixU();
  Mat3<S> v = svd.matrixV();
  if ((u * v.transpose()).determinant() < S(0)) u.col(2) = -u.col(2);
  return u * v.transpose();
}

// Deterministic pose jitter for robustness studies. Each Euler axis gets an
// independent uniform draw in [-level, level] degrees (intrinsic XYZ, applied
// on the right), each translation component an independent uniform draw in
// [-0.25 * level, 0.25 * level] meters. level 0 returns the input unchanged.
template <typename S>
RelativePose<S> perturb_pose(const RelativePose<S>& pose, S level, std::uint64_t seed) {
  if (level == S(0)) return pose;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-double(level) * pi / 180.0,
                                               double(level) * pi / 180.0);
  std::uniform_real_distribution<double> shift(-0.25 * double(level), 0.25 * double(level));
  const S ax = S(angle(rng)), ay = S(angle(rng)), az = S(angle(rng));
  const S tx = S(shift(rng)), ty = S(shift(rng)), tz = S(shift(rng));
  Mat3<S> jitter =
      (Eigen::AngleAxis<S>(ax, Vec3<S>::UnitX()) * Eigen::AngleAxis<S>(ay, Vec3<S>::UnitY()) *
       Eigen::AngleAxis<S>(az, Vec3<S>::UnitZ()))
          .toRotationMatrix();
  RelativePose<S> out;
  out.r = orthonormalized<S>(pose.r * jitter);
  out.t = pose.t + Vec3<S>(tx, ty, tz);
  return out;
}

using CameraIntrinsicsd = CameraIntrinsics<double>;
using RelativePosed = RelativePose<double>;
using FundamentalMatrixd = FundamentalMatrix<double>;
using EpipolarLined = EpipolarLine<double>;
using Epipoled = Epipole<double>;

}  // namespace epimatch
