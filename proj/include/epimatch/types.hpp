#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace epimatch {

template <typename S> using Vec2 = Eigen::Matrix<S, 2, 1>;
template <typename S> using Vec3 = Eigen::Matrix<S, 3, 1>;
template <typename S> using Mat3 = Eigen::Matrix<S, 3, 3>;
template <typename S> using Points2 = Eigen::Matrix<S, 2, Eigen::Dynamic>;

using Vec2d = Vec2<double>;
using Vec3d = Vec3<double>;
using Mat3d = Mat3<double>;

template <typename S>
inline constexpr S pi_v = S(3.141592653589793238462643383279502884L);
inline constexpr double pi = pi_v<double>;

// Every failure mode a caller can act on gets its own type; all of them
// derive from Error so CLI-level code can catch one thing.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// |t| is (numerically) zero, so no epipolar geometry exists.
struct DegenerateTranslation : Error { using Error::Error; };
// F * p has a = b = 0: the point maps to no usable line (p is the left epipole).
struct DegenerateLine : Error { using Error::Error; };
// The epipole's homogeneous third component vanishes; no pixel position exists.
struct EpipoleAtInfinity : Error { using Error::Error; };
// The projected query point coincides with the epipole; the direction angle is undefined.
struct AmbiguousDirection : Error { using Error::Error; };
// Descriptor lengths differ.
struct DimensionMismatch : Error { using Error::Error; };
// best_two_in_candidates called on an empty candidate list.
struct NoCandidates : Error { using Error::Error; };
// The pose sampler could not realize the requested epipole regime.
struct InfeasibleCameraConfig : Error { using Error::Error; };

}  // namespace epimatch
