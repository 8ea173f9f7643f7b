#pragma once

#include <cstdint>
#include <vector>

#include "epimatch/geometry.hpp"
#include "epimatch/matching.hpp"
#include "epimatch/types.hpp"

namespace epimatch {

// Where the second image's epipole lands relative to the frame. Placement
// drives how useful angle-based retrieval is, so benchmarks pick it
// deliberately instead of leaving it to chance.
enum class EpipoleRegime { Inside, Outside, NearBorder };

struct SceneParams {
  int n_points = 1000;            // co-visible 3D points
  int n_clutter = 0;              // extra unmatched keypoints per image
  double pixel_noise_sigma = 2.0; // pixel noise on second-image observations
  double descriptor_noise = 0.15; // per-image descriptor perturbation
  int descriptor_dim = 128;
  // Fraction of points whose base descriptor comes from a shared dictionary,
  // giving the ratio test genuine near-duplicates to reject. Zero keeps every
  // descriptor unique.
  double repeat_fraction = 0;
  int repeat_group = 8;           // roughly this many keypoints per dictionary entry
  EpipoleRegime regime = EpipoleRegime::Outside;
  int image_width = 6048;
  int image_height = 4032;
  double focal = 3000;
  std::uint64_t seed = 1337;
};

struct GroundTruthPair {
  std::int32_t index1;
  std::int32_t index2;
  std::int32_t point3d;
};

struct SyntheticScene {
  CameraIntrinsics<double> cam1, cam2;
  RelativePose<double> pose;
  FundamentalMatrix<double> f;
  KeypointSet kp1, kp2;
  std::vector<GroundTruthPair> ground_truth;
  std::vector<Eigen::Vector3d> points3d;  // camera-1 frame, co-visible points only
  Epipole<double> epipole2;               // where construction placed it
};

// Deterministic two-view scene around a directly placed epipole: the
// translation direction is chosen so the second epipole lands exactly on the
// regime's target pixel. Keypoint noise is applied to second-image positions
// only, so an observation sits within 3 sigma of its true epipolar line by
// construction. Throws InfeasibleCameraConfig when visible points cannot be
// found.
SyntheticScene synth_scene(const SceneParams& params);

}  // namespace epimatch
