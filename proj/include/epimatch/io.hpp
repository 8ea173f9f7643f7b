#pragma once

#include <string>
#include <vector>

#include "epimatch/angular_index.hpp"
#include "epimatch/geometry.hpp"
#include "epimatch/matching.hpp"
#include "epimatch/scene.hpp"

namespace epimatch {

// On-disk camera: intrinsics plus the camera's pose relative to the first
// camera (identity for the first camera itself).
struct LoadedCamera {
  CameraIntrinsics<double> cam;
  RelativePose<double> pose;
};

void write_camera_json(const std::string& path, const CameraIntrinsics<double>& cam,
                       const RelativePose<double>& pose);
LoadedCamera read_camera_json(const std::string& path);

// Keypoints travel as CSV with header x,y,response,d0..d{D-1}; the
// descriptor dimension is whatever the header says.
void write_keypoints_csv(const std::string& path, const KeypointSet& set);
KeypointSet read_keypoints_csv(const std::string& path);

void write_ground_truth_csv(const std::string& path, const std::vector<GroundTruthPair>& truth);
std::vector<GroundTruthPair> read_ground_truth_csv(const std::string& path);

void write_matches_csv(const std::string& path, const std::vector<MatchPair>& matches);
std::vector<MatchPair> read_matches_csv(const std::string& path);

// A stored two-view problem, reassembled: geometry recomputed from the two
// camera files, keypoints and correspondences from the CSVs.
struct LoadedScene {
  CameraIntrinsics<double> cam1, cam2;
  RelativePose<double> pose;  // second camera relative to the first
  FundamentalMatrix<double> f;
  KeypointSet kp1, kp2;
  std::vector<GroundTruthPair> ground_truth;
};

// A scene directory holds exactly camera1.json, camera2.json,
// keypoints1.csv, keypoints2.csv and ground_truth.csv.
void write_scene_dir(const std::string& dir, const SyntheticScene& scene);
LoadedScene read_scene_dir(const std::string& dir);

// Alternative entry point: a JSON file referencing the five pieces by path
// (relative to the JSON's own directory); "ground_truth" may be omitted.
LoadedScene read_pair_json(const std::string& path);

// Full structural dump of an index, for inspection and offline audits.
std::string tree_to_json(const EpipolarIndexd& index);
void write_tree_json(const std::string& path, const EpipolarIndexd& index);

}  // namespace epimatch
