#include "epimatch/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string_view>

#include "json.hpp"

namespace epimatch {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

void spill(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open file for writing: " + path);
  f << content;
  if (!f) throw Error("failed while writing: " + path);
}

void append_double(std::string& out, double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, r.ptr);
}

double parse_double(std::string_view field, const std::string& path) {
  double v = 0;
  const auto r = std::from_chars(field.data(), field.data() + field.size(), v);
  if (r.ec != std::errc() || r.ptr != field.data() + field.size())
    throw Error("malformed number '" + std::string(field) + "' in " + path);
  return v;
}

std::int64_t parse_int(std::string_view field, const std::string& path) {
  std::int64_t v = 0;
  const auto r = std::from_chars(field.data(), field.data() + field.size(), v);
  if (r.ec != std::errc() || r.ptr != field.data() + field.size())
    throw Error("malformed integer '" + std::string(field) + "' in " + path);
  return v;
}

// Iterates non-empty lines; tolerates a trailing newline and \r\n endings.
template <typename Fn>
void for_each_line(std::string_view content, Fn&& fn) {
  std::size_t pos = 0;
  while (pos < content.size()) {
    std::size_t end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) fn(line);
    pos = end + 1;
  }
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

json matrix3_to_json(const Eigen::Matrix3d& m) {
  json a = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a.push_back(m(r, c));
  return a;
}

Eigen::Matrix3d matrix3_from_json(const json& a, const std::string& what,
                                  const std::string& path) {
  if (!a.is_array() || a.size() != 9)
    throw Error(what + " must be an array of 9 numbers (row-major) in " + path);
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = a.at(3 * r + c).get<double>();
  return m;
}

json parse_json_file(const std::string& path) {
  try {
    return json::parse(slurp(path));
  } catch (const json::exception& e) {
    throw Error("invalid JSON in " + path + ": " + e.what());
  }
}

LoadedScene assemble_scene(LoadedCamera c1, LoadedCamera c2, KeypointSet kp1, KeypointSet kp2,
                           std::vector<GroundTruthPair> truth, const std::string& origin) {
  if (!c1.pose.r.isIdentity(1e-9) || c1.pose.t.norm() > 1e-9)
    throw Error("first camera must be the reference frame (identity pose) in " + origin);
  LoadedScene s;
  s.cam1 = c1.cam;
  s.cam2 = c2.cam;
  s.pose = c2.pose;
  s.f = fundamental_from_pose(s.cam1, s.cam2, s.pose);
  s.kp1 = std::move(kp1);
  s.kp2 = std::move(kp2);
  s.ground_truth = std::move(truth);
  for (const GroundTruthPair& g : s.ground_truth)
    if (g.index1 < 0 || g.index1 >= s.kp1.size() || g.index2 < 0 || g.index2 >= s.kp2.size())
      throw Error("ground-truth index out of range in " + origin);
  return s;
}

}  // namespace

void write_camera_json(const std::string& path, const CameraIntrinsics<double>& cam,
                       const RelativePose<double>& pose) {
  json j;
  j["K"] = matrix3_to_json(cam.k);
  j["R"] = matrix3_to_json(pose.r);
  j["t"] = {pose.t.x(), pose.t.y(), pose.t.z()};
  j["width"] = cam.width;
  j["height"] = cam.height;
  spill(path, j.dump(2) + "\n");
}

LoadedCamera read_camera_json(const std::string& path) {
  const json j = parse_json_file(path);
  for (const char* key : {"K", "R", "t", "width", "height"})
    if (!j.contains(key)) throw Error(std::string("camera file missing key '") + key + "': " + path);
  LoadedCamera out;
  out.cam.k = matrix3_from_json(j["K"], "K", path);
  out.pose.r = matrix3_from_json(j["R"], "R", path);
  const json& t = j["t"];
  if (!t.is_array() || t.size() != 3) throw Error("t must be an array of 3 numbers in " + path);
  out.pose.t = Eigen::Vector3d(t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>());
  out.cam.width = j["width"].get<int>();
  out.cam.height = j["height"].get<int>();
  if (out.cam.width <= 0 || out.cam.height <= 0)
    throw Error("image dimensions must be positive in " + path);
  return out;
}

void write_keypoints_csv(const std::string& path, const KeypointSet& set) {
  validate(set);
  const Eigen::Index n = set.size(), dim = set.descriptor_dim();
  std::string out = "x,y,response";
  for (Eigen::Index d = 0; d < dim; ++d) {
    out += ",d";
    out += std::to_string(d);
  }
  out += '\n';
  out.reserve(out.size() + static_cast<std::size_t>(n) * (dim + 3) * 12);
  for (Eigen::Index j = 0; j < n; ++j) {
    append_double(out, set.positions(0, j));
    out += ',';
    append_double(out, set.positions(1, j));
    out += ',';
    append_double(out, set.responses[j]);
    for (Eigen::Index d = 0; d < dim; ++d) {
      out += ',';
      append_double(out, set.descriptors(d, j));
    }
    out += '\n';
  }
  spill(path, out);
}

KeypointSet read_keypoints_csv(const std::string& path) {
  const std::string content = slurp(path);
  bool saw_header = false;
  Eigen::Index dim = 0;
  std::vector<double> staging;  // row-major: x, y, response, descriptors...
  for_each_line(content, [&](std::string_view line) {
    const auto fields = split_fields(line);
    if (!saw_header) {
      if (fields.size() < 3 || fields[0] != "x" || fields[1] != "y" || fields[2] != "response")
        throw Error("keypoint file must start with header x,y,response,d0,...: " + path);
      dim = static_cast<Eigen::Index>(fields.size()) - 3;
      saw_header = true;
      return;
    }
    if (static_cast<Eigen::Index>(fields.size()) != dim + 3)
      throw DimensionMismatch("keypoint row width does not match header in " + path);
    for (std::string_view f : fields) staging.push_back(parse_double(f, path));
  });
  if (!saw_header) throw Error("keypoint file is empty: " + path);

  const Eigen::Index n = static_cast<Eigen::Index>(staging.size()) / (dim + 3);
  KeypointSet set;
  set.positions.resize(2, n);
  set.responses.resize(n);
  set.descriptors.resize(dim, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double* row = staging.data() + j * (dim + 3);
    set.positions(0, j) = row[0];
    set.positions(1, j) = row[1];
    set.responses[j] = row[2];
    for (Eigen::Index d = 0; d < dim; ++d) set.descriptors(d, j) = row[3 + d];
  }
  return set;
}

void write_ground_truth_csv(const std::string& path, const std::vector<GroundTruthPair>& truth) {
  std::string out = "index1,index2,point3d_index\n";
  for (const GroundTruthPair& g : truth) {
    out += std::to_string(g.index1);
    out += ',';
    out += std::to_string(g.index2);
    out += ',';
    out += std::to_string(g.point3d);
    out += '\n';
  }
  spill(path, out);
}

std::vector<GroundTruthPair> read_ground_truth_csv(const std::string& path) {
  const std::string content = slurp(path);
  std::vector<GroundTruthPair> truth;
  bool saw_header = false;
  for_each_line(content, [&](std::string_view line) {
    if (!saw_header) {
      if (line != "index1,index2,point3d_index")
        throw Error("ground-truth file must start with header index1,index2,point3d_index: " +
                    path);
      saw_header = true;
      return;
    }
    const auto fields = split_fields(line);
    if (fields.size() != 3) throw Error("ground-truth rows need 3 fields in " + path);
    truth.push_back({static_cast<std::int32_t>(parse_int(fields[0], path)),
                     static_cast<std::int32_t>(parse_int(fields[1], path)),
                     static_cast<std::int32_t>(parse_int(fields[2], path))});
  });
  if (!saw_header) throw Error("ground-truth file is empty: " + path);
  return truth;
}

void write_matches_csv(const std::string& path, const std::vector<MatchPair>& matches) {
  std::string out = "query_index,train_index,distance\n";
  for (const MatchPair& m : matches) {
    out += std::to_string(m.query_index);
    out += ',';
    out += std::to_string(m.train_index);
    out += ',';
    append_double(out, m.distance);
    out += '\n';
  }
  spill(path, out);
}

std::vector<MatchPair> read_matches_csv(const std::string& path) {
  const std::string content = slurp(path);
  std::vector<MatchPair> matches;
  bool saw_header = false;
  for_each_line(content, [&](std::string_view line) {
    if (!saw_header) {
      if (line != "query_index,train_index,distance")
        throw Error("match file must start with header query_index,train_index,distance: " + path);
      saw_header = true;
      return;
    }
    const auto fields = split_fields(line);
    if (fields.size() != 3) throw Error("match rows need 3 fields in " + path);
    matches.push_back({static_cast<std::int32_t>(parse_int(fields[0], path)),
                       static_cast<std::int32_t>(parse_int(fields[1], path)),
                       parse_double(fields[2], path)});
  });
  if (!saw_header) throw Error("match file is empty: " + path);
  return matches;
}

void write_scene_dir(const std::string& dir, const SyntheticScene& scene) {
  fs::create_directories(dir);
  const fs::path base(dir);
  write_camera_json((base / "camera1.json").string(), scene.cam1,
                    RelativePose<double>{Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero()});
  write_camera_json((base / "camera2.json").string(), scene.cam2, scene.pose);
  write_keypoints_csv((base / "keypoints1.csv").string(), scene.kp1);
  write_keypoints_csv((base / "keypoints2.csv").string(), scene.kp2);
  write_ground_truth_csv((base / "ground_truth.csv").string(), scene.ground_truth);
}

LoadedScene read_scene_dir(const std::string& dir) {
  const fs::path base(dir);
  return assemble_scene(read_camera_json((base / "camera1.json").string()),
                        read_camera_json((base / "camera2.json").string()),
                        read_keypoints_csv((base / "keypoints1.csv").string()),
                        read_keypoints_csv((base / "keypoints2.csv").string()),
                        read_ground_truth_csv((base / "ground_truth.csv").string()), dir);
}

LoadedScene read_pair_json(const std::string& path) {
  const json j = parse_json_file(path);
  for (const char* key : {"camera1", "camera2", "keypoints1", "keypoints2"})
    if (!j.contains(key)) throw Error(std::string("pair file missing key '") + key + "': " + path);
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& ref) { return (base / ref).string(); };
  std::vector<GroundTruthPair> truth;
  if (j.contains("ground_truth"))
    truth = read_ground_truth_csv(resolve(j["ground_truth"].get<std::string>()));
  return assemble_scene(read_camera_json(resolve(j["camera1"].get<std::string>())),
                        read_camera_json(resolve(j["camera2"].get<std::string>())),
                        read_keypoints_csv(resolve(j["keypoints1"].get<std::string>())),
                        read_keypoints_csv(resolve(j["keypoints2"].get<std::string>())),
                        std::move(truth), path);
}

std::string tree_to_json(const EpipolarIndexd& index) {
  json j;
  j["keypoints"] = index.keypoint_count();
  j["intervals"] = index.interval_count();
  j["depth"] = index.depth();
  j["root"] = index.root();
  j["epsilon"] = index.epsilon_default();
  j["epipole"] = {index.epipole().pixel.x(), index.epipole().pixel.y()};
  j["interval_starts"] = index.interval_starts();
  j["interval_ends"] = index.interval_ends();
  j["interval_sources"] = index.interval_sources();
  json nodes = json::array();
  for (const auto& n : index.nodes()) {
    nodes.push_back({{"split_angle", n.split_angle},
                     {"bucket_begin", n.bucket_begin},
                     {"bucket_end", n.bucket_end},
                     {"bucket_min_start", n.bucket_min_start},
                     {"bucket_max_end", n.bucket_max_end},
                     {"left", n.left},
                     {"right", n.right}});
  }
  j["nodes"] = std::move(nodes);
  return j.dump(2) + "\n";
}

void write_tree_json(const std::string& path, const EpipolarIndexd& index) {
  spill(path, tree_to_json(index));
}

}  // namespace epimatch
