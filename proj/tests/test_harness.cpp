#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <vector>

#include "doctest.h"
#include "epimatch/metrics.hpp"
#include "epimatch/report.hpp"
#include "epimatch/sweeps.hpp"
#include "oracle_helpers.hpp"

using namespace epimatch;

namespace {

SceneParams small_params(EpipoleRegime regime, unsigned seed = 404) {
  SceneParams p;
  p.n_points = 300;
  p.n_clutter = 40;
  p.descriptor_dim = 16;
  p.regime = regime;
  p.seed = seed;
  return p;
}

// Everything except the timing columns, for determinism comparisons.
std::vector<std::string> stable_fields(const std::vector<ReportRow>& rows) {
  std::vector<std::string> out;
  for (const ReportRow& r : rows) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s|%s|%.17g|%.17g|%.17g|%lld|%.17g", r.experiment.c_str(),
                  r.method.c_str(), r.parameter, r.candidate_recall, r.matching_recall,
                  static_cast<long long>(r.match_count), r.mean_candidates_per_query);
    out.push_back(buf);
  }
  return out;
}

}  // namespace

TEST_CASE("scene construction is reproducible bit for bit") {
  const SceneParams p = small_params(EpipoleRegime::Inside);
  const SyntheticScene a = synth_scene(p);
  const SyntheticScene b = synth_scene(p);
  CHECK(a.kp1.positions == b.kp1.positions);
  CHECK(a.kp2.positions == b.kp2.positions);
  CHECK(a.kp1.descriptors == b.kp1.descriptors);
  CHECK(a.kp2.descriptors == b.kp2.descriptors);
  CHECK(a.pose.r == b.pose.r);
  CHECK(a.pose.t == b.pose.t);
  REQUIRE(a.ground_truth.size() == b.ground_truth.size());
  const SyntheticScene c = synth_scene(small_params(EpipoleRegime::Inside, 405));
  CHECK(a.kp1.positions != c.kp1.positions);
}

TEST_CASE("the epipole lands where the regime says") {
  for (unsigned seed : {11u, 12u, 13u, 14u, 15u}) {
    const SyntheticScene in = synth_scene(small_params(EpipoleRegime::Inside, seed));
    REQUIRE(in.epipole2.finite);
    CHECK(in.epipole2.pixel.x() >= 0.12 * 6048);
    CHECK(in.epipole2.pixel.x() <= 0.88 * 6048);
    CHECK(in.epipole2.pixel.y() >= 0.12 * 4032);
    CHECK(in.epipole2.pixel.y() <= 0.88 * 4032);

    const SyntheticScene out = synth_scene(small_params(EpipoleRegime::Outside, seed));
    REQUIRE(out.epipole2.finite);
    const bool outside = out.epipole2.pixel.x() < 0 || out.epipole2.pixel.x() > 6048 ||
                         out.epipole2.pixel.y() < 0 || out.epipole2.pixel.y() > 4032;
    CHECK(outside);

    const SyntheticScene nb = synth_scene(small_params(EpipoleRegime::NearBorder, seed));
    REQUIRE(nb.epipole2.finite);
    const double dx =
        std::min(std::abs(nb.epipole2.pixel.x()), std::abs(nb.epipole2.pixel.x() - 6048));
    const double dy =
        std::min(std::abs(nb.epipole2.pixel.y()), std::abs(nb.epipole2.pixel.y() - 4032));
    CHECK(std::min(dx, dy) <= 0.07 * 6048 + 1e-6);

    // The placed epipole is consistent with the fundamental matrix.
    const Epipole<double> from_f = epipole_of(in.f);
    CHECK(from_f.pixel.x() == doctest::Approx(in.epipole2.pixel.x()).epsilon(1e-6));
    CHECK(from_f.pixel.y() == doctest::Approx(in.epipole2.pixel.y()).epsilon(1e-6));
  }
}

TEST_CASE("observations sit within three sigma of their epipolar lines") {
  SceneParams p = small_params(EpipoleRegime::Outside);
  p.n_points = 500;
  p.pixel_noise_sigma = 2.0;
  const SyntheticScene s = synth_scene(p);
  REQUIRE(s.ground_truth.size() == 500);
  double worst = 0;
  for (const GroundTruthPair& g : s.ground_truth) {
    const auto l = epipolar_line(s.f, Vec2<double>(s.kp1.positions.col(g.index1)));
    worst = std::max(worst, point_line_distance(l, Vec2<double>(s.kp2.positions.col(g.index2))));
  }
  CHECK(worst <= 3 * p.pixel_noise_sigma + 0.5);
}

TEST_CASE("scene geometry: points project back onto their keypoints") {
  const SceneParams p = small_params(EpipoleRegime::Inside, 21);
  const SyntheticScene s = synth_scene(p);
  REQUIRE(s.points3d.size() == 300);
  for (int i = 0; i < 300; ++i) {
    CHECK(s.points3d[i].z() >= 6.0);
    CHECK(s.points3d[i].z() <= 18.0);
    oracle::Pixel q1;
    REQUIRE(oracle::project_pinhole(s.cam1.k, Eigen::Matrix3d::Identity(),
                                    Eigen::Vector3d::Zero(), s.points3d[i], &q1));
    CHECK(q1.x == doctest::Approx(s.kp1.positions(0, i)).epsilon(1e-9));
    CHECK(q1.y == doctest::Approx(s.kp1.positions(1, i)).epsilon(1e-9));
    oracle::Pixel q2;
    REQUIRE(oracle::project_pinhole(s.cam2.k, s.pose.r, s.pose.t, s.points3d[i], &q2));
    const double dx = q2.x - s.kp2.positions(0, i), dy = q2.y - s.kp2.positions(1, i);
    CHECK(std::hypot(dx, dy) <= 3 * p.pixel_noise_sigma + 1e-9);
  }
}

TEST_CASE("keypoint counts include clutter, ground truth does not") {
  const SceneParams p = small_params(EpipoleRegime::Outside, 33);
  const SyntheticScene s = synth_scene(p);
  CHECK(s.kp1.size() == 340);
  CHECK(s.kp2.size() == 340);
  CHECK(s.ground_truth.size() == 300);
  CHECK(s.kp1.descriptor_dim() == 16);
  for (const GroundTruthPair& g : s.ground_truth) {
    CHECK(g.index1 < 300);
    CHECK(g.index2 < 300);
  }
}

TEST_CASE("descriptor repetition creates genuine near-duplicates") {
  SceneParams p = small_params(EpipoleRegime::Inside, 55);
  p.n_points = 400;
  p.n_clutter = 0;
  p.descriptor_noise = 0;  // make duplicates exact for counting
  p.repeat_fraction = 0.5;
  p.repeat_group = 8;
  const SyntheticScene s = synth_scene(p);
  std::set<std::vector<double>> distinct;
  for (int i = 0; i < 400; ++i) {
    const auto col = s.kp1.descriptors.col(i);
    distinct.insert(std::vector<double>(col.begin(), col.end()));
    // Without descriptor noise both images carry the base verbatim.
    CHECK(s.kp1.descriptors.col(i) == s.kp2.descriptors.col(i));
  }
  CHECK(distinct.size() < 320);  // half the points share ~50 dictionary entries
  CHECK(distinct.size() > 180);

  p.repeat_fraction = 0;
  const SyntheticScene unique_scene = synth_scene(p);
  std::set<std::vector<double>> all;
  for (int i = 0; i < 400; ++i) {
    const auto col = unique_scene.kp1.descriptors.col(i);
    all.insert(std::vector<double>(col.begin(), col.end()));
  }
  CHECK(all.size() == 400);
}

TEST_CASE("an unviewable configuration reports infeasibility") {
  SceneParams p;
  p.n_points = 5;
  p.image_width = 40;   // a 40px frame at 3000px focal sees almost nothing
  p.image_height = 40;
  p.seed = 9;
  CHECK_THROWS_AS(synth_scene(p), InfeasibleCameraConfig);
}

TEST_CASE("scene parameter validation") {
  SceneParams p;
  p.n_points = 0;
  CHECK_THROWS_AS(synth_scene(p), Error);
  p = SceneParams{};
  p.repeat_fraction = 1.5;
  CHECK_THROWS_AS(synth_scene(p), Error);
  p = SceneParams{};
  p.descriptor_dim = 1;
  CHECK_THROWS_AS(synth_scene(p), Error);
}

TEST_CASE("match scoring counts exactly the ground-truth pairs") {
  const std::vector<GroundTruthPair> gt{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}};
  const std::vector<MatchPair> matches{{0, 0, 0.1}, {1, 2, 0.2}, {5, 1, 0.3}};
  const MatchQuality q = score_matches(matches, gt);
  CHECK(q.returned == 3);
  CHECK(q.correct == 1);
  CHECK(q.matching_recall == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(q.truth_recovery == doctest::Approx(1.0 / 3).epsilon(1e-12));
  const MatchQuality empty = score_matches({}, gt);
  CHECK(empty.returned == 0);
  CHECK(empty.matching_recall == 0.0);
  RecallAccumulator acc;
  CHECK(acc.value() == 1.0);
  acc.add(3, 4);
  CHECK(acc.value() == 0.75);
}

TEST_CASE("report serialization is frozen and deterministic") {
  ReportRow r;
  r.experiment = "tolerance";
  r.method = "angular";
  r.parameter = 50;
  r.candidate_ms = 1.5;
  r.descriptor_ms = 12.25;
  r.build_ms = 0.5;
  r.candidate_recall = 1;
  r.matching_recall = 0.875;
  r.match_count = 4096;
  r.mean_candidates_per_query = 33.5;
  const std::string csv = to_csv({r});
  CHECK(csv ==
        "experiment,method,parameter,candidate_ms,descriptor_ms,build_ms,"
        "candidate_recall,matching_recall,match_count,mean_candidates_per_query\n"
        "tolerance,angular,50,1.5,12.25,0.5,1,0.875,4096,33.5\n");
  CHECK(to_csv({r}) == csv);

  const std::string path = "harness_report_roundtrip.csv";
  write_csv(path, {r});
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  std::string content((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  CHECK(content == csv);
  f.close();
  std::remove(path.c_str());
  CHECK_THROWS_AS(write_csv("no_such_dir/x.csv", {r}), Error);
}

TEST_CASE("tolerance sweep: shape, ordering, and exact angular coverage") {
  SceneParams p = small_params(EpipoleRegime::Inside, 71);
  ExperimentConfig cfg;
  cfg.methods = {Method::Angular, Method::Hash};
  cfg.base.threads = 1;
  const std::vector<double> eps{25, 50};
  const auto rows = run_tolerance_sweep(p, eps, cfg);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].method == "angular");
  CHECK(rows[1].method == "hash");
  CHECK(rows[0].parameter == 25);
  CHECK(rows[2].parameter == 50);
  for (const ReportRow& r : rows) {
    CHECK(r.experiment == "tolerance");
    CHECK(r.matching_recall >= 0);
    CHECK(r.matching_recall <= 1);
    if (r.method == "angular") CHECK(r.candidate_recall == 1.0);
    if (r.method == "hash") CHECK(r.candidate_recall <= 1.0);
  }
  CHECK(stable_fields(rows) == stable_fields(run_tolerance_sweep(p, eps, cfg)));
}

TEST_CASE("scalability sweep: one scene per size, sizes as parameters") {
  SceneParams p = small_params(EpipoleRegime::Outside, 72);
  ExperimentConfig cfg;
  cfg.methods = {Method::Angular};
  cfg.base.threads = 1;
  const auto rows = run_scalability_sweep(p, {200, 400}, cfg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].parameter == 200);
  CHECK(rows[1].parameter == 400);
  CHECK(rows[0].experiment == "scalability");
  CHECK(rows[1].match_count > rows[0].match_count);
}

TEST_CASE("noise sweep: level zero is the exact pose, higher levels degrade") {
  SceneParams p = small_params(EpipoleRegime::Inside, 73);
  p.repeat_fraction = 0.5;
  ExperimentConfig cfg;
  cfg.methods = {Method::Angular};
  cfg.base.threads = 1;
  const auto rows = run_noise_sweep(p, {0.0, 3.0}, cfg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].parameter == 0);
  CHECK(rows[0].experiment == "noise");

  // Level zero must agree exactly with a direct run on the same scene.
  const SyntheticScene scene = synth_scene(p);
  const auto direct = bench_methods(scene, cfg, "noise", 0.0);
  CHECK(stable_fields({rows[0]}) == stable_fields(direct));

  // A three-degree pose error moves envelopes off their keypoints.
  CHECK(rows[1].matching_recall < rows[0].matching_recall);
}

TEST_CASE("method names round-trip") {
  for (Method m : {Method::Angular, Method::Brute, Method::Grid, Method::Hash, Method::Unguided})
    CHECK(method_from_name(method_name(m)) == m);
  CHECK_THROWS_AS(method_from_name("fancy"), Error);
}
