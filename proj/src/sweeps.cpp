#include "epimatch/sweeps.hpp"

#include "epimatch/metrics.hpp"

namespace epimatch {

namespace {

ReportRow run_one(const SyntheticScene& scene, const FundamentalMatrix<double>& f, Method m,
                  const ExperimentConfig& cfg, const std::string& experiment, double parameter) {
  MatchConfig c = cfg.base;
  c.method = m;
  c.image_width = scene.cam2.width;
  c.image_height = scene.cam2.height;
  PipelineOptions opts;
  opts.measure_recall = cfg.measure_recall;
  const MatchResult r = m == Method::Unguided ? match_unguided(scene.kp1, scene.kp2, f, c)
                                              : match_guided(scene.kp1, scene.kp2, f, c, opts);
  const MatchQuality q = score_matches(r.matches, scene.ground_truth);

  ReportRow row;
  row.experiment = experiment;
  row.method = method_name(m);
  row.parameter = parameter;
  row.candidate_ms = r.timing.candidate_ms;
  row.descriptor_ms = r.timing.descriptor_ms;
  row.build_ms = r.timing.build_ms;
  row.candidate_recall = r.candidate_recall;
  row.matching_recall = q.matching_recall;
  row.match_count = q.returned;
  row.mean_candidates_per_query = r.mean_candidates_per_query;
  return row;
}

}  // namespace

std::vector<ReportRow> bench_methods(const SyntheticScene& scene, const ExperimentConfig& cfg,
                                     const std::string& experiment, double parameter) {
  std::vector<ReportRow> rows;
  rows.reserve(cfg.methods.size());
  for (Method m : cfg.methods) rows.push_back(run_one(scene, scene.f, m, cfg, experiment, parameter));
  return rows;
}

std::vector<ReportRow> run_tolerance_sweep(const SceneParams& params,
                                           const std::vector<double>& epsilons,
                                           const ExperimentConfig& cfg) {
  const SyntheticScene scene = synth_scene(params);
  std::vector<ReportRow> rows;
  rows.reserve(epsilons.size() * cfg.methods.size());
  for (double eps : epsilons) {
    ExperimentConfig at = cfg;
    at.base.epsilon = eps;
    for (Method m : at.methods) rows.push_back(run_one(scene, scene.f, m, at, "tolerance", eps));
  }
  return rows;
}

std::vector<ReportRow> run_scalability_sweep(const SceneParams& params,
                                             const std::vector<int>& sizes,
                                             const ExperimentConfig& cfg) {
  std::vector<ReportRow> rows;
  rows.reserve(sizes.size() * cfg.methods.size());
  for (int n : sizes) {
    SceneParams at = params;
    at.n_points = n;
    const SyntheticScene scene = synth_scene(at);
    for (Method m : cfg.methods)
      rows.push_back(run_one(scene, scene.f, m, cfg, "scalability", double(n)));
  }
  return rows;
}

std::vector<ReportRow> run_noise_sweep(const SceneParams& params,
                                       const std::vector<double>& levels,
                                       const ExperimentConfig& cfg) {
  const SyntheticScene scene = synth_scene(params);
  std::vector<ReportRow> rows;
  rows.reserve(levels.size() * cfg.methods.size());
  for (std::size_t k = 0; k < levels.size(); ++k) {
    // Distinct, reproducible perturbation stream per level.
    const RelativePose<double> noisy =
        perturb_pose(scene.pose, levels[k], params.seed + 7919 * (k + 1));
    const FundamentalMatrix<double> f = fundamental_from_pose(scene.cam1, scene.cam2, noisy);
    for (Method m : cfg.methods) rows.push_back(run_one(scene, f, m, cfg, "noise", levels[k]));
  }
  return rows;
}

}  // namespace epimatch
