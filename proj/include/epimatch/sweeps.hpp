#pragma once

#include <string>
#include <vector>

#include "epimatch/matching.hpp"
#include "epimatch/report.hpp"
#include "epimatch/scene.hpp"

namespace epimatch {

// What to run and how, shared by all experiments. The base config's epsilon,
// ratio threshold, filter, structure knobs and thread count apply everywhere;
// image dimensions always come from the scene.
struct ExperimentConfig {
  std::vector<Method> methods{Method::Angular, Method::Brute, Method::Grid, Method::Hash};
  MatchConfig base;
  bool measure_recall = true;
};

// One row per method on a fixed scene.
std::vector<ReportRow> bench_methods(const SyntheticScene& scene, const ExperimentConfig& cfg,
                                     const std::string& experiment, double parameter);

// Same scene, varying pixel tolerance. Row order: tolerance-major,
// method-minor, methods in the configured order.
std::vector<ReportRow> run_tolerance_sweep(const SceneParams& params,
                                           const std::vector<double>& epsilons,
                                           const ExperimentConfig& cfg);

// Fresh scene per keypoint count, same seed and regime.
std::vector<ReportRow> run_scalability_sweep(const SceneParams& params,
                                             const std::vector<int>& sizes,
                                             const ExperimentConfig& cfg);

// One scene; per level, matching runs under a camera pose perturbed by that
// level while ground truth stays tied to the true geometry. Level zero uses
// the exact pose bit for bit.
std::vector<ReportRow> run_noise_sweep(const SceneParams& params,
                                       const std::vector<double>& levels,
                                       const ExperimentConfig& cfg);

}  // namespace epimatch
