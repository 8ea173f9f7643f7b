#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "epimatch/io.hpp"
#include "epimatch/matching.hpp"
#include "epimatch/metrics.hpp"
#include "epimatch/scene.hpp"
#include "epimatch/sweeps.hpp"

namespace {

using namespace epimatch;

// Scene-generation options shared by synth and sweep.
void add_scene_options(CLI::App* cmd, SceneParams& p) {
  cmd->add_option("--n", p.n_points, "co-visible 3D points")->check(CLI::PositiveNumber);
  cmd->add_option("--clutter", p.n_clutter, "extra unmatched keypoints per image")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--noise-sigma", p.pixel_noise_sigma, "pixel noise sigma on image-2 positions")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--descriptor-noise", p.descriptor_noise, "descriptor noise scale")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--descriptor-dim", p.descriptor_dim, "descriptor dimension");
  cmd->add_option("--repeat-fraction", p.repeat_fraction,
                  "fraction of points drawing descriptors from a shared dictionary");
  cmd->add_option("--repeat-group", p.repeat_group, "approximate keypoints per dictionary entry");
  cmd->add_option("--width", p.image_width, "image width in pixels")->check(CLI::PositiveNumber);
  cmd->add_option("--height", p.image_height, "image height in pixels")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--focal", p.focal, "focal length in pixels")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", p.seed, "scene RNG seed");
  cmd->add_option("--regime", [&p](const std::vector<std::string>& vals) {
        const std::string& v = vals.front();
        if (v == "inside") p.regime = EpipoleRegime::Inside;
        else if (v == "outside") p.regime = EpipoleRegime::Outside;
        else if (v == "near-border") p.regime = EpipoleRegime::NearBorder;
        else return false;
        return true;
      },
      "epipole placement: inside, outside, near-border")
      ->type_name("TEXT");
}

void add_match_options(CLI::App* cmd, MatchConfig& cfg, std::string& method_name_opt) {
  cmd->add_option("--method", method_name_opt,
                  "retrieval method: angular, brute, grid, hash, unguided");
  cmd->add_option("--epsilon", cfg.epsilon, "pixel tolerance of the epipolar envelope")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tau", cfg.tau, "ratio-test threshold")->check(CLI::PositiveNumber);
  cmd->add_option("--filter", [&cfg](const std::vector<std::string>& vals) {
        const std::string& v = vals.front();
        if (v == "ratio") cfg.filter = MatchFilter::RatioTest;
        else if (v == "nearest") cfg.filter = MatchFilter::NearestOnly;
        else return false;
        return true;
      },
      "match filter: ratio, nearest")
      ->type_name("TEXT");
  cmd->add_option("--bins", cfg.params.bins, "angular hash bin count")->check(CLI::PositiveNumber);
  cmd->add_option("--neighbor-width", cfg.params.neighbor_width,
                  "hash neighborhood half-width in bins")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--cell-size", cfg.params.cell_size, "grid cell size (0: use epsilon)");
  cmd->add_option("--threads", cfg.threads, "worker threads (0: hardware)")
      ->check(CLI::NonNegativeNumber);
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const std::string& n : names) out.push_back(method_from_name(n));
  if (out.empty()) throw Error("no methods given");
  return out;
}

LoadedScene load_input(const std::string& scene_dir, const std::string& pair_file) {
  if (!scene_dir.empty() && !pair_file.empty())
    throw Error("give either --scene or --pair, not both");
  if (!scene_dir.empty()) return read_scene_dir(scene_dir);
  if (!pair_file.empty()) return read_pair_json(pair_file);
  throw Error("an input is required: --scene DIR or --pair FILE");
}

void print_summary(const MatchResult& r, const LoadedScene& scene) {
  std::printf("matched %zu of %lld queries (%lld skipped)\n", r.matches.size(),
              static_cast<long long>(r.considered_queries + r.skipped_queries),
              static_cast<long long>(r.skipped_queries));
  std::printf("build %.3f ms | candidates %.3f ms | descriptors %.3f ms\n", r.timing.build_ms,
              r.timing.candidate_ms, r.timing.descriptor_ms);
  std::printf("mean candidates per query: %.2f\n", r.mean_candidates_per_query);
  if (r.candidate_recall >= 0) std::printf("candidate recall: %.4f\n", r.candidate_recall);
  if (!scene.ground_truth.empty()) {
    const MatchQuality q = score_matches(r.matches, scene.ground_truth);
    std::printf("matching recall: %.4f (%lld of %lld returned pairs correct)\n",
                q.matching_recall, static_cast<long long>(q.correct),
                static_cast<long long>(q.returned));
  }
}

int run(int argc, char** argv) {
  CLI::App app{"epipolar-guided keypoint matching tools"};
  app.require_subcommand(1);

  SceneParams scene_params;
  std::string out_path, scene_dir, pair_file;

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic two-view scene directory");
  add_scene_options(synth, scene_params);
  synth->add_option("--out", out_path, "output scene directory")->required();

  MatchConfig match_cfg;
  std::string method = "angular";
  bool want_stats = false;
  CLI::App* match = app.add_subcommand("match", "match keypoints between two views");
  match->add_option("--scene", scene_dir, "scene directory to read");
  match->add_option("--pair", pair_file, "pair JSON referencing cameras and keypoints");
  match->add_option("--out", out_path, "matches CSV to write")->required();
  add_match_options(match, match_cfg, method);
  match->add_flag("--stats", want_stats,
                  "also measure candidate recall against an exact scan (slower)");

  std::vector<std::string> method_names{"angular", "brute", "grid", "hash"};
  CLI::App* bench = app.add_subcommand("bench", "run every method once on a stored scene");
  bench->add_option("--scene", scene_dir, "scene directory to read")->required();
  bench->add_option("--out", out_path, "report CSV to write")->required();
  bench->add_option("--methods", method_names, "comma-separated method list")->delimiter(',');
  add_match_options(bench, match_cfg, method);

  std::string sweep_mode;
  std::vector<double> epsilons{10, 25, 50, 100, 200, 400};
  std::vector<int> sizes{1000, 5000, 10000, 50000};
  std::vector<double> levels{0, 0.5, 1, 2, 3.3};
  CLI::App* sweep = app.add_subcommand("sweep", "run a parameter sweep on synthetic scenes");
  sweep->add_option("--mode", sweep_mode, "tolerance, scalability, or noise")->required();
  sweep->add_option("--out", out_path, "report CSV to write")->required();
  sweep->add_option("--epsilons", epsilons, "tolerances for --mode tolerance")->delimiter(',');
  sweep->add_option("--sizes", sizes, "keypoint counts for --mode scalability")->delimiter(',');
  sweep->add_option("--levels", levels, "pose perturbation levels for --mode noise")
      ->delimiter(',');
  sweep->add_option("--methods", method_names, "comma-separated method list")->delimiter(',');
  add_scene_options(sweep, scene_params);
  add_match_options(sweep, match_cfg, method);

  double tree_epsilon = 50;
  CLI::App* dump_tree = app.add_subcommand(
      "dump-tree", "build the angular index for a scene and dump its structure as JSON");
  dump_tree->add_option("--scene", scene_dir, "scene directory to read")->required();
  dump_tree->add_option("--out", out_path, "JSON file to write")->required();
  dump_tree->add_option("--epsilon", tree_epsilon, "pixel tolerance")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (synth->parsed()) {
    const SyntheticScene scene = synth_scene(scene_params);
    write_scene_dir(out_path, scene);
    std::printf("wrote scene with %lld + %lld keypoints per image to %s\n",
                static_cast<long long>(scene_params.n_points),
                static_cast<long long>(scene_params.n_clutter), out_path.c_str());
    return 0;
  }

  if (match->parsed()) {
    const LoadedScene scene = load_input(scene_dir, pair_file);
    match_cfg.method = method_from_name(method);
    match_cfg.image_width = scene.cam2.width;
    match_cfg.image_height = scene.cam2.height;
    PipelineOptions opts;
    opts.measure_recall = want_stats;
    const MatchResult r = match_cfg.method == Method::Unguided
                              ? match_unguided(scene.kp1, scene.kp2, scene.f, match_cfg)
                              : match_guided(scene.kp1, scene.kp2, scene.f, match_cfg, opts);
    write_matches_csv(out_path, r.matches);
    print_summary(r, scene);
    return 0;
  }

  if (bench->parsed()) {
    const LoadedScene loaded = load_input(scene_dir, "");
    // Rebuild a scene view for the experiment runner.
    SyntheticScene scene;
    scene.cam1 = loaded.cam1;
    scene.cam2 = loaded.cam2;
    scene.pose = loaded.pose;
    scene.f = loaded.f;
    scene.kp1 = loaded.kp1;
    scene.kp2 = loaded.kp2;
    scene.ground_truth = loaded.ground_truth;
    ExperimentConfig cfg;
    cfg.methods = parse_methods(method_names);
    cfg.base = match_cfg;
    const auto rows = bench_methods(scene, cfg, "bench", match_cfg.epsilon);
    write_csv(out_path, rows);
    std::printf("wrote %zu rows to %s\n", rows.size(), out_path.c_str());
    return 0;
  }

  if (sweep->parsed()) {
    ExperimentConfig cfg;
    cfg.methods = parse_methods(method_names);
    cfg.base = match_cfg;
    std::vector<ReportRow> rows;
    if (sweep_mode == "tolerance")
      rows = run_tolerance_sweep(scene_params, epsilons, cfg);
    else if (sweep_mode == "scalability")
      rows = run_scalability_sweep(scene_params, sizes, cfg);
    else if (sweep_mode == "noise")
      rows = run_noise_sweep(scene_params, levels, cfg);
    else
      throw Error("unknown sweep mode: " + sweep_mode);
    write_csv(out_path, rows);
    std::printf("wrote %zu rows to %s\n", rows.size(), out_path.c_str());
    return 0;
  }

  if (dump_tree->parsed()) {
    const LoadedScene scene = load_input(scene_dir, "");
    const Epipole<double> e = epipole_of(scene.f);
    const EpipolarIndexd index = build_index(scene.kp2.positions, e, tree_epsilon);
    index.audit();
    write_tree_json(out_path, index);
    std::printf("wrote index over %lld keypoints (%zu intervals, depth %d) to %s\n",
                static_cast<long long>(index.keypoint_count()), index.interval_count(),
                index.depth(), out_path.c_str());
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const EpipoleAtInfinity& e) {
    std::fprintf(stderr,
                 "error: %s\n"
                 "The translation for this camera pair is parallel to the image plane, so the\n"
                 "epipole has no finite pixel position and angle-based retrieval is undefined.\n"
                 "Rerun with --method brute or --method grid, which work from the line itself.\n",
                 e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
}
