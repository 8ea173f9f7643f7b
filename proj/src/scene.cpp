#include "epimatch/scene.hpp"

#include <cmath>
#include <random>

namespace epimatch {

namespace {

// Target pixel for the second epipole, by regime. Outside placements stay
// within roughly two frame widths so epipolar lines still fan visibly.
Vec2<double> epipole_target(const SceneParams& p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double w = p.image_width, h = p.image_height;
  switch (p.regime) {
    case EpipoleRegime::Inside: {
      return {w * (0.12 + 0.76 * unit(rng)), h * (0.12 + 0.76 * unit(rng))};
    }
    case EpipoleRegime::Outside: {
      const int side = static_cast<int>(rng() % 4);
      const double beyond = w * (0.6 + 1.6 * unit(rng));
      const double along = unit(rng);
      switch (side) {
        case 0: return {-beyond, h * along};
        case 1: return {w + beyond, h * along};
        case 2: return {w * along, -beyond};
        default: return {w * along, h + beyond};
      }
    }
    case EpipoleRegime::NearBorder:
    default: {
      const int side = static_cast<int>(rng() % 4);
      const double offset = w * 0.07 * (2.0 * unit(rng) - 1.0);
      const double along = unit(rng);
      switch (side) {
        case 0: return {offset, h * along};
        case 1: return {w + offset, h * along};
        case 2: return {w * along, offset};
        default: return {w * along, h + offset};
      }
    }
  }
}

Eigen::Matrix3d small_random_rotation(std::mt19937_64& rng, double max_angle) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::Vector3d axis(gauss(rng), gauss(rng), gauss(rng));
  axis.normalize();
  return Eigen::AngleAxisd(max_angle * unit(rng), axis).toRotationMatrix();
}

// Gaussian pixel offset, rescaled onto the 3-sigma circle when it would
// land outside. Keeps every observation provably near its epipolar line.
Vec2<double> clamped_noise(std::mt19937_64& rng, double sigma) {
  if (sigma <= 0) return {0, 0};
  std::normal_distribution<double> gauss(0.0, sigma);
  Vec2<double> n(gauss(rng), gauss(rng));
  const double len = n.norm();
  if (len > 3 * sigma) n *= 3 * sigma / len;
  return n;
}

Eigen::VectorXd unit_gaussian(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(dim);
  for (int d = 0; d < dim; ++d) v[d] = gauss(rng);
  v.normalize();
  return v;
}

}  // namespace

SyntheticScene synth_scene(const SceneParams& p) {
  if (p.n_points < 1) throw Error("a scene needs at least one co-visible point");
  if (p.descriptor_dim < 2) throw Error("descriptor dimension must be at least 2");
  if (p.repeat_fraction < 0 || p.repeat_fraction > 1)
    throw Error("repeat fraction must lie in [0, 1]");

  std::mt19937_64 rng(p.seed);
  SyntheticScene s;
  s.cam1.k << p.focal, 0, p.image_width / 2.0, 0, p.focal, p.image_height / 2.0, 0, 0, 1;
  s.cam1.width = p.image_width;
  s.cam1.height = p.image_height;
  s.cam2 = s.cam1;

  // Direction first: aiming K2 * t at the target pixel puts the epipole
  // exactly where the regime asked for it.
  const Vec2<double> target = epipole_target(p, rng);
  const Eigen::Vector3d ray = s.cam2.k.inverse() * Eigen::Vector3d(target.x(), target.y(), 1.0);
  s.pose.t = ray.normalized();
  s.pose.r = small_random_rotation(rng, 6.0 * pi / 180.0);
  s.f = fundamental_from_pose(s.cam1, s.cam2, s.pose);
  const Eigen::Vector3d h = s.cam2.k * s.pose.t;
  s.epipole2 = epipole_from_homogeneous(Vec3<double>(h));

  const int n1 = p.n_points + p.n_clutter;
  const int n2 = p.n_points + p.n_clutter;
  s.kp1.positions.resize(2, n1);
  s.kp2.positions.resize(2, n2);
  s.kp1.responses.resize(n1);
  s.kp2.responses.resize(n2);
  s.kp1.descriptors.resize(p.descriptor_dim, n1);
  s.kp2.descriptors.resize(p.descriptor_dim, n2);
  s.points3d.reserve(p.n_points);
  s.ground_truth.reserve(p.n_points);

  // Shared descriptor dictionary for the repeated fraction.
  const int dict_size = std::max(2, p.n_points / std::max(1, p.repeat_group));
  std::vector<Eigen::VectorXd> dictionary;
  if (p.repeat_fraction > 0) {
    dictionary.reserve(dict_size);
    for (int i = 0; i < dict_size; ++i) dictionary.push_back(unit_gaussian(rng, p.descriptor_dim));
  }

  std::uniform_real_distribution<double> ux(0.0, double(p.image_width));
  std::uniform_real_distribution<double> uy(0.0, double(p.image_height));
  std::uniform_real_distribution<double> uz(6.0, 18.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double desc_scale = p.descriptor_noise / std::sqrt(double(p.descriptor_dim));

  const Eigen::Matrix3d k1_inv = s.cam1.k.inverse();
  for (int i = 0; i < p.n_points; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      const double u = ux(rng), v = uy(rng), z = uz(rng);
      const Eigen::Vector3d x = z * (k1_inv * Eigen::Vector3d(u, v, 1.0));
      const Eigen::Vector3d xc2 = s.pose.r * x + s.pose.t;
      if (xc2.z() <= 1e-9) continue;
      const Eigen::Vector3d h2 = s.cam2.k * xc2;
      const Vec2<double> q(h2.x() / h2.z(), h2.y() / h2.z());
      if (q.x() < 0 || q.x() > p.image_width || q.y() < 0 || q.y() > p.image_height) continue;

      s.kp1.positions.col(i) << u, v;
      s.kp2.positions.col(i) = q + clamped_noise(rng, p.pixel_noise_sigma);
      s.points3d.push_back(x);
      s.ground_truth.push_back({i, i, i});

      Eigen::VectorXd base;
      if (!dictionary.empty() && unit(rng) < p.repeat_fraction)
        base = dictionary[rng() % dictionary.size()];
      else
        base = unit_gaussian(rng, p.descriptor_dim);
      for (int img = 0; img < 2; ++img) {
        Eigen::VectorXd d = base;
        if (p.descriptor_noise > 0)
          for (int k = 0; k < p.descriptor_dim; ++k) d[k] += gauss(rng) * desc_scale;
        (img == 0 ? s.kp1 : s.kp2).descriptors.col(i) = d;
      }
      s.kp1.responses[i] = unit(rng);
      s.kp2.responses[i] = unit(rng);
      placed = true;
    }
    if (!placed)
      throw InfeasibleCameraConfig("could not find a co-visible point for this camera pair");
  }

  // Clutter: plausible positions and descriptors with no counterpart.
  for (int c = 0; c < p.n_clutter; ++c) {
    for (int img = 0; img < 2; ++img) {
      KeypointSet& kp = img == 0 ? s.kp1 : s.kp2;
      const int at = p.n_points + c;
      kp.positions.col(at) << ux(rng), uy(rng);
      Eigen::VectorXd d = unit_gaussian(rng, p.descriptor_dim);
      if (p.descriptor_noise > 0)
        for (int k = 0; k < p.descriptor_dim; ++k) d[k] += gauss(rng) * desc_scale;
      kp.descriptors.col(at) = d;
      kp.responses[at] = unit(rng);
    }
  }

  return s;
}

}  // namespace epimatch
