#pragma once

// Synthetic two-view scenes: camera 1 at [0 0 1] looking at the origin,
// camera 2 a fixed distance away in a random direction looking at a random
// point near the origin, random planes through the origin sampled inside both
// views.
// Affinities are Jacobians of the plane-induced homographies.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "twoac/error.hpp"
#include "twoac/geometry.hpp"

namespace twoac {

enum class AffinityNoise {
  // Jacobian of the true plane homography evaluated at the noisy point.
  Recompute,
  // Independent N(0, (sigma * scale)^2) added to each affinity entry.
  Additive,
  Both,
};

struct SceneConfig {
  double focal = 600.0;
  Vec3 camera1_position{0.0, 0.0, 1.0};
  double baseline = 0.15;
  // Camera 2 looks at a point drawn uniformly from the cube of half-size
  // camera2_target_spread around camera2_target. A spread of zero makes the
  // optical axes meet, which is critical for a shared unknown focal length.
  Vec3 camera2_target{0.0, 0.0, 0.0};
  double camera2_target_spread = 0.5;
  int plane_count = 5;
  int samples_per_plane = 50;
  double noise_sigma = 0.0;
  double outlier_fraction = 0.0;
  // Multiplies the image-2 v coordinate before noise.
  double aspect_ratio = 1.0;
  AffinityNoise affinity_noise = AffinityNoise::Recompute;
  double affinity_noise_scale = 0.01;
  // Half-size of the square sampled on each plane (world units).
  double plane_extent = 0.5;
  double image_width = 1200.0;
  double image_height = 800.0;
  std::uint64_t seed = 0;
};

// Plane n^T X = d in camera-1 coordinates, d in the units of the pose's
// translation.
struct Plane {
  Vec3 normal;
  double distance = 0.0;
};

struct SyntheticCorrespondence {
  AffineCorrespondence measured;
  AffineCorrespondence exact;
  // Ground truth in camera-1 coordinates scaled so that the baseline is 1.
  ScenePoint truth;
  int plane = -1;
  bool outlier = false;
};

struct SyntheticScene {
  SceneConfig config;
  CameraIntrinsics K;
  // Unit-baseline relative pose of camera 2.
  RelativePose pose;
  FundamentalMatrix F;
  Mat3 E = Mat3::Zero();
  std::vector<Plane> planes;
  std::vector<SyntheticCorrespondence> correspondences;

  std::vector<AffineCorrespondence> measured() const {
    std::vector<AffineCorrespondence> out;
    out.reserve(correspondences.size());
    for (const auto& c : correspondences) out.push_back(c.measured);
    return out;
  }
  std::vector<AffineCorrespondence> exact() const {
    std::vector<AffineCorrespondence> out;
    out.reserve(correspondences.size());
    for (const auto& c : correspondences) out.push_back(c.exact);
    return out;
  }
};

// K (R + t n^T / d) K^-1.
inline Mat3 plane_homography(const RelativePose& pose, const CameraIntrinsics& K, const Plane& plane) {
  const double rel = std::abs(plane.distance) / std::max(1.0, pose.translation.norm());
  if (!(rel > 1e-12)) {
    throw Error(ErrorCode::PlaneThroughCenter, "plane contains camera 1 center");
  }
  const Mat3 G = pose.rotation + pose.translation * plane.normal.transpose() / plane.distance;
  // det(R + t n^T / d) = 1 - n . c2 / d vanishes iff camera 2 lies on the plane.
  if (std::abs(G.determinant()) < 1e-12) {
    throw Error(ErrorCode::PlaneThroughCenter, "plane contains camera 2 center");
  }
  return K.K() * G * K.K_inverse();
}

inline Eigen::Matrix2d homography_jacobian(const Mat3& H, const Vec3& p1) {
  const Vec3 hp = H * p1;
  const double w = hp.z();
  const Eigen::Vector2d p2 = hp.head<2>() / w;
  Eigen::Matrix2d J;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) J(r, c) = (H(r, c) - p2(r) * H(2, c)) / w;
  return J;
}

inline LocalAffinity affinity_from_plane(const RelativePose& pose, const CameraIntrinsics& K, const Plane& plane,
                                         const Eigen::Vector2d& p1) {
  const Mat3 H = plane_homography(pose, K, plane);
  return LocalAffinity::from_matrix(homography_jacobian(H, Vec3(p1.x(), p1.y(), 1.0)));
}

namespace detail {

// Rows are the camera axes in world coordinates; z points at `target`.
inline Mat3 look_at(const Vec3& eye, const Vec3& target) {
  const Vec3 z = (target - eye).normalized();
  Vec3 up = Vec3::UnitY();
  if (std::abs(up.dot(z)) > 0.99) up = Vec3::UnitX();
  const Vec3 x = up.cross(z).normalized();
  const Vec3 y = z.cross(x);
  Mat3 R;
  R.row(0) = x;
  R.row(1) = y;
  R.row(2) = z;
  return R;
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(n(rng), n(rng), n(rng));
  } while (v.norm() < 1e-9);
  return v.normalized();
}

inline bool inside_image(const Eigen::Vector2d& p, const SceneConfig& cfg) {
  return std::abs(p.x()) <= 0.5 * cfg.image_width && std::abs(p.y()) <= 0.5 * cfg.image_height;
}

}  // namespace detail

// Perturbs the measurements of every inlier; exact copies and ground truth
// are left untouched. Aspect-ratio distortion is applied before noise.
inline SyntheticScene add_noise(SyntheticScene scene, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise sigma must be non-negative");
  const SceneConfig& cfg = scene.config;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> point_noise(0.0, 1.0);
  std::normal_distribution<double> entry_noise(0.0, 1.0);
  const bool recompute = cfg.affinity_noise != AffinityNoise::Additive;
  const bool additive = cfg.affinity_noise != AffinityNoise::Recompute;

  for (auto& c : scene.correspondences) {
    if (c.outlier) continue;
    AffineCorrespondence m = c.exact;
    m.points.v2 *= cfg.aspect_ratio;
    m.affinity.a3 *= cfg.aspect_ratio;
    m.affinity.a4 *= cfg.aspect_ratio;
    if (sigma > 0.0) {
      m.points.u1 += sigma * point_noise(rng);
      m.points.v1 += sigma * point_noise(rng);
      m.points.u2 += sigma * point_noise(rng);
      m.points.v2 += sigma * point_noise(rng);
      if (recompute && c.plane >= 0) {
        m.affinity = affinity_from_plane(scene.pose, scene.K, scene.planes[static_cast<std::size_t>(c.plane)],
                                         {m.points.u1, m.points.v1});
        m.affinity.a3 *= cfg.aspect_ratio;
        m.affinity.a4 *= cfg.aspect_ratio;
      }
      if (additive) {
        const double s = sigma * cfg.affinity_noise_scale;
        m.affinity.a1 += s * entry_noise(rng);
        m.affinity.a2 += s * entry_noise(rng);
        m.affinity.a3 += s * entry_noise(rng);
        m.affinity.a4 += s * entry_noise(rng);
      }
    }
    c.measured = m;
  }
  return scene;
}

inline SyntheticScene generate(const SceneConfig& cfg) {
  if (!(cfg.baseline > 0.0)) throw Error(ErrorCode::InvalidArgument, "baseline must be positive");
  if (!(cfg.noise_sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise sigma must be non-negative");
  if (!(cfg.outlier_fraction >= 0.0 && cfg.outlier_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "outlier fraction must lie in [0, 1)");
  }
  if (cfg.plane_count < 1 || cfg.samples_per_plane < 1) {
    throw Error(ErrorCode::InvalidArgument, "plane and sample counts must be positive");
  }

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  SyntheticScene scene;
  scene.config = cfg;
  scene.K = CameraIntrinsics(cfg.focal);

  const Vec3 c1 = cfg.camera1_position;
  Vec3 c2;
  Mat3 R1, R2;
  R1 = detail::look_at(c1, Vec3::Zero());
  do {
    c2 = c1 + cfg.baseline * detail::random_unit(rng);
  } while (c2.norm() < 1e-6);
  // Redraw until camera 2 sees the origin, which every plane passes through.
  for (int tries = 0;; ++tries) {
    if (tries > 10000) throw Error(ErrorCode::FieldOfViewExhausted, "camera 2 cannot see the origin");
    const Vec3 target = cfg.camera2_target + cfg.camera2_target_spread * Vec3(unit(rng), unit(rng), unit(rng));
    if ((target - c2).norm() < 1e-6) continue;
    R2 = detail::look_at(c2, target);
    const Vec3 o = R2 * (Vec3::Zero() - c2);
    if (o.z() > 0 && detail::inside_image({cfg.focal * o.x() / o.z(), cfg.focal * o.y() / o.z()}, cfg)) break;
  }

  // x_i = R_i (X - c_i)  =>  x_2 = R x_1 + t.
  const Mat3 R = R2 * R1.transpose();
  const Vec3 t_metric = R2 * (c1 - c2);
  scene.pose = RelativePose{R, t_metric.normalized()};
  const double scale = 1.0 / t_metric.norm();
  scene.E = essential_from_pose(scene.pose);
  scene.F = FundamentalMatrix(scene.K.K_inverse() * scene.E * scene.K.K_inverse());

  const auto project = [&](const Mat3& Ri, const Vec3& ci, const Vec3& X, double& depth) {
    const Vec3 x = Ri * (X - ci);
    depth = x.z();
    return Eigen::Vector2d(cfg.focal * x.x() / x.z(), cfg.focal * x.y() / x.z());
  };

  for (int p = 0; p < cfg.plane_count; ++p) {
    // Both cameras must see the same side of the plane, not at a grazing angle.
    Vec3 nw;
    int tries = 0;
    for (;; ++tries) {
      if (tries > 10000) throw Error(ErrorCode::FieldOfViewExhausted, "could not place a visible plane");
      nw = detail::random_unit(rng);
      const double d1 = nw.dot(c1.normalized());
      const double d2 = nw.dot(c2.normalized());
      if (d1 < 0) nw = -nw;
      if (std::abs(d1) > 0.3 && std::abs(d2) > 0.3 && d1 * d2 > 0) break;
    }
    Vec3 e1 = nw.unitOrthogonal();
    Vec3 e2 = nw.cross(e1);

    // Camera-1 frame: X_c = R1 (X - c1), so n_c = R1 n_w and d = -n_w . c1.
    Plane plane{R1 * nw, -nw.dot(c1) * scale};
    const int plane_index = static_cast<int>(scene.planes.size());
    scene.planes.push_back(plane);
    const Mat3 H = plane_homography(scene.pose, scene.K, plane);

    int accepted = 0;
    int misses = 0;
    while (accepted < cfg.samples_per_plane) {
      const Vec3 X = cfg.plane_extent * (unit(rng) * e1 + unit(rng) * e2);
      double z1 = 0, z2 = 0;
      const Eigen::Vector2d p1 = project(R1, c1, X, z1);
      const Eigen::Vector2d p2 = project(R2, c2, X, z2);
      if (!(z1 > 0 && z2 > 0 && detail::inside_image(p1, cfg) && detail::inside_image(p2, cfg))) {
        if (++misses >= 1000) {
          throw Error(ErrorCode::FieldOfViewExhausted, "1000 consecutive samples fell outside the views");
        }
        continue;
      }
      misses = 0;
      SyntheticCorrespondence sc;
      sc.exact.points = PointPair{p1.x(), p1.y(), p2.x(), p2.y()};
      sc.exact.affinity = LocalAffinity::from_matrix(homography_jacobian(H, Vec3(p1.x(), p1.y(), 1.0)));
      sc.measured = sc.exact;
      sc.truth.q = R1 * (X - c1) * scale;
      sc.truth.n = plane.normal;
      if (sc.truth.n.dot(-sc.truth.q) < 0) sc.truth.n = -sc.truth.n;
      sc.plane = plane_index;
      scene.correspondences.push_back(sc);
      ++accepted;
    }
  }

  // Outliers replace whole correspondences with uniform draws.
  const std::size_t total = scene.correspondences.size();
  const auto outliers = static_cast<std::size_t>(std::llround(cfg.outlier_fraction * static_cast<double>(total)));
  if (outliers > 0) {
    std::vector<std::size_t> idx(total);
    for (std::size_t i = 0; i < total; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    std::uniform_real_distribution<double> ux(-0.5 * cfg.image_width, 0.5 * cfg.image_width);
    std::uniform_real_distribution<double> uy(-0.5 * cfg.image_height, 0.5 * cfg.image_height);
    std::uniform_real_distribution<double> diag(0.5, 1.5);
    std::uniform_real_distribution<double> off(-0.5, 0.5);
    for (std::size_t k = 0; k < outliers; ++k) {
      auto& c = scene.correspondences[idx[k]];
      c.outlier = true;
      c.measured.points = PointPair{ux(rng), uy(rng), ux(rng), uy(rng)};
      c.measured.affinity = LocalAffinity{diag(rng), off(rng), off(rng), diag(rng)};
    }
  }

  return add_noise(std::move(scene), cfg.noise_sigma, cfg.seed ^ 0x9e3779b97f4a7c15ULL);
}

}  // namespace twoac
