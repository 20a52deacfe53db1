#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <utility>

#include "twoac/synth.hpp"

namespace twoac::testing {

// Two correspondences on different planes; two from the same plane give a
// rank-deficient system by construction.
inline std::pair<AffineCorrespondence, AffineCorrespondence> exact_pair(const SyntheticScene& scene, std::size_t i = 3,
                                                                        std::size_t j = 120) {
  return {scene.correspondences[i].exact, scene.correspondences[j].exact};
}

inline SyntheticScene scene(std::uint64_t seed, double sigma = 0.0) {
  SceneConfig cfg;
  cfg.seed = seed;
  cfg.noise_sigma = sigma;
  return generate(cfg);
}

inline double rel_err(double value, double truth) { return std::abs(value - truth) / std::abs(truth); }

inline double angle_deg(const Vec3& a, const Vec3& b) {
  const double c = std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

// Generic correspondence with no scene behind it.
inline AffineCorrespondence random_ac(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pt(-600.0, 600.0), diag(0.5, 1.5), off(-0.5, 0.5);
  AffineCorrespondence ac;
  ac.points = {pt(rng), pt(rng), pt(rng), pt(rng)};
  ac.affinity = {diag(rng), off(rng), off(rng), diag(rng)};
  return ac;
}

}  // namespace twoac::testing
