#include <gtest/gtest.h>

#include <vector>

#include "support.hpp"
#include "twoac/geometry.hpp"
#include "twoac/synth.hpp"

using namespace twoac;
using twoac::testing::angle_deg;
using twoac::testing::scene;

namespace {

Mat3 only_entry(int r, int c, double v = 1.0) {
  Mat3 m = Mat3::Zero();
  m(r, c) = v;
  return m;
}

RelativePose pose_from(const Mat3& R, const Vec3& t) { return RelativePose{R, t}; }

}  // namespace

TEST(FundamentalMatrix, NormalizesScaleAndSign) {
  Mat3 m;
  m << 1, -2, 3, -4, 5, -6, 7, -8, -9;
  const FundamentalMatrix a(m);
  const FundamentalMatrix b(-3.5 * m);
  EXPECT_NEAR(a.matrix().norm(), 1.0, 1e-15);
  EXPECT_GT(a(2, 2), 0.0);  // |-9| is the largest entry
  EXPECT_LT((a.matrix() - b.matrix()).norm(), 1e-15);
  EXPECT_NEAR(frobenius_distance(a, b), 0.0, 1e-15);
}

TEST(FundamentalMatrix, RejectsZero) {
  EXPECT_THROW(FundamentalMatrix(Mat3::Zero()), Error);
}

TEST(FundamentalMatrix, RowMajorRoundTrip) {
  Mat3 m;
  m << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9;
  const FundamentalMatrix F(m);
  EXPECT_LT((FundamentalMatrix::from_row_major(F.row_major()).matrix() - F.matrix()).norm(), 1e-15);
  EXPECT_DOUBLE_EQ(F.row_major()(1), F(0, 1));
}

TEST(EpipolarResidual, OnlyF9GivesOne) {
  const FundamentalMatrix F(only_entry(2, 2));
  EXPECT_DOUBLE_EQ(epipolar_residual(F, {12.5, -3.0, 40.0, 7.0}), 1.0);
  EXPECT_DOUBLE_EQ(epipolar_residual(F, {0, 0, 0, 0}), 1.0);
}

TEST(EpipolarResidual, PureForwardTranslation) {
  const FundamentalMatrix F(skew(Vec3::UnitZ()));
  EXPECT_DOUBLE_EQ(epipolar_residual(F, {1, 0, 1, 0}), 0.0);
}

TEST(EpipolarResidual, VanishesOnSyntheticScene) {
  const SyntheticScene s = scene(11);
  for (const auto& c : s.correspondences) EXPECT_LE(std::abs(epipolar_residual(s.F, c.exact.points)), 1e-10);
}

TEST(SampsonDistance, MeasuresPixelOffsetFromEpipolarLine) {
  // Horizontal epipolar lines: the distance is the vertical offset split
  // between the two images.
  const FundamentalMatrix F(skew(Vec3::UnitX()));
  EXPECT_NEAR(sampson_distance(F, {10, 0, 30, 0}), 0.0, 1e-15);
  EXPECT_NEAR(sampson_distance(F, {10, 0, 30, 2}), 2.0 / std::sqrt(2.0), 1e-12);
}

TEST(FToE, UnitFocalIsIdentityMap) {
  Mat3 m;
  m << 0.2, -0.1, 0.05, 0.3, 0.01, -0.4, 0.02, 0.5, 0.1;
  const FundamentalMatrix F(m);
  EXPECT_LT((f_to_e(F, CameraIntrinsics(1.0)).matrix() - F.matrix()).norm(), 1e-15);
}

TEST(FToE, ScalesRowsAndColumnsByFocal) {
  // K^T F K with K = diag(2, 2, 1) doubles the (0, 2) entry.
  EXPECT_DOUBLE_EQ(calibrate(only_entry(0, 2), CameraIntrinsics(2.0))(0, 2), 2.0);
  EXPECT_DOUBLE_EQ(calibrate(only_entry(1, 1), CameraIntrinsics(2.0))(1, 1), 4.0);
  EXPECT_DOUBLE_EQ(calibrate(only_entry(2, 2), CameraIntrinsics(2.0))(2, 2), 1.0);
}

TEST(FToE, SyntheticEssentialSatisfiesTraceConstraint) {
  const SyntheticScene s = scene(3);
  const EssentialMatrix E = f_to_e(s.F, s.K);
  EXPECT_LE(trace_residual(E.matrix(), 1.0).norm(), 1e-8);
  const auto defects = E.singular_value_defects();
  EXPECT_LE(defects[0], 1e-6);
  EXPECT_LE(defects[1], 1e-6);
}

TEST(TraceResidual, CanonicalEssentialIsZero) {
  Mat3 E;
  E << 0, -1, 0, 1, 0, 0, 0, 0, 0;
  EXPECT_LE(trace_residual(E, 1.0).norm(), 1e-15);
}

TEST(TraceResidual, TrueFocalSatisfiesConstraint) {
  for (std::uint64_t seed : {0u, 1u, 2u, 3u}) {
    const SyntheticScene s = scene(seed);
    EXPECT_LE(trace_residual(s.F, 1.0 / (600.0 * 600.0)).norm(), 1e-8) << "seed " << seed;
    EXPECT_LE(std::abs(s.F.matrix().determinant()), 1e-10);
  }
}

TEST(TraceResidual, WrongFocalViolatesConstraint) {
  // In pixel units the residual shrinks with tau, so the wrong focal length
  // is judged after calibrating with it: E = K^T F K normalized must then
  // fail the tau = 1 constraint by a wide margin.
  for (std::uint64_t seed : {0u, 1u, 2u, 3u}) {
    const SyntheticScene s = scene(seed);
    const EssentialMatrix wrong = f_to_e(s.F, CameraIntrinsics(300.0));
    EXPECT_GT(trace_residual(wrong.matrix(), 1.0).norm(), 1e-3) << "seed " << seed;
    const EssentialMatrix right = f_to_e(s.F, CameraIntrinsics(600.0));
    EXPECT_LE(trace_residual(right.matrix(), 1.0).norm(), 1e-8) << "seed " << seed;
  }
}

TEST(Triangulate, RecoversSyntheticPoints) {
  const SyntheticScene s = scene(5);
  for (const auto& c : s.correspondences) {
    const Vec3 q = triangulate(s.pose, s.K, c.exact.points);
    EXPECT_LE((q - c.truth.q).norm(), 1e-8 * c.truth.q.norm());

    const Vec3 x1 = s.K.K() * q;
    const Vec3 x2 = s.K.K() * (s.pose.rotation * q + s.pose.translation);
    EXPECT_LE(std::hypot(x1.x() / x1.z() - c.exact.points.u1, x1.y() / x1.z() - c.exact.points.v1), 1e-8);
    EXPECT_LE(std::hypot(x2.x() / x2.z() - c.exact.points.u2, x2.y() / x2.z() - c.exact.points.v2), 1e-8);
  }
}

TEST(Triangulate, ZeroBaselineIsDegenerate) {
  const RelativePose still = pose_from(Mat3::Identity(), Vec3::Zero());
  try {
    triangulate(still, CameraIntrinsics(500.0), {10, 20, 10, 20});
    FAIL() << "expected DegenerateRay";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateRay);
  }
}

TEST(Triangulate, PointOnBaselineIsDegenerate) {
  // Translation along the optical axis: the principal ray is the baseline.
  const RelativePose forward = pose_from(Mat3::Identity(), Vec3(0, 0, -1));
  try {
    triangulate(forward, CameraIntrinsics(500.0), {0, 0, 0, 0});
    FAIL() << "expected DegenerateRay";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateRay);
  }
}

TEST(DecomposeEssential, PureSidewaysTranslation) {
  const CameraIntrinsics K(1.0);
  const RelativePose truth = pose_from(Mat3::Identity(), Vec3::UnitX());
  std::vector<PointPair> pts;
  for (const Vec3& X : {Vec3(0.1, 0.2, 2.0), Vec3(-0.3, 0.1, 3.0), Vec3(0.5, -0.4, 4.0)}) {
    const Vec3 X2 = X + truth.translation;
    pts.push_back({X.x() / X.z(), X.y() / X.z(), X2.x() / X2.z(), X2.y() / X2.z()});
  }
  const RelativePose got = decompose_essential(EssentialMatrix(essential_from_pose(truth)), pts, K);
  EXPECT_LT((got.rotation - Mat3::Identity()).norm(), 1e-12);
  EXPECT_LT((got.translation - Vec3::UnitX()).norm(), 1e-12);
}

TEST(DecomposeEssential, RecoversSyntheticPose) {
  for (std::uint64_t seed : {1u, 8u, 21u}) {
    const SyntheticScene s = scene(seed);
    std::vector<PointPair> pts;
    for (int i = 0; i < 20; ++i) pts.push_back(s.correspondences[static_cast<std::size_t>(i) * 12].exact.points);
    const RelativePose got = decompose_essential(f_to_e(s.F, s.K), pts, s.K);
    const Eigen::AngleAxisd dR(got.rotation * s.pose.rotation.transpose());
    EXPECT_LE(std::abs(dR.angle()), 1e-6);
    EXPECT_LE(angle_deg(got.translation, s.pose.translation) * std::numbers::pi / 180.0, 1e-6);

    // Recomposition reproduces the essential matrix.
    const EssentialMatrix E = f_to_e(s.F, s.K);
    const EssentialMatrix again(essential_from_pose(got));
    EXPECT_LE(std::min((E.matrix() - again.matrix()).norm(), (E.matrix() + again.matrix()).norm()), 1e-8);
  }
}

TEST(DecomposeEssential, RaysThatNeverMeetFailCheirality) {
  // Zero disparity under sideways translation puts every point at infinity.
  const RelativePose truth = pose_from(Mat3::Identity(), Vec3::UnitX());
  const std::vector<PointPair> pts{{0, 0, 0, 0}, {100, 50, 100, 50}};
  try {
    decompose_essential(EssentialMatrix(essential_from_pose(truth)), pts, CameraIntrinsics(500.0));
    FAIL() << "expected AllCheiralityFail";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AllCheiralityFail);
  }
}

TEST(EstimateNormal, FrontoParallelPlaneFacesCamera) {
  const CameraIntrinsics K(500.0);
  const RelativePose pose = pose_from(Mat3::Identity(), Vec3::UnitX());
  const Plane plane{Vec3::UnitZ(), 4.0};
  const Eigen::Vector2d p1(30.0, -20.0);
  AffineCorrespondence ac;
  const Vec3 X = 4.0 * K.K_inverse() * Vec3(p1.x(), p1.y(), 1.0);
  const Vec3 X2 = X + pose.translation;
  ac.points = {p1.x(), p1.y(), K.f * X2.x() / X2.z(), K.f * X2.y() / X2.z()};
  ac.affinity = affinity_from_plane(pose, K, plane, p1);
  EXPECT_NEAR(ac.affinity.a1, 1.0, 1e-12);
  EXPECT_NEAR(ac.affinity.a2, 0.0, 1e-12);

  const Vec3 n = estimate_normal(pose, K, ac, triangulate(pose, K, ac.points));
  EXPECT_LE((n - Vec3(0, 0, -1)).norm(), 1e-6);
}

TEST(EstimateNormal, MatchesSyntheticPlanes) {
  for (std::uint64_t seed : {0u, 4u, 9u}) {
    const SyntheticScene s = scene(seed);
    for (const auto& c : s.correspondences) {
      const Vec3 q = triangulate(s.pose, s.K, c.exact.points);
      const Vec3 n = estimate_normal(s.pose, s.K, c.exact, q);
      EXPECT_NEAR(n.norm(), 1.0, 1e-12);
      EXPECT_GT(n.dot(-q), 0.0);
      EXPECT_LT(angle_deg(n, c.truth.n), 0.1);
    }
  }
}

TEST(EstimateNormal, IndependentOfTranslationScale) {
  const SyntheticScene s = scene(2);
  const auto& c = s.correspondences[40];
  const Vec3 q = triangulate(s.pose, s.K, c.exact.points);
  const Vec3 n = estimate_normal(s.pose, s.K, c.exact, q);
  const RelativePose stretched = pose_from(s.pose.rotation, 3.0 * s.pose.translation);
  const Vec3 n3 = estimate_normal(stretched, s.K, c.exact, 3.0 * q);
  EXPECT_LE((n - n3).norm(), 1e-8);
}

TEST(EstimateNormal, SingularAffinityFails) {
  const SyntheticScene s = scene(2);
  AffineCorrespondence ac = s.correspondences[0].exact;
  ac.affinity = {1.0, 2.0, 2.0, 4.0};
  try {
    estimate_normal(s.pose, s.K, ac, Vec3(0, 0, 1));
    FAIL() << "expected NormalEstimationFailed";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NormalEstimationFailed);
  }
}

// The affine rows say A^T (F p1)[0:2] = -(F^T p2)[0:2]; the inverse form is
// the one stated for the lemma.
TEST(AffineLemma, HoldsOnSyntheticCorrespondences) {
  for (std::uint64_t seed : {0u, 6u, 13u}) {
    const SyntheticScene s = scene(seed);
    const Mat3& F = s.F.matrix();
    for (const auto& c : s.correspondences) {
      const Eigen::Vector2d n2 = (F.transpose() * c.exact.points.p2()).head<2>();
      const Eigen::Vector2d n1 = (F * c.exact.points.p1()).head<2>();
      const Eigen::Vector2d lhs = c.exact.affinity.matrix().inverse().transpose() * n2;
      EXPECT_LE((lhs + n1).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}
