#pragma once

// Two-view primitives for semi-calibrated cameras sharing K = diag(f, f, 1).
// Image coordinates are always principal-point-centered pixels.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <span>

#include "twoac/error.hpp"

namespace twoac {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec9 = Eigen::Matrix<double, 9, 1>;

struct PointPair {
  double u1 = 0, v1 = 0;
  double u2 = 0, v2 = 0;

  Vec3 p1() const { return {u1, v1, 1.0}; }
  Vec3 p2() const { return {u2, v2, 1.0}; }
  bool finite() const {
    return std::isfinite(u1) && std::isfinite(v1) && std::isfinite(u2) && std::isfinite(v2);
  }
};

// Row-major [a1 a2; a3 a4]: the Jacobian of the image-2 point w.r.t. the
// image-1 point, i.e. a1 = du2/du1, a2 = du2/dv1, a3 = dv2/du1, a4 = dv2/dv1.
struct LocalAffinity {
  double a1 = 1, a2 = 0;
  double a3 = 0, a4 = 1;

  static LocalAffinity from_matrix(const Eigen::Matrix2d& m) {
    return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)};
  }
  Eigen::Matrix2d matrix() const {
    Eigen::Matrix2d m;
    m << a1, a2, a3, a4;
    return m;
  }
  double determinant() const { return a1 * a4 - a2 * a3; }
  bool invertible(double tol = 1e-12) const { return std::abs(determinant()) > tol; }
};

struct AffineCorrespondence {
  PointPair points;
  LocalAffinity affinity;
};

namespace detail {

// Unit Frobenius norm with the largest-magnitude entry made positive.
inline Mat3 normalize_sign_and_scale(const Mat3& m) {
  const double norm = m.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorCode::InvalidArgument, "matrix has zero or non-finite norm");
  }
  Mat3 out = m / norm;
  Eigen::Index r = 0, c = 0;
  out.cwiseAbs().maxCoeff(&r, &c);
  if (out(r, c) < 0.0) out = -out;
  return out;
}

}  // namespace detail

class FundamentalMatrix {
 public:
  FundamentalMatrix() : m_(Mat3::Zero()) { m_(2, 2) = 1.0; }

  // Normalizes the input; any nonzero scale of the same matrix maps to the
  // same FundamentalMatrix.
  explicit FundamentalMatrix(const Mat3& m) : m_(detail::normalize_sign_and_scale(m)) {}

  static FundamentalMatrix from_row_major(const Vec9& f) {
    Mat3 m;
    m << f(0), f(1), f(2), f(3), f(4), f(5), f(6), f(7), f(8);
    return FundamentalMatrix(m);
  }

  const Mat3& matrix() const { return m_; }
  double operator()(int r, int c) const { return m_(r, c); }

  Vec9 row_major() const {
    Vec9 f;
    f << m_(0, 0), m_(0, 1), m_(0, 2), m_(1, 0), m_(1, 1), m_(1, 2), m_(2, 0), m_(2, 1), m_(2, 2);
    return f;
  }

  bool is_rank_two(double tol = 1e-8) const { return std::abs(m_.determinant()) <= tol; }

 private:
  Mat3 m_;
};

// Sign-insensitive Frobenius distance between two normalized fundamental
// matrices.
inline double frobenius_distance(const FundamentalMatrix& a, const FundamentalMatrix& b) {
  return std::min((a.matrix() - b.matrix()).norm(), (a.matrix() + b.matrix()).norm());
}

class EssentialMatrix {
 public:
  explicit EssentialMatrix(const Mat3& m) : m_(detail::normalize_sign_and_scale(m)) {}

  const Mat3& matrix() const { return m_; }

  // |s1 - s2| / s1 and s3 / s1; both vanish for a valid essential matrix.
  std::array<double, 2> singular_value_defects() const {
    const Eigen::Vector3d s = Eigen::JacobiSVD<Mat3>(m_).singularValues();
    return {std::abs(s(0) - s(1)) / s(0), s(2) / s(0)};
  }

 private:
  Mat3 m_;
};

struct CameraIntrinsics {
  double f = 1.0;

  CameraIntrinsics() = default;
  explicit CameraIntrinsics(double focal) : f(focal) {
    if (!(focal > 0.0) || !std::isfinite(focal)) {
      throw Error(ErrorCode::InvalidArgument, "focal length must be positive and finite");
    }
  }

  Mat3 K() const { return Eigen::Vector3d(f, f, 1.0).asDiagonal(); }
  Mat3 K_inverse() const { return Eigen::Vector3d(1.0 / f, 1.0 / f, 1.0).asDiagonal(); }
};

// Camera 1 is [I | 0]; camera 2 maps X to R X + t.
struct RelativePose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::UnitX();

  Vec3 center1() const { return Vec3::Zero(); }
  Vec3 center2() const { return -rotation.transpose() * translation; }
};

struct ScenePoint {
  Vec3 q;
  Vec3 n;
};

inline Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

inline double epipolar_residual(const FundamentalMatrix& F, const PointPair& pp) {
  return pp.p2().dot(F.matrix() * pp.p1());
}

// K^T F K without renormalization.
// First-order geometric distance of a pair to the epipolar geometry, in
// pixels.
inline double sampson_distance(const FundamentalMatrix& F, const PointPair& pp) {
  const Vec3 Fp1 = F.matrix() * pp.p1();
  const Vec3 Ftp2 = F.matrix().transpose() * pp.p2();
  const double r = pp.p2().dot(Fp1);
  const double g = Fp1.head<2>().squaredNorm() + Ftp2.head<2>().squaredNorm();
  return g > 0.0 ? std::abs(r) / std::sqrt(g) : std::abs(r);
}

inline Mat3 calibrate(const Mat3& F, const CameraIntrinsics& K) {
  return K.K().transpose() * F * K.K();
}

inline EssentialMatrix f_to_e(const FundamentalMatrix& F, const CameraIntrinsics& K) {
  return EssentialMatrix(calibrate(F.matrix(), K));
}

inline FundamentalMatrix e_to_f(const EssentialMatrix& E, const CameraIntrinsics& K) {
  return FundamentalMatrix(K.K_inverse() * E.matrix() * K.K_inverse());
}

inline Mat3 essential_from_pose(const RelativePose& pose) {
  return skew(pose.translation) * pose.rotation;
}

// 2 F Q F^T Q F - tr(F Q F^T Q) F with Q = diag(1, 1, tau).
inline Mat3 trace_residual(const Mat3& F, double tau) {
  const Eigen::DiagonalMatrix<double, 3> Q(1.0, 1.0, tau);
  const Mat3 FQFtQ = F * Q * F.transpose() * Q;
  return 2.0 * FQFtQ * F - FQFtQ.trace() * F;
}

inline Mat3 trace_residual(const FundamentalMatrix& F, double tau) {
  return trace_residual(F.matrix(), tau);
}

// Linear (DLT) triangulation in camera-1 coordinates.
inline Vec3 triangulate(const RelativePose& pose, const CameraIntrinsics& K, const PointPair& pp) {
  const Vec3 x1 = K.K_inverse() * pp.p1();
  const Vec3 x2 = K.K_inverse() * pp.p2();

  Eigen::Matrix<double, 3, 4> P1 = Eigen::Matrix<double, 3, 4>::Zero();
  P1.leftCols<3>().setIdentity();
  Eigen::Matrix<double, 3, 4> P2;
  P2 << pose.rotation, pose.translation;

  Eigen::Matrix4d A;
  A.row(0) = x1.x() * P1.row(2) - P1.row(0);
  A.row(1) = x1.y() * P1.row(2) - P1.row(1);
  A.row(2) = x2.x() * P2.row(2) - P2.row(0);
  A.row(3) = x2.y() * P2.row(2) - P2.row(1);
  for (int i = 0; i < 4; ++i) A.row(i).normalize();

  const Eigen::JacobiSVD<Eigen::Matrix4d> svd(A, Eigen::ComputeFullV);
  const Eigen::Vector4d s = svd.singularValues();
  if (s(2) - s(3) <= 1e-12 * s(0)) {
    throw Error(ErrorCode::DegenerateRay, "triangulation null space is not one-dimensional");
  }
  const Eigen::Vector4d X = svd.matrixV().col(3);
  if (std::abs(X(3)) <= 1e-14 * X.head<3>().norm()) {
    throw Error(ErrorCode::DegenerateRay, "triangulated point lies at infinity");
  }
  return X.head<3>() / X(3);
}

// Chooses among the four (R, t) factorizations of E the one that puts the
// most triangulated correspondences in front of both cameras.
inline RelativePose decompose_essential(const EssentialMatrix& E, std::span<const PointPair> correspondences,
                                        const CameraIntrinsics& K) {
  if (correspondences.empty()) {
    throw Error(ErrorCode::InvalidArgument, "decompose_essential needs at least one correspondence");
  }
  const Eigen::JacobiSVD<Mat3> svd(E.matrix(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 U = svd.matrixU();
  Mat3 V = svd.matrixV();
  if (U.determinant() < 0) U = -U;
  if (V.determinant() < 0) V = -V;

  Mat3 W;
  W << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const Mat3 Ra = U * W * V.transpose();
  const Mat3 Rb = U * W.transpose() * V.transpose();
  const Vec3 t = U.col(2);

  const std::array<RelativePose, 4> candidates{
      RelativePose{Ra, t}, RelativePose{Ra, -t}, RelativePose{Rb, t}, RelativePose{Rb, -t}};

  int best = -1;
  int best_count = 0;
  for (int i = 0; i < 4; ++i) {
    int count = 0;
    for (const PointPair& pp : correspondences) {
      try {
        const Vec3 X = triangulate(candidates[i], K, pp);
        const Vec3 X2 = candidates[i].rotation * X + candidates[i].translation;
        if (X.z() > 0 && X2.z() > 0) ++count;
      } catch (const Error&) {
        // counts as not in front
      }
    }
    if (count > best_count) {
      best_count = count;
      best = i;
    }
  }
  if (best < 0) {
    throw Error(ErrorCode::AllCheiralityFail, "no decomposition places a point in front of both cameras");
  }
  return candidates[best];
}

// Surface normal at q from the local affinity. The plane-induced homography
// is restricted to the F-compatible family H(m) = K (R + t m^T) K^-1 with
// m = n / d; m is the least-squares solution of the four Jacobian equations
// A (h3 . p1) = H[0:2, 0:2] - p2 H[2, 0:2] and the two point-transfer
// equations. The result faces camera 1.
inline Vec3 estimate_normal(const RelativePose& pose, const CameraIntrinsics& K, const AffineCorrespondence& ac,
                            const Vec3& q) {
  if (!ac.affinity.invertible()) {
    throw Error(ErrorCode::NormalEstimationFailed, "affinity is singular");
  }
  const Mat3 H0 = K.K() * pose.rotation * K.K_inverse();
  const Vec3 e = K.K() * pose.translation;
  const Vec3 p1 = ac.points.p1();
  const Eigen::Vector2d p2(ac.points.u2, ac.points.v2);
  const Eigen::Matrix2d A = ac.affinity.matrix();
  const double h3p1 = H0.row(2).dot(p1);

  // Unknown w = K^-T m so that H = H0 + e w^T.
  Eigen::Matrix<double, 6, 3> lhs;
  Eigen::Matrix<double, 6, 1> rhs;
  int row = 0;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      Eigen::RowVector3d coef = A(r, c) * e.z() * p1.transpose();
      coef(c) += -e(r) + p2(r) * e.z();
      lhs.row(row) = coef;
      rhs(row) = -(A(r, c) * h3p1 - H0(r, c) + p2(r) * H0(2, c));
      ++row;
    }
  }
  const Vec3 H0p1 = H0 * p1;
  for (int r = 0; r < 2; ++r) {
    lhs.row(row) = (e(r) - p2(r) * e.z()) * p1.transpose();
    rhs(row) = -(H0p1(r) - p2(r) * H0p1.z());
    ++row;
  }

  const Eigen::JacobiSVD<Eigen::Matrix<double, 6, 3>> svd(lhs, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d s = svd.singularValues();
  if (!(s(2) > 1e-10 * s(0))) {
    throw Error(ErrorCode::NormalEstimationFailed, "normal system is rank deficient");
  }
  const Vec3 w = svd.solve(rhs);
  Vec3 m = K.K().transpose() * w;
  const double norm = m.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorCode::NormalEstimationFailed, "degenerate plane parameters");
  }
  m /= norm;
  if (m.dot(pose.center1() - q) < 0) m = -m;
  return m;
}

}  // namespace twoac
