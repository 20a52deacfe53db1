#pragma once

// Focal length and fundamental matrix from two affine correspondences.
//
// Each correspondence contributes one epipolar and two affine rows, linear in
// the entries of F. Two correspondences leave a three-dimensional null space
// F = alpha a + beta b + gamma c. Substituting into det(F) = 0 and the nine
// entries of the focal trace constraint gives ten cubics in (alpha, beta,
// gamma) whose coefficients are quadratic in tau = 1 / f^2; tau is the hidden
// variable, and the roots of det(C(tau)) are the candidate focal lengths.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "twoac/error.hpp"
#include "twoac/geometry.hpp"
#include "twoac/polynomial.hpp"

namespace twoac {

using ConstraintRows = Eigen::Matrix<double, 3, 9>;
using Monomials = Eigen::Matrix<double, 10, 1>;

struct ConstraintSystem {
  Eigen::Matrix<double, 6, 9> rows;
};

struct NullBasis {
  Vec9 a, b, c;
};

struct GateFlags {
  bool physical_checked = false;
  bool physical = false;
  bool observability_checked = false;
  bool observability = false;
};

struct CandidateSolution {
  double f = 0.0;
  double tau = 0.0;
  FundamentalMatrix F;
  double alpha = 0.0, beta = 0.0, gamma = 0.0;
  double trace_residual = 0.0;
  // Distance between the normalized null vector of C(tau) and the monomials
  // rebuilt from (alpha, beta, gamma), both sign-aligned.
  double monomial_residual = 0.0;
  GateFlags gates;
};

// Rows: affine (du1), affine (dv1), epipolar; columns act on F row-major.
inline ConstraintRows build_rows(const AffineCorrespondence& ac) {
  const auto& [u1, v1, u2, v2] = ac.points;
  const auto& [a1, a2, a3, a4] = ac.affinity;
  ConstraintRows C;
  C << u2 + a1 * u1, a1 * v1, a1, v2 + a3 * u1, a3 * v1, a3, 1, 0, 0,
       a2 * u1, u2 + a2 * v1, a2, a4 * u1, v2 + a4 * v1, a4, 0, 1, 0,
       u1 * u2, v1 * u2, u2, u1 * v2, v1 * v2, v2, u1, v1, 1;
  return C;
}

inline ConstraintSystem build_system(const AffineCorrespondence& ac1, const AffineCorrespondence& ac2) {
  ConstraintSystem cs;
  cs.rows.topRows<3>() = build_rows(ac1);
  cs.rows.bottomRows<3>() = build_rows(ac2);
  return cs;
}

inline NullBasis null_basis(const ConstraintSystem& cs) {
  const Eigen::JacobiSVD<Eigen::Matrix<double, 6, 9>> svd(cs.rows, Eigen::ComputeFullV);
  const auto s = svd.singularValues();
  if (!(s(5) >= 1e-8 * s(0))) {
    throw Error(ErrorCode::DegenerateConfiguration, "constraint system has rank below six");
  }
  const auto& V = svd.matrixV();
  return {V.col(6), V.col(7), V.col(8)};
}

namespace detail {

inline Mat3 reshape_row_major(const Vec9& x) {
  Mat3 m;
  m << x(0), x(1), x(2), x(3), x(4), x(5), x(6), x(7), x(8);
  return m;
}

// Position of alpha^i beta^j gamma^k (sorted variable triple) in
// [a^3, a^2b, a^2c, ab^2, abc, ac^2, b^3, b^2c, bc^2, c^3].
constexpr int monomial_index(int i, int j, int k) {
  int v[3] = {i, j, k};
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2 - p; ++q)
      if (v[q] > v[q + 1]) {
        const int tmp = v[q];
        v[q] = v[q + 1];
        v[q + 1] = tmp;
      }
  constexpr int table[3][3][3] = {
      {{0, 1, 2}, {-1, 3, 4}, {-1, -1, 5}},
      {{-1, -1, -1}, {-1, 6, 7}, {-1, -1, 8}},
      {{-1, -1, -1}, {-1, -1, -1}, {-1, -1, 9}},
  };
  return table[v[0]][v[1]][v[2]];
}

}  // namespace detail

inline Monomials cubic_monomials(double a, double b, double c) {
  Monomials y;
  y << a * a * a, a * a * b, a * a * c, a * b * b, a * b * c, a * c * c, b * b * b, b * b * c, b * c * c, c * c * c;
  return y;
}

// Ten-by-ten C(tau): row 0 holds det(F), rows 1..9 the entries of
// 2 F Q F^T Q F - tr(F Q F^T Q) F in row-major order; column j multiplies the
// j-th cubic monomial. Built in extended precision: the determinant of C(tau)
// cancels heavily and the degree-15 structure only survives if the cells are
// accurate well beyond double.
using TraceScalar = long double;
using TraceMatrix = MatrixPolynomial<10, TraceScalar>;

inline TraceMatrix trace_coefficient_matrix(const NullBasis& basis) {
  using M3 = Eigen::Matrix<TraceScalar, 3, 3>;
  using Diag = Eigen::DiagonalMatrix<TraceScalar, 3>;
  const std::array<M3, 3> N{detail::reshape_row_major(basis.a).cast<TraceScalar>(),
                            detail::reshape_row_major(basis.b).cast<TraceScalar>(),
                            detail::reshape_row_major(basis.c).cast<TraceScalar>()};
  // Q = Q0 + tau Q1.
  const std::array<Diag, 2> Qs{Diag(1, 1, 0), Diag(0, 0, 1)};

  TraceMatrix M;
  std::array<TraceMatrix::Matrix*, 3> by_degree{&M.constant, &M.linear, &M.quadratic};

  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const Eigen::Matrix<TraceScalar, 1, 3> cross = N[i].row(0).cross(N[j].row(1));
      for (int k = 0; k < 3; ++k) {
        const int col = detail::monomial_index(i, j, k);
        M.constant(0, col) += cross.dot(N[k].row(2));

        for (int qa = 0; qa < 2; ++qa) {
          for (int qb = 0; qb < 2; ++qb) {
            const M3 XQYtQ = N[i] * Qs[qa] * N[j].transpose() * Qs[qb];
            const M3 term = TraceScalar(2) * XQYtQ * N[k] - XQYtQ.trace() * N[k];
            TraceMatrix::Matrix& target = *by_degree[qa + qb];
            for (int e = 0; e < 9; ++e) target(1 + e, col) += term(e / 3, e % 3);
          }
        }
      }
    }
  }
  return M;
}

// (alpha, beta, gamma) from a null vector of C(tau): the largest pure cube
// fixes one variable, the matching quadratic monomials give the others.
inline std::array<double, 3> recover_coefficients(const Monomials& y) {
  const std::array<double, 3> cubes{y(0), y(6), y(9)};
  int pivot = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(cubes[i]) > std::abs(cubes[pivot])) pivot = i;

  const double root = std::cbrt(cubes[pivot]);
  const double sq = root * root;
  std::array<double, 3> abc{};
  switch (pivot) {
    case 0: abc = {root, y(1) / sq, y(2) / sq}; break;  // a^2 b, a^2 c
    case 1: abc = {y(3) / sq, root, y(7) / sq}; break;  // a b^2, b^2 c
    default: abc = {y(5) / sq, y(8) / sq, root}; break; // a c^2, b c^2
  }
  const double norm = std::sqrt(abc[0] * abc[0] + abc[1] * abc[1] + abc[2] * abc[2]);
  for (double& v : abc) v /= norm;
  return abc;
}

namespace detail {

// Median distance of the four image points from the principal point.
inline double coordinate_scale(const AffineCorrespondence& ac1, const AffineCorrespondence& ac2) {
  std::array<double, 4> r{std::hypot(ac1.points.u1, ac1.points.v1), std::hypot(ac1.points.u2, ac1.points.v2),
                          std::hypot(ac2.points.u1, ac2.points.v1), std::hypot(ac2.points.u2, ac2.points.v2)};
  std::sort(r.begin(), r.end());
  const double s = 0.5 * (r[1] + r[2]);
  return s > 1e-9 ? s : 1.0;
}

inline AffineCorrespondence scale_points(const AffineCorrespondence& ac, double inv_scale) {
  AffineCorrespondence out = ac;
  out.points.u1 *= inv_scale;
  out.points.v1 *= inv_scale;
  out.points.u2 *= inv_scale;
  out.points.v2 *= inv_scale;
  return out;
}

}  // namespace detail

// The hidden-variable resultant det(C(tau)). It is built in coordinates
// divided by the median point radius s, where tau' = s^2 tau is of order one
// and the samples cover [-1, 1]; in raw units that is the interval
// [-1/s^2, 1/s^2]. Coefficient magnitudes are only comparable in the
// normalized variable, so that is the form kept.
struct Resultant {
  UnivariatePolynomial normalized;  // in tau' = scale^2 tau
  double scale = 1.0;

  // The same polynomial in raw tau.
  UnivariatePolynomial raw() const { return normalized.scaled(scale * scale); }
};

namespace detail {

struct ResultantParts {
  double scale;
  NullBasis basis;
  TraceMatrix C;
  UnivariatePolynomial det;
};

inline ResultantParts resultant_parts(const AffineCorrespondence& ac1, const AffineCorrespondence& ac2) {
  const double s = coordinate_scale(ac1, ac2);
  const NullBasis basis = null_basis(build_system(scale_points(ac1, 1.0 / s), scale_points(ac2, 1.0 / s)));
  TraceMatrix C = trace_coefficient_matrix(basis);
  UnivariatePolynomial det = det_poly(C, 1.0);
  return {s, basis, std::move(C), std::move(det)};
}

}  // namespace detail

// Full interpolated resultant, degrees 0..20, before truncation.
inline Resultant resultant(const AffineCorrespondence& ac1, const AffineCorrespondence& ac2) {
  auto parts = detail::resultant_parts(ac1, ac2);
  return {std::move(parts.det), parts.scale};
}

struct SolverOptions {
  // The resultant is degree 15; higher interpolated coefficients are dropped.
  int resultant_degree = 15;
};

// All candidate (f, F) pairs from two affine correspondences, sorted by the
// Frobenius norm of the trace-constraint residual.
inline std::vector<CandidateSolution> solve_two_ac(const AffineCorrespondence& ac1, const AffineCorrespondence& ac2,
                                                   const SolverOptions& options = {}) {
  // Affinities are scale-free, so only the points are rescaled.
  const auto [s, basis, C, full] = detail::resultant_parts(ac1, ac2);
  const UnivariatePolynomial det = full.truncated(static_cast<std::size_t>(options.resultant_degree));
  const std::vector<double> taus = real_positive_roots(det);

  const Eigen::DiagonalMatrix<double, 3> unscale(1.0 / s, 1.0 / s, 1.0);
  std::vector<CandidateSolution> out;
  out.reserve(taus.size());
  for (double tau_n : taus) {
    const Eigen::Matrix<double, 10, 10> C_tau = C(tau_n).cast<double>();
    const Eigen::JacobiSVD<Eigen::Matrix<double, 10, 10>> svd(C_tau, Eigen::ComputeFullV);
    const Monomials y = svd.matrixV().col(9);
    const auto [alpha, beta, gamma] = recover_coefficients(y);
    if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(gamma)) continue;

    const Vec9 x = alpha * basis.a + beta * basis.b + gamma * basis.c;
    const Mat3 F_raw = unscale * detail::reshape_row_major(x) * unscale;

    CandidateSolution cand;
    cand.tau = tau_n / (s * s);
    cand.f = s / std::sqrt(tau_n);
    cand.F = FundamentalMatrix(F_raw);
    cand.alpha = alpha;
    cand.beta = beta;
    cand.gamma = gamma;
    cand.trace_residual = trace_residual(cand.F, cand.tau).norm();

    Monomials rebuilt = cubic_monomials(alpha, beta, gamma).normalized();
    if (rebuilt.dot(y) < 0) rebuilt = -rebuilt;
    cand.monomial_residual = (rebuilt - y).norm();
    out.push_back(cand);
  }
  if (out.empty()) {
    throw Error(ErrorCode::NoRealRoot, "resultant has no positive real root");
  }

  std::stable_sort(out.begin(), out.end(), [](const CandidateSolution& lhs, const CandidateSolution& rhs) {
    return lhs.trace_residual < rhs.trace_residual;
  });
  return out;
}

}  // namespace twoac
