#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/Polynomials>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <numbers>
#include <vector>

#include "twoac/error.hpp"

namespace twoac {

// Dense real polynomial, coefficients in ascending degree.
class UnivariatePolynomial {
 public:
  UnivariatePolynomial() : coeffs_{0.0} {}
  explicit UnivariatePolynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) coeffs_.push_back(0.0);
  }
  UnivariatePolynomial(std::initializer_list<double> coeffs) : UnivariatePolynomial(std::vector<double>(coeffs)) {}

  const std::vector<double>& coefficients() const { return coeffs_; }
  std::size_t size() const { return coeffs_.size(); }
  double operator[](std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : 0.0; }

  double max_abs_coefficient() const {
    double m = 0.0;
    for (double c : coeffs_) m = std::max(m, std::abs(c));
    return m;
  }

  // Index of the last coefficient above 1e-12 of the largest one; -1 for the
  // zero polynomial.
  int degree(double rel_tol = 1e-12) const {
    const double cutoff = rel_tol * max_abs_coefficient();
    for (int i = static_cast<int>(coeffs_.size()) - 1; i >= 0; --i) {
      if (std::abs(coeffs_[static_cast<std::size_t>(i)]) > cutoff) return i;
    }
    return -1;
  }

  double operator()(double x) const {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  UnivariatePolynomial derivative() const {
    if (coeffs_.size() <= 1) return UnivariatePolynomial{0.0};
    std::vector<double> d(coeffs_.size() - 1);
    for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = static_cast<double>(i) * coeffs_[i];
    return UnivariatePolynomial(std::move(d));
  }

  // Drops every coefficient above max_degree.
  UnivariatePolynomial truncated(std::size_t max_degree) const {
    std::vector<double> c(coeffs_.begin(), coeffs_.begin() + std::min(coeffs_.size(), max_degree + 1));
    return UnivariatePolynomial(std::move(c));
  }

  // q(t) = p(scale * t).
  UnivariatePolynomial scaled(double scale) const {
    std::vector<double> c(coeffs_);
    double s = 1.0;
    for (double& ci : c) {
      ci *= s;
      s *= scale;
    }
    return UnivariatePolynomial(std::move(c));
  }

  friend UnivariatePolynomial operator*(const UnivariatePolynomial& a, const UnivariatePolynomial& b) {
    std::vector<double> c(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
    return UnivariatePolynomial(std::move(c));
  }

  friend UnivariatePolynomial operator+(const UnivariatePolynomial& a, const UnivariatePolynomial& b) {
    std::vector<double> c(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = a[i] + b[i];
    return UnivariatePolynomial(std::move(c));
  }

  friend UnivariatePolynomial operator-(const UnivariatePolynomial& a, const UnivariatePolynomial& b) {
    std::vector<double> c(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = a[i] - b[i];
    return UnivariatePolynomial(std::move(c));
  }

 private:
  std::vector<double> coeffs_;
};

// Square matrix whose cells are polynomials of degree <= 2 in tau, stored as
// M(tau) = constant + tau * linear + tau^2 * quadratic. Scalar may be wider
// than double when the determinant suffers from cancellation.
template <int N, typename Scalar = double>
struct MatrixPolynomial {
  using Matrix = Eigen::Matrix<Scalar, N, N>;

  Matrix constant = Matrix::Zero();
  Matrix linear = Matrix::Zero();
  Matrix quadratic = Matrix::Zero();

  static constexpr int size = N;

  Matrix operator()(Scalar tau) const { return constant + tau * (linear + tau * quadratic); }

  UnivariatePolynomial cell(int r, int c) const {
    return UnivariatePolynomial{static_cast<double>(constant(r, c)), static_cast<double>(linear(r, c)),
                                static_cast<double>(quadratic(r, c))};
  }

  // Highest tau power with a nonzero entry in row r.
  int row_degree(int r) const {
    if (!quadratic.row(r).isZero(0)) return 2;
    if (!linear.row(r).isZero(0)) return 1;
    return 0;
  }
};

namespace detail {

// Ascending monomial coefficients of T_0 .. T_n.
template <typename Scalar>
std::vector<std::vector<Scalar>> chebyshev_monomials(int n) {
  const auto size = static_cast<std::size_t>(n) + 1;
  std::vector<std::vector<Scalar>> T(size, std::vector<Scalar>(size, Scalar(0)));
  T[0][0] = 1;
  if (n >= 1) T[1][1] = 1;
  for (std::size_t k = 2; k < size; ++k) {
    for (std::size_t j = 0; j <= k; ++j) {
      const Scalar shifted = j > 0 ? 2 * T[k - 1][j - 1] : Scalar(0);
      T[k][j] = shifted - T[k - 2][j];
    }
  }
  return T;
}

}  // namespace detail

// Interpolates a polynomial of degree <= max_degree from its values at the
// Chebyshev nodes of [-radius, radius]; `sample` maps a Scalar node to a
// Scalar value. All arithmetic runs in Scalar.
template <typename Scalar, typename Sampler>
UnivariatePolynomial interpolate_chebyshev(Sampler&& sample, int max_degree, double radius) {
  const int n = max_degree + 1;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  std::vector<Scalar> nodes(static_cast<std::size_t>(n));
  std::vector<Scalar> values(static_cast<std::size_t>(n));
  Scalar max_value = 0;
  for (int k = 0; k < n; ++k) {
    const Scalar t = std::cos(pi * (k + Scalar(0.5)) / n);
    nodes[k] = t;
    values[k] = sample(Scalar(radius) * t);
    max_value = std::max(max_value, Scalar(std::abs(values[k])));
  }

  // Discrete orthogonality of T_j on the nodes gives the Chebyshev series.
  std::vector<Scalar> cheb(static_cast<std::size_t>(n), Scalar(0));
  for (int j = 0; j < n; ++j) {
    Scalar acc = 0;
    for (int k = 0; k < n; ++k) acc += values[k] * std::cos(j * pi * (k + Scalar(0.5)) / n);
    cheb[j] = (j == 0 ? Scalar(1) : Scalar(2)) * acc / n;
  }

  const auto T = detail::chebyshev_monomials<Scalar>(max_degree);
  std::vector<Scalar> mono(static_cast<std::size_t>(n), Scalar(0));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) mono[i] += cheb[j] * T[j][i];

  // Vandermonde residual of the recovered coefficients at the nodes.
  Scalar residual = 0;
  for (int k = 0; k < n; ++k) {
    Scalar acc = 0;
    for (int i = n - 1; i >= 0; --i) acc = acc * nodes[k] + mono[i];
    residual = std::max(residual, Scalar(std::abs(acc - values[k])));
  }
  if (!(residual <= Scalar(1e-6) * std::max(max_value, std::numeric_limits<Scalar>::min()))) {
    throw Error(ErrorCode::InterpolationIllConditioned,
                "interpolation residual " + std::to_string(static_cast<double>(residual)) + " exceeds tolerance");
  }

  std::vector<double> out(static_cast<std::size_t>(n));
  Scalar inv = 1;
  for (int i = 0; i < n; ++i) {
    out[i] = static_cast<double>(mono[i] * inv);
    inv /= Scalar(radius);
    if (!std::isfinite(out[i])) {
      throw Error(ErrorCode::InterpolationIllConditioned, "coefficient overflow for radius " + std::to_string(radius));
    }
  }
  return UnivariatePolynomial(std::move(out));
}

// det(M(tau)) for a matrix with quadratic cells; the result has degree <= 2N
// and is recovered exactly (up to rounding) from 2N + 1 samples.
template <int N, typename Scalar>
UnivariatePolynomial det_poly(const MatrixPolynomial<N, Scalar>& M, double radius = 1.0) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorCode::InvalidArgument, "interpolation radius must be positive");
  }
  auto sample = [&M](Scalar tau) -> Scalar {
    const typename MatrixPolynomial<N, Scalar>::Matrix m = M(tau);
    if constexpr (N <= 4) {
      return m.determinant();
    } else {
      return m.partialPivLu().determinant();
    }
  };
  return interpolate_chebyshev<Scalar>(sample, 2 * N, radius);
}

// Positive real roots via the balanced companion matrix, each polished by one
// Newton step, deduplicated and sorted ascending. Balancing matters: near
// degenerate inputs the top coefficients sit at the rounding floor and an
// unbalanced companion loses the small roots entirely.
inline std::vector<double> real_positive_roots(const UnivariatePolynomial& p) {
  const int deg = p.degree();
  if (deg < 0) {
    throw Error(ErrorCode::ZeroPolynomial, "all coefficients vanish");
  }
  if (deg == 0) return {};

  Eigen::VectorXd c(deg + 1);
  for (int i = 0; i <= deg; ++i) c(i) = p[static_cast<std::size_t>(i)];
  Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
  solver.compute(c);
  const UnivariatePolynomial dp = p.derivative();

  std::vector<double> roots;
  for (Eigen::Index i = 0; i < solver.roots().size(); ++i) {
    const std::complex<double> z = solver.roots()(i);
    if (std::abs(z.imag()) > 1e-6 * (1.0 + std::abs(z.real()))) continue;
    double r = z.real();
    const double slope = dp(r);
    if (slope != 0.0 && std::isfinite(slope)) {
      const double polished = r - p(r) / slope;
      if (std::isfinite(polished) && std::abs(p(polished)) <= std::abs(p(r))) r = polished;
    }
    if (r > 0.0) roots.push_back(r);
  }

  std::sort(roots.begin(), roots.end());
  std::vector<double> unique;
  for (double r : roots) {
    if (unique.empty() || std::abs(r - unique.back()) > 1e-9 * std::abs(r)) unique.push_back(r);
  }
  return unique;
}

}  // namespace twoac
