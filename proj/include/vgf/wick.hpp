#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vgf/chaos.hpp"
#include "vgf/polynomial.hpp"

namespace vgf {

/// H_n with leading coefficient 1 (probabilists' convention).
double hermite(int n, double x);
/// Coefficients of H_n, lowest degree first.
std::vector<double> hermite_coefficients(int n);

/// Real polynomial in centered jointly Gaussian variables with the given
/// covariance.
struct GaussianExpression {
  Polynomial poly;
  Eigen::MatrixXd covariance;
};

inline constexpr int kDefaultMaxDegree = 8;

double gaussian_moment(const GaussianExpression& expr, int max_degree = kDefaultMaxDegree);

/// U = A xi with xi standard normal on the span of a covariance matrix;
/// directions with eigenvalue below tol * max are dropped.
struct WickBasis {
  Eigen::MatrixXd a;       // n x r
  Eigen::MatrixXd a_pinv;  // r x n
  int rank() const { return static_cast<int>(a.cols()); }
  Eigen::VectorXd coordinates(std::span<const double> u) const;
};

WickBasis orthonormal_basis(const Eigen::MatrixXd& covariance, double tol = 1e-10);

/// p(U) rewritten in xi coordinates.
Polynomial to_basis(const Polynomial& p, const WickBasis& basis);
/// Replaces each xi^l by H_l(xi), variable by variable.
Polynomial hermite_substitute(const Polynomial& p_xi);

/// Linear variables U_s = sum_i L_si x_i over a base Gaussian vector x.
/// Returns the covariance of the U's.
Eigen::MatrixXd linear_covariance(std::span<const GaussianExpression> us);

/// Orthogonal projection of U_1...U_n onto the complement of polynomials of
/// degree <= n-1, computed from Isserlis moments; result in U variables.
GaussianExpression wick_project(std::span<const GaussianExpression> us);

/// :P(U): of a homogeneous polynomial in U variables, in the xi coordinates
/// of `basis`.
Polynomial wick_expand(const Polynomial& p_u, const WickBasis& basis);
/// :U_1...U_n: in the xi coordinates of orthonormal_basis(cov of the U's).
Polynomial wick_expand(std::span<const GaussianExpression> us);

/// A Wick polynomial ready to be evaluated from values of its U variables.
class WickPolynomial {
 public:
  WickPolynomial(const Polynomial& p_u, const Eigen::MatrixXd& covariance_u);

  const WickBasis& basis() const { return basis_; }
  const Polynomial& xi_polynomial() const { return xi_; }
  double operator()(std::span<const double> u) const;

 private:
  WickBasis basis_;
  Polynomial xi_;
};

/// Coefficient norm of :U_1..U_n: U_{n+1} - :U_1..U_{n+1}: -
/// sum_s :U_1..^U_s..U_n: E U_s U_{n+1}, all in a common xi basis.
double wick_recursion_check(std::span<const GaussianExpression> us);

/// E U_s U_t for U_s = sum_k phi_s(k) Z_{j_s}(Delta_k).
Eigen::MatrixXd one_fold_covariance(std::span<const std::vector<cplx>> phis,
                                    std::span<const int> colours, const MatrixSpectralMeasure& g);

/// Covariance of the real base coordinates (Re Z_j(Delta_k), Im Z_j(Delta_k)),
/// k > 0, ordered ((k - 1) * d + j) * 2 + {0: Re, 1: Im}.
Eigen::MatrixXd base_covariance(const MatrixSpectralMeasure& g);
/// Coefficients of sum_k phi(k) Z_j(Delta_k) on the base coordinates.
std::vector<double> one_fold_coefficients(const RegularSystem& sys, int dim_field,
                                          std::span<const cplx> phi, int j);
/// Base coordinates of a sample in the same order.
std::vector<double> base_coordinates(const SpectralSample& s);

struct ItoSides {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// lhs = :U_1...U_n: from the sampled one-fold integrals, rhs = the n-fold
/// integral of phi_1 x ... x phi_n.
class ItoEvaluator {
 public:
  ItoEvaluator(std::vector<std::vector<cplx>> phis, std::vector<int> colours,
               const MatrixSpectralMeasure& g);

  ItoSides operator()(const SpectralSample& s) const;
  std::vector<ItoSides> operator()(const SampleBlock& b) const;
  const SimpleKernel& kernel() const { return kernel_; }

 private:
  std::vector<std::vector<cplx>> phis_;
  std::vector<int> colours_;
  WickPolynomial wick_;
  SimpleKernel kernel_;
};

ItoSides ito_both_sides(std::span<const std::vector<cplx>> phis, std::span<const int> colours,
                        const MatrixSpectralMeasure& g, const SpectralSample& s);

}  // namespace vgf
