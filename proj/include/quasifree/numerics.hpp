#pragma once

#include <Eigen/Dense>
#include <vector>

namespace quasifree {

/// exp(A) for a real square matrix, scaling-and-squaring with diagonal
/// Pade approximants (degrees 3/5/7/9/13 selected by the 1-norm).
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& a);

/// Gauss-Legendre rule on [-1, 1]. Nodes/weights are computed once per
/// order and cached.
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussLegendreRule& gauss_legendre(int order);

/// Factor F with F*F^T = m for a symmetric PSD matrix. Eigenvalues below
/// -tol*scale are an error; small negatives are clipped to zero.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& m, double tol = 1e-9);

/// Symmetric PSD square root (same clipping rules as psd_factor).
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m, double tol = 1e-9);

/// Smallest eigenvalue of (m + m^dagger)/2.
double min_eigenvalue_hermitian(const Eigen::MatrixXcd& m);

/// Max real part of the eigenvalues of a real matrix.
double spectral_abscissa(const Eigen::MatrixXd& m);

/// Halton low-discrepancy points in the cube [-radius, radius]^dim,
/// optionally preceded by the origin. Deterministic.
std::vector<Eigen::VectorXd> halton_points(int dim, int count, double radius,
                                           bool include_origin = true);

}  // namespace quasifree
