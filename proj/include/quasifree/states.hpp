#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "quasifree/phase_space.hpp"
#include "quasifree/semigroup.hpp"

namespace quasifree {

/// Gaussian hybrid state: chi(xi) = exp(i mean.xi - xi.cov xi / 2).
/// Admissible iff cov + (i/2) sigma >= 0.
struct HybridGaussianState {
  PhaseSpace space;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

HybridGaussianState make_gaussian_state(PhaseSpace space, Eigen::VectorXd mean,
                                        Eigen::MatrixXd cov);

std::complex<double> gaussian_charfn(const HybridGaussianState& state,
                                     const Eigen::VectorXd& xi);
CharFn gaussian_charfn_callable(const HybridGaussianState& state);

/// min eigenvalue of cov + (i/2) sigma, the Gaussian admissibility margin.
double gaussian_admissibility_margin(const HybridGaussianState& state);

struct AdmissibilityReport {
  bool pass = false;
  double min_eigenvalue = 0.0;  // of the twisted positive-definiteness matrix
  double chi0_error = 0.0;      // |chi(0) - 1|
  std::vector<std::string> warnings;
};

/// Remark-level state check on a finite sample: builds the N x N matrix
/// M_kl = chi(xi_k - xi_l) exp((i/2) xi_k^T sigma xi_l) and reports its
/// minimum eigenvalue. Continuity/integrability are only probed
/// heuristically and produce warnings, not failures.
AdmissibilityReport admissibility_check(const CharFn& chi,
                                        const std::vector<Eigen::VectorXd>& sample,
                                        const PhaseSpace& space,
                                        double tol = 1e-8);

/// Deterministic low-discrepancy sample (origin first) for the check above.
std::vector<Eigen::VectorXd> admissibility_sample(const PhaseSpace& space,
                                                  int count, double radius);

/// Rectangular grid symmetric about the origin with odd point counts, so
/// the origin is always a grid point. Row-major, last axis fastest.
struct GridSpec {
  std::vector<double> extent;  // half-width per axis: axis i spans [-L_i, L_i]
  std::vector<int> points;     // odd, >= 3

  int dim() const { return static_cast<int>(extent.size()); }
  size_t size() const;
  double step(int axis) const { return 2.0 * extent[axis] / (points[axis] - 1); }
  double coord(int axis, int index) const { return -extent[axis] + index * step(axis); }
  std::vector<int> unflatten(size_t flat) const;
  Eigen::VectorXd point(size_t flat) const;
  void validate() const;
};

struct CharFnGrid {
  GridSpec spec;
  std::vector<std::complex<double>> values;
};

struct WignerGrid {
  GridSpec spec;  // z-space grid (reciprocal of the source xi-grid)
  std::vector<double> values;
  std::vector<std::string> warnings;
};

struct GridCheck {
  double chi0_error = 0.0;
  double hermitian_asymmetry = 0.0;  // max |chi(-xi) - conj(chi(xi))|
  double boundary_max = 0.0;         // max |chi| on the grid boundary
};
GridCheck check_charfn_grid(const CharFnGrid& grid);

/// Fourier inversion to the phase-space density, continuous-transform
/// normalization 1/(2pi)^d. Output spacing dz_i = 2 pi / (N_i dxi_i).
/// Dimension capped at 4 (memory grows as N^d).
WignerGrid wigner_from_charfn(const CharFnGrid& grid, bool parallel = true);

/// Forward transform back to the characteristic function (exact inverse of
/// wigner_from_charfn up to roundoff).
CharFnGrid charfn_from_wigner(const WignerGrid& grid, bool parallel = true);

/// Multilinear interpolation of a sampled characteristic function; zero
/// outside the grid.
CharFn charfn_from_grid(const CharFnGrid& grid);

struct GaussianMarginals {
  Eigen::VectorXd quantum_mean;   // 2n
  Eigen::MatrixXd quantum_cov;    // 2n x 2n
  Eigen::VectorXd classical_mean; // s
  Eigen::MatrixXd classical_cov;  // s x s
};

GaussianMarginals marginals(const HybridGaussianState& state);

/// Gaussian conditioning pi(x) = p(x) rho(x): classical density p and the
/// x-dependent conditional quantum state (affine mean, constant covariance).
struct ConditionalDecomposition {
  Eigen::VectorXd classical_mean;
  Eigen::MatrixXd classical_cov;
  Eigen::VectorXd cond_mean_const;  // conditional mean at x = classical_mean
  Eigen::MatrixXd cond_mean_slope;  // d(cond mean)/dx, 2n x s
  Eigen::MatrixXd cond_cov;         // 2n x 2n Schur complement
  bool ill_conditioned = false;     // classical block nearly singular
};

ConditionalDecomposition conditional_decomposition(const HybridGaussianState& state);

/// CSV round trip with 17 significant digits (bit-exact for doubles).
/// `header_extra` lines are embedded as comments.
void write_charfn_grid_csv(const CharFnGrid& grid, const std::string& path,
                           const std::vector<std::string>& header_extra = {});
CharFnGrid read_charfn_grid_csv(const std::string& path);
void write_wigner_grid_csv(const WignerGrid& grid, const std::string& path,
                           const std::vector<std::string>& header_extra = {});

}  // namespace quasifree
