#pragma once

#include <Eigen/Dense>
#include <complex>

namespace quasifree {

/// Hybrid phase space R^d = R^{2n} (quantum, canonical pairs) + R^s
/// (classical). Holds the embedded symplectic form and the sector
/// projectors. Immutable after construction.
struct PhaseSpace {
  int n = 0;  // quantum mode count
  int s = 0;  // classical dimension
  int d = 0;  // 2n + s
  Eigen::MatrixXd sigma;  // d x d, antisymmetric, zero on the classical sector
  Eigen::MatrixXd p1;     // projector onto the quantum sector
  Eigen::MatrixXd p0;     // projector onto the classical sector

  Eigen::VectorXd quantum_part(const Eigen::VectorXd& v) const { return v.head(2 * n); }
  Eigen::VectorXd classical_part(const Eigen::VectorXd& v) const { return v.tail(s); }
  Eigen::MatrixXd sigma_quantum() const { return sigma.topLeftCorner(2 * n, 2 * n); }

  /// Embed a quantum-sector vector (length 2n) into R^d.
  Eigen::VectorXd embed_quantum(const Eigen::VectorXd& zeta) const;
  /// Embed a classical-sector vector (length s) into R^d.
  Eigen::VectorXd embed_classical(const Eigen::VectorXd& k) const;
};

/// Rejects n = s = 0.
PhaseSpace make_phase_space(int n, int s);

/// xi^T sigma eta evaluated in a canonical term order, so that swapping the
/// arguments negates the result exactly in floating point.
double symplectic_pairing(const PhaseSpace& space, const Eigen::VectorXd& xi,
                          const Eigen::VectorXd& eta);

/// amplitude * W(xi), the universal representation of quasi-free images of
/// Weyl operators.
struct WeylDescriptor {
  Eigen::VectorXd xi;
  std::complex<double> amplitude{1.0, 0.0};
};

/// Product a*b: W(xi)W(eta) = W(xi+eta) exp(-(i/2) xi^T sigma eta).
WeylDescriptor weyl_compose(const WeylDescriptor& a, const WeylDescriptor& b,
                            const PhaseSpace& space);

/// W(-w) a W(w), computed by two compositions.
WeylDescriptor weyl_conjugate(const Eigen::VectorXd& w, const WeylDescriptor& a,
                              const PhaseSpace& space);

/// W1(sigma zeta)^dagger a W1(sigma zeta) for a quantum-sector zeta
/// (length 2n or an embedded d-vector with zero classical part).
WeylDescriptor weyl_adjoint_conjugate(const Eigen::VectorXd& zeta,
                                      const WeylDescriptor& a,
                                      const PhaseSpace& space);

}  // namespace quasifree
