#include "quasifree/phase_space.hpp"

#include <stdexcept>

namespace quasifree {

Eigen::VectorXd PhaseSpace::embed_quantum(const Eigen::VectorXd& zeta) const {
  if (zeta.size() == d) return p1 * zeta;
  if (zeta.size() != 2 * n) throw std::invalid_argument("embed_quantum: expected length 2n");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  v.head(2 * n) = zeta;
  return v;
}

Eigen::VectorXd PhaseSpace::embed_classical(const Eigen::VectorXd& k) const {
  if (k.size() == d) return p0 * k;
  if (k.size() != s) throw std::invalid_argument("embed_classical: expected length s");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  v.tail(s) = k;
  return v;
}

PhaseSpace make_phase_space(int n, int s) {
  if (n < 0 || s < 0) throw std::invalid_argument("make_phase_space: negative dimension");
  if (n == 0 && s == 0) throw std::invalid_argument("make_phase_space: n = s = 0");
  PhaseSpace sp;
  sp.n = n;
  sp.s = s;
  sp.d = 2 * n + s;
  sp.sigma = Eigen::MatrixXd::Zero(sp.d, sp.d);
  for (int i = 0; i < n; ++i) {
    sp.sigma(i, i + n) = 1.0;
    sp.sigma(i + n, i) = -1.0;
  }
  sp.p1 = Eigen::MatrixXd::Zero(sp.d, sp.d);
  sp.p1.topLeftCorner(2 * n, 2 * n).setIdentity();
  sp.p0 = Eigen::MatrixXd::Identity(sp.d, sp.d) - sp.p1;
  return sp;
}

double symplectic_pairing(const PhaseSpace& space, const Eigen::VectorXd& xi,
                          const Eigen::VectorXd& eta) {
  if (xi.size() != space.d || eta.size() != space.d)
    throw std::invalid_argument("symplectic_pairing: dimension mismatch");
  // sum_k (xi_k eta_{k+n} - xi_{k+n} eta_k); term-by-term so that the value
  // is exactly antisymmetric in floating point.
  double acc = 0.0;
  for (int k = 0; k < space.n; ++k)
    acc += xi[k] * eta[k + space.n] - xi[k + space.n] * eta[k];
  return acc;
}

WeylDescriptor weyl_compose(const WeylDescriptor& a, const WeylDescriptor& b,
                            const PhaseSpace& space) {
  if (a.xi.size() != space.d || b.xi.size() != space.d)
    throw std::invalid_argument("weyl_compose: dimension mismatch");
  const double q = symplectic_pairing(space, a.xi, b.xi);
  WeylDescriptor out;
  out.xi = a.xi + b.xi;
  out.amplitude = a.amplitude * b.amplitude * std::polar(1.0, -0.5 * q);
  return out;
}

WeylDescriptor weyl_conjugate(const Eigen::VectorXd& w, const WeylDescriptor& a,
                              const PhaseSpace& space) {
  WeylDescriptor left{-w, {1.0, 0.0}};
  WeylDescriptor right{w, {1.0, 0.0}};
  WeylDescriptor out = weyl_compose(weyl_compose(left, a, space), right, space);
  out.xi = a.xi;  // (-w + xi) + w, restored exactly
  return out;
}

WeylDescriptor weyl_adjoint_conjugate(const Eigen::VectorXd& zeta,
                                      const WeylDescriptor& a,
                                      const PhaseSpace& space) {
  const Eigen::VectorXd z = space.embed_quantum(zeta);
  return weyl_conjugate(space.sigma * z, a, space);
}

}  // namespace quasifree
