#include "quasifree/levy.hpp"

#include <cmath>
#include <stdexcept>

namespace quasifree {

double LevyMeasure::total_rate() const {
  double r = 0.0;
  for (const auto& a : atoms) r += a.weight;
  return r;
}

LevyValidation validate_levy(const LevyMeasure& nu) {
  for (size_t i = 0; i < nu.atoms.size(); ++i) {
    const auto& atom = nu.atoms[i];
    if (!atom.eta.allFinite() || !std::isfinite(atom.weight))
      return {false, "non-finite atom", static_cast<int>(i)};
    if (atom.eta.norm() <= 1e-12)
      return {false, "nu({0})=0 broken: atom at the origin", static_cast<int>(i)};
    if (atom.weight <= 0.0)
      return {false, "negative or zero weight", static_cast<int>(i)};
  }
  return {};
}

LevyMeasure levy_marginal(const LevyMeasure& nu, Sector sector,
                          const PhaseSpace& space) {
  LevyMeasure out;
  out.cutoff_radius = nu.cutoff_radius;
  for (const auto& atom : nu.atoms) {
    if (atom.eta.size() != space.d)
      throw std::invalid_argument("levy_marginal: atom dimension mismatch");
    Eigen::VectorXd proj = (sector == Sector::Quantum)
                               ? space.quantum_part(atom.eta)
                               : space.classical_part(atom.eta);
    if (proj.norm() <= 1e-12) continue;
    Eigen::VectorXd embedded = (sector == Sector::Quantum)
                                   ? space.embed_quantum(proj)
                                   : space.embed_classical(proj);
    out.atoms.push_back({std::move(embedded), atom.weight, atom.comp});
  }
  return out;
}

std::complex<double> psi_eval(const LevyExponentParams& params,
                              const Eigen::VectorXd& xi) {
  const auto dim = params.alpha.size();
  if (xi.size() != dim || params.a_matrix.rows() != dim || params.a_matrix.cols() != dim)
    throw std::invalid_argument("psi_eval: dimension mismatch");
  if (!xi.allFinite()) throw std::invalid_argument("psi_eval: non-finite xi");

  std::complex<double> psi(-0.5 * xi.dot(params.a_matrix * xi),
                           params.alpha.dot(xi));
  for (const auto& atom : params.nu.atoms) {
    const double phase = atom.eta.dot(xi);
    std::complex<double> term = std::polar(1.0, phase) - 1.0;
    if (atom.compensated(params.nu.cutoff_radius))
      term -= std::complex<double>(0.0, phase);
    psi += atom.weight * term;
  }
  return psi;
}

}  // namespace quasifree
