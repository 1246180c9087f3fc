#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "quasifree/phase_space.hpp"

namespace quasifree {

/// How the small-jump compensator treats an atom. Auto follows the |eta| < 1
/// indicator; Always/Never are for expressing the equivalent-parameter
/// rewrites obtained by shifting alpha.
enum class Compensation { Auto, Always, Never };

struct LevyAtom {
  Eigen::VectorXd eta;
  double weight = 0.0;
  Compensation comp = Compensation::Auto;

  bool compensated(double cutoff) const {
    switch (comp) {
      case Compensation::Always: return true;
      case Compensation::Never: return false;
      default: return eta.norm() < cutoff;
    }
  }
};

/// Finite atomic jump measure on the hybrid phase space.
struct LevyMeasure {
  std::vector<LevyAtom> atoms;
  double cutoff_radius = 1.0;

  bool empty() const { return atoms.empty(); }
  double total_rate() const;
};

struct LevyValidation {
  bool valid = true;
  std::string message;
  int atom_index = -1;
};

/// Accepts iff no atom sits at the origin (within 1e-12) and all weights are
/// positive. Never throws.
LevyValidation validate_levy(const LevyMeasure& nu);

enum class Sector { Quantum, Classical };

/// Pushforward under the sector projection; atoms whose projection vanishes
/// are dropped. Weights and compensation flags are kept.
LevyMeasure levy_marginal(const LevyMeasure& nu, Sector sector,
                          const PhaseSpace& space);

/// (alpha, A, nu) of the Levy-Khintchine exponent.
struct LevyExponentParams {
  Eigen::VectorXd alpha;
  Eigen::MatrixXd a_matrix;
  LevyMeasure nu;
};

/// psi(xi) = i alpha.xi - xi.A xi / 2
///           + sum_atoms w (e^{i eta.xi} - 1 - i [compensated] eta.xi).
std::complex<double> psi_eval(const LevyExponentParams& params,
                              const Eigen::VectorXd& xi);

}  // namespace quasifree
