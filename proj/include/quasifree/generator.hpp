#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "quasifree/levy.hpp"
#include "quasifree/phase_space.hpp"

namespace quasifree {

/// Full parameter set (Z, alpha, A, nu) of a quasi-free hybrid generator.
struct GeneratorParams {
  PhaseSpace space;
  Eigen::MatrixXd z;  // d x d drift generator of the phase-space flow
  LevyExponentParams exponent;
};

/// Validates shapes/finiteness, throws std::invalid_argument otherwise.
GeneratorParams make_generator_params(PhaseSpace space, Eigen::MatrixXd z,
                                      Eigen::VectorXd alpha, Eigen::MatrixXd a,
                                      LevyMeasure nu = {});

/// Sector blocks of Z, A, alpha.
struct BlockView {
  Eigen::MatrixXd z11, z10, z01, z00;
  Eigen::MatrixXd a11, a10, a00;
  Eigen::VectorXd beta, alpha0;
};

/// Matrices derived from the blocks:
///   B = (sigma P1 Z - Z^T P1 sigma^T)/2
///   D = (Z11 sigma + sigma^T Z11^T)/2
///   G = sigma^T A11 sigma + (i/2)(sigma^T Z11^T - Z11 sigma)
///   C = A00,  E = sigma^T A10 - (i/2) Z10
struct DerivedMatrices {
  Eigen::MatrixXd b;   // d x d
  Eigen::MatrixXd dm;  // 2n x 2n, symmetric (quadratic Hamiltonian part)
  Eigen::MatrixXcd g;  // 2n x 2n, Hermitian
  Eigen::MatrixXd c;   // s x s, symmetric
  Eigen::MatrixXcd e;  // 2n x s
};

struct Blocks {
  BlockView view;
  DerivedMatrices derived;
};

Blocks derive_blocks(const GeneratorParams& params);

/// Hermitian block matrix (G, E; E^dagger, C), the positivity condition in
/// its second form.
Eigen::MatrixXcd gec_block_matrix(const DerivedMatrices& m);

struct PositivityReport {
  bool valid = false;
  double tol = 0.0;
  double min_eig_a_plus_ib = 0.0;
  double min_eig_a_minus_ib = 0.0;
  double min_eig_gec = 0.0;
  bool forms_agree = false;  // the two forms give the same accept/reject
  Eigen::VectorXcd witness;  // eigenvector of the most negative eigenvalue
  std::string message;
};

/// Checks A + iB >= -tol, A - iB >= -tol and (G,E;E^dagger,C) >= -tol, and
/// that the two formulations agree. Returns a report, never throws on
/// invalid models.
PositivityReport validate_positivity(const GeneratorParams& params,
                                     double tol = 1e-10);

/// Coefficient content of the eight generator terms. Jump lists keep the
/// full hybrid atoms; an atom with both sectors nonzero appears in all
/// three lists.
struct GeneratorTermDecomposition {
  // quantum diffusive part: dissipator G, Hamiltonian beta^T sigma R + R^T D R / 2
  Eigen::MatrixXcd lq1_g;
  Eigen::VectorXd lq1_beta;
  Eigen::MatrixXd lq1_d;
  std::vector<LevyAtom> lq2;  // atoms with nonzero quantum part
  // classical drift-diffusion
  Eigen::VectorXd kcl1_alpha0;
  Eigen::MatrixXd kcl1_z00;
  Eigen::MatrixXd kcl1_c;
  std::vector<LevyAtom> kcl2;  // atoms with nonzero classical part
  // interactions
  Eigen::MatrixXd kint1_z01;   // classical force on the quantum system
  Eigen::MatrixXd kint2_im_e;  // = -Z10/2, quantum signal into the classical drift
  Eigen::MatrixXd kint3_re_e;  // = sigma^T A10, correlation-only diffusive coupling
  std::vector<LevyAtom> kint4;  // atoms with both parts nonzero
};

GeneratorTermDecomposition decompose_terms(const GeneratorParams& params);

/// Inverse of decompose_terms; reproduces (Z, A, alpha, nu) exactly.
GeneratorParams reassemble_terms(const PhaseSpace& space,
                                 const GeneratorTermDecomposition& dec,
                                 double cutoff_radius = 1.0);

struct StructureFlags {
  bool translation_invariant = false;       // Z00 = 0 and Z01 = 0
  bool quantum_dissipationless = false;     // G = 0 and quantum marginal of nu empty
  bool classical_dissipationless = false;   // C = 0 and classical marginal of nu empty
  bool autonomous_quantum_reduction = false;    // Z01 = 0
  bool autonomous_classical_reduction = false;  // Z10 = 0
};

StructureFlags classify(const GeneratorParams& params, double tol = 1e-12);

struct InformationFlowReport {
  bool quantum_dissipationless = false;
  bool classical_dissipationless = false;
  double e_norm = 0.0;   // Frobenius norm of E
  double e_bound = 0.0;  // bound implied by the PSD block lemma
  std::vector<std::string> forced_zero_terms;  // kint2/kint3/kint4 when applicable
  std::string message;
};

/// For validated parameters: if either dissipation block vanishes, the PSD
/// block lemma forces E = 0 and with it every quantum->classical information
/// channel. A violation on validated input is a validator bug and throws.
InformationFlowReport check_no_information_flow(const GeneratorParams& params,
                                                double tol = 1e-10);

}  // namespace quasifree
