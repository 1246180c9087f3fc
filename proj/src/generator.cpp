#include "quasifree/generator.hpp"

#include <cmath>
#include <stdexcept>

#include "quasifree/numerics.hpp"

namespace quasifree {

namespace {

constexpr double kSupportTol = 1e-12;  // exact-zero threshold for atom sectors

std::complex<double> min_eig_with_witness(const Eigen::MatrixXcd& m,
                                          Eigen::VectorXcd* witness) {
  if (m.rows() == 0) {
    if (witness) witness->resize(0);
    return 0.0;
  }
  const Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  int idx = 0;
  es.eigenvalues().minCoeff(&idx);
  if (witness) *witness = es.eigenvectors().col(idx);
  return es.eigenvalues()[idx];
}

}  // namespace

GeneratorParams make_generator_params(PhaseSpace space, Eigen::MatrixXd z,
                                      Eigen::VectorXd alpha, Eigen::MatrixXd a,
                                      LevyMeasure nu) {
  const int d = space.d;
  if (z.rows() != d || z.cols() != d)
    throw std::invalid_argument("generator: Z must be d x d");
  if (a.rows() != d || a.cols() != d)
    throw std::invalid_argument("generator: A must be d x d");
  if (alpha.size() != d)
    throw std::invalid_argument("generator: alpha must have length d");
  if (!z.allFinite() || !a.allFinite() || !alpha.allFinite())
    throw std::invalid_argument("generator: non-finite entries");
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("generator: A must be symmetric");
  for (const auto& atom : nu.atoms)
    if (atom.eta.size() != d)
      throw std::invalid_argument("generator: Levy atom dimension mismatch");
  GeneratorParams p;
  p.space = std::move(space);
  p.z = std::move(z);
  p.exponent.alpha = std::move(alpha);
  p.exponent.a_matrix = std::move(a);
  p.exponent.nu = std::move(nu);
  return p;
}

Blocks derive_blocks(const GeneratorParams& params) {
  const int n2 = 2 * params.space.n;
  const int s = params.space.s;
  Blocks out;
  BlockView& v = out.view;
  v.z11 = params.z.topLeftCorner(n2, n2);
  v.z10 = params.z.topRightCorner(n2, s);
  v.z01 = params.z.bottomLeftCorner(s, n2);
  v.z00 = params.z.bottomRightCorner(s, s);
  const Eigen::MatrixXd& a = params.exponent.a_matrix;
  v.a11 = a.topLeftCorner(n2, n2);
  v.a10 = a.topRightCorner(n2, s);
  v.a00 = a.bottomRightCorner(s, s);
  v.beta = params.exponent.alpha.head(n2);
  v.alpha0 = params.exponent.alpha.tail(s);

  const Eigen::MatrixXd sq = params.space.sigma_quantum();
  DerivedMatrices& m = out.derived;
  m.b = 0.5 * (params.space.sigma * params.space.p1 * params.z -
               params.z.transpose() * params.space.p1 * params.space.sigma.transpose());
  m.dm = 0.5 * (v.z11 * sq + sq.transpose() * v.z11.transpose());
  m.g = (sq.transpose() * v.a11 * sq).cast<std::complex<double>>() +
        std::complex<double>(0.0, 0.5) *
            (sq.transpose() * v.z11.transpose() - v.z11 * sq).cast<std::complex<double>>();
  m.c = v.a00;
  m.e = (sq.transpose() * v.a10).cast<std::complex<double>>() -
        std::complex<double>(0.0, 0.5) * v.z10.cast<std::complex<double>>();
  return out;
}

Eigen::MatrixXcd gec_block_matrix(const DerivedMatrices& m) {
  const auto n2 = m.g.rows();
  const auto s = m.c.rows();
  Eigen::MatrixXcd gec(n2 + s, n2 + s);
  gec.topLeftCorner(n2, n2) = m.g;
  gec.topRightCorner(n2, s) = m.e;
  gec.bottomLeftCorner(s, n2) = m.e.adjoint();
  gec.bottomRightCorner(s, s) = m.c.cast<std::complex<double>>();
  return gec;
}

PositivityReport validate_positivity(const GeneratorParams& params, double tol) {
  const Blocks blocks = derive_blocks(params);
  const Eigen::MatrixXcd ac = params.exponent.a_matrix.cast<std::complex<double>>();
  const Eigen::MatrixXcd ibc =
      std::complex<double>(0.0, 1.0) * blocks.derived.b.cast<std::complex<double>>();

  PositivityReport rep;
  rep.tol = tol;
  Eigen::VectorXcd w_plus, w_minus, w_gec;
  rep.min_eig_a_plus_ib = min_eig_with_witness(ac + ibc, &w_plus).real();
  rep.min_eig_a_minus_ib = min_eig_with_witness(ac - ibc, &w_minus).real();
  rep.min_eig_gec =
      min_eig_with_witness(gec_block_matrix(blocks.derived), &w_gec).real();

  const bool ok_ab = rep.min_eig_a_plus_ib >= -tol && rep.min_eig_a_minus_ib >= -tol;
  const bool ok_gec = rep.min_eig_gec >= -tol;
  rep.valid = ok_ab && ok_gec;
  rep.forms_agree = (ok_ab == ok_gec);
  if (!rep.valid) {
    if (rep.min_eig_a_plus_ib <= rep.min_eig_a_minus_ib) {
      rep.witness = w_plus;
      rep.message = "A + iB has negative eigenvalue " + std::to_string(rep.min_eig_a_plus_ib);
    } else {
      rep.witness = w_minus;
      rep.message = "A - iB has negative eigenvalue " + std::to_string(rep.min_eig_a_minus_ib);
    }
  }
  return rep;
}

GeneratorTermDecomposition decompose_terms(const GeneratorParams& params) {
  const Blocks blocks = derive_blocks(params);
  GeneratorTermDecomposition dec;
  dec.lq1_g = blocks.derived.g;
  dec.lq1_beta = blocks.view.beta;
  dec.lq1_d = blocks.derived.dm;
  dec.kcl1_alpha0 = blocks.view.alpha0;
  dec.kcl1_z00 = blocks.view.z00;
  dec.kcl1_c = blocks.derived.c;
  dec.kint1_z01 = blocks.view.z01;
  dec.kint2_im_e = blocks.derived.e.imag();
  dec.kint3_re_e = blocks.derived.e.real();
  for (const auto& atom : params.exponent.nu.atoms) {
    const bool has_q = params.space.quantum_part(atom.eta).norm() > kSupportTol;
    const bool has_c = params.space.classical_part(atom.eta).norm() > kSupportTol;
    if (has_q) dec.lq2.push_back(atom);
    if (has_c) dec.kcl2.push_back(atom);
    if (has_q && has_c) dec.kint4.push_back(atom);
  }
  return dec;
}

GeneratorParams reassemble_terms(const PhaseSpace& space,
                                 const GeneratorTermDecomposition& dec,
                                 double cutoff_radius) {
  const int n2 = 2 * space.n;
  const int s = space.s;
  const Eigen::MatrixXd sq = space.sigma_quantum();

  // Block inversions: D + Im G = sigma^T Z11^T, D - Im G = Z11 sigma,
  // Re G = sigma^T A11 sigma, Re E = sigma^T A10, Im E = -Z10/2.
  const Eigen::MatrixXd im_g =
      0.5 * (dec.lq1_g.imag() - dec.lq1_g.imag().transpose());
  const Eigen::MatrixXd z11 = (dec.lq1_d - im_g) * sq.transpose();
  const Eigen::MatrixXd z10 = -2.0 * dec.kint2_im_e;
  const Eigen::MatrixXd a11 = sq * dec.lq1_g.real() * sq.transpose();
  const Eigen::MatrixXd a10 = sq * dec.kint3_re_e;

  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(space.d, space.d);
  z.topLeftCorner(n2, n2) = z11;
  z.topRightCorner(n2, s) = z10;
  z.bottomLeftCorner(s, n2) = dec.kint1_z01;
  z.bottomRightCorner(s, s) = dec.kcl1_z00;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(space.d, space.d);
  a.topLeftCorner(n2, n2) = a11;
  a.topRightCorner(n2, s) = a10;
  a.bottomLeftCorner(s, n2) = a10.transpose();
  a.bottomRightCorner(s, s) = dec.kcl1_c;

  Eigen::VectorXd alpha(space.d);
  alpha.head(n2) = dec.lq1_beta;
  alpha.tail(s) = dec.kcl1_alpha0;

  // Atoms: purely quantum ones live only in lq2, purely classical only in
  // kcl2, joint atoms are repeated in all three lists -- take them once.
  LevyMeasure nu;
  nu.cutoff_radius = cutoff_radius;
  for (const auto& atom : dec.lq2)
    if (space.classical_part(atom.eta).norm() <= kSupportTol) nu.atoms.push_back(atom);
  for (const auto& atom : dec.kcl2)
    if (space.quantum_part(atom.eta).norm() <= kSupportTol) nu.atoms.push_back(atom);
  for (const auto& atom : dec.kint4) nu.atoms.push_back(atom);

  return make_generator_params(space, std::move(z), std::move(alpha), std::move(a),
                               std::move(nu));
}

StructureFlags classify(const GeneratorParams& params, double tol) {
  const Blocks blocks = derive_blocks(params);
  StructureFlags f;
  const auto maxabs = [](const auto& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
  };
  f.autonomous_quantum_reduction = maxabs(blocks.view.z01) <= tol;
  f.autonomous_classical_reduction = maxabs(blocks.view.z10) <= tol;
  f.translation_invariant =
      maxabs(blocks.view.z00) <= tol && f.autonomous_quantum_reduction;
  f.quantum_dissipationless =
      maxabs(blocks.derived.g) <= tol &&
      levy_marginal(params.exponent.nu, Sector::Quantum, params.space).empty();
  f.classical_dissipationless =
      maxabs(blocks.derived.c) <= tol &&
      levy_marginal(params.exponent.nu, Sector::Classical, params.space).empty();
  return f;
}

InformationFlowReport check_no_information_flow(const GeneratorParams& params,
                                                double tol) {
  const PositivityReport pos = validate_positivity(params, tol);
  if (!pos.valid)
    throw std::invalid_argument(
        "check_no_information_flow: parameters failed positivity validation");

  const Blocks blocks = derive_blocks(params);
  const StructureFlags flags = classify(params);

  InformationFlowReport rep;
  rep.quantum_dissipationless = flags.quantum_dissipationless;
  rep.classical_dissipationless = flags.classical_dissipationless;
  rep.e_norm = blocks.derived.e.norm();

  if (!flags.quantum_dissipationless && !flags.classical_dissipationless) {
    rep.message = "dissipation present in both sectors; E unconstrained";
    return rep;
  }

  // PSD block lemma: |u^dag E v|^2 <= (u^dag G u)(v^dag C v), so with one
  // diagonal block ~0 the off-diagonal block is pinned near zero.
  const double g_norm = blocks.derived.g.rows() == 0
                            ? 0.0
                            : blocks.derived.g.cwiseAbs().maxCoeff() * blocks.derived.g.rows();
  const double c_norm = blocks.derived.c.rows() == 0
                            ? 0.0
                            : blocks.derived.c.cwiseAbs().maxCoeff() * blocks.derived.c.rows();
  const double vanished = flags.quantum_dissipationless ? g_norm : c_norm;
  const double other = flags.quantum_dissipationless ? c_norm : g_norm;
  const long min_dim = std::min(blocks.derived.e.rows(), blocks.derived.e.cols());
  rep.e_bound =
      std::sqrt((vanished + tol) * (other + tol)) * std::sqrt(double(std::max<long>(1, min_dim))) +
      1e-12;

  if (rep.e_norm > rep.e_bound)
    throw std::logic_error(
        "check_no_information_flow: validated parameters violate the PSD block "
        "lemma (validator bug)");

  rep.forced_zero_terms = {"kint2", "kint3", "kint4"};
  rep.message = flags.quantum_dissipationless
                    ? "no dissipation in the quantum sector: E = 0, no "
                      "quantum->classical information flow"
                    : "no dissipation in the classical sector: E = 0, no "
                      "quantum->classical information flow";
  return rep;
}

}  // namespace quasifree
