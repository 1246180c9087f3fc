#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>

#include "quasifree/kernels.hpp"
#include "quasifree/rng.hpp"
#include "quasifree/states.hpp"
#include "test_util.hpp"

using namespace quasifree;
using namespace quasifree::testing;
using cplx = std::complex<double>;

namespace {

double normal_density(const Eigen::VectorXd& z, const Eigen::VectorXd& mean,
                      const Eigen::MatrixXd& cov) {
  const int d = static_cast<int>(z.size());
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const Eigen::VectorXd w = llt.matrixL().solve(z - mean);
  double logdet = 0.0;
  for (int i = 0; i < d; ++i) logdet += std::log(llt.matrixL()(i, i));
  return std::exp(-0.5 * w.squaredNorm() - logdet - 0.5 * d * std::log(2.0 * M_PI));
}

}  // namespace

TEST_CASE("gaussian_charfn basics") {
  const PhaseSpace sp = make_phase_space(1, 0);
  const auto vac = make_gaussian_state(sp, Eigen::Vector2d::Zero(),
                                       0.5 * Eigen::Matrix2d::Identity());
  CHECK(gaussian_charfn(vac, Eigen::Vector2d::Zero()) == cplx(1.0, 0.0));
  const cplx v = gaussian_charfn(vac, Eigen::Vector2d(1.0, 0.3));
  CHECK(v.imag() == 0.0);
  CHECK(v.real() > 0.0);
  CHECK(v.real() <= 1.0);
  CHECK_THROWS_AS(gaussian_charfn(vac, Eigen::Vector3d::Zero()), std::invalid_argument);
}

TEST_CASE("admissibility_check") {
  SUBCASE("vacuum passes") {
    const PhaseSpace sp = make_phase_space(1, 0);
    const auto vac = make_gaussian_state(sp, Eigen::Vector2d::Zero(),
                                         0.5 * Eigen::Matrix2d::Identity());
    const auto rep = admissibility_check(gaussian_charfn_callable(vac),
                                         admissibility_sample(sp, 16, 2.0), sp);
    CHECK(rep.pass);
    CHECK(rep.min_eigenvalue >= -1e-10);
  }

  SUBCASE("a classical point in the quantum sector fails") {
    // cov = 0 on one quantum mode: chi = 1. Three points 0, (a,0), (0,a)
    // give det M = 2 cos(a^2/2) - 2 < 0.
    const PhaseSpace sp = make_phase_space(1, 0);
    const CharFn chi = [](const Eigen::VectorXd&) { return cplx(1.0, 0.0); };
    const double a = 1.5;
    std::vector<Eigen::VectorXd> pts = {Eigen::Vector2d(0, 0), Eigen::Vector2d(a, 0),
                                        Eigen::Vector2d(0, a)};
    const auto rep = admissibility_check(chi, pts, sp);
    CHECK_FALSE(rep.pass);
    CHECK(rep.min_eigenvalue < -1e-3);
  }

  SUBCASE("purely classical Gaussian reduces to Bochner positivity") {
    const PhaseSpace sp = make_phase_space(0, 2);
    PhiloxStream rng(11, 0);
    const Eigen::MatrixXd l = random_matrix(rng, 2, 2, 1.0);
    const auto st = make_gaussian_state(sp, Eigen::Vector2d(0.5, -1.0),
                                        (l * l.transpose()).eval());
    const auto rep = admissibility_check(gaussian_charfn_callable(st),
                                         admissibility_sample(sp, 24, 2.0), sp);
    CHECK(rep.pass);
  }

  SUBCASE("squeezed below vacuum fails, at vacuum passes") {
    const PhaseSpace sp = make_phase_space(1, 0);
    Eigen::Matrix2d squeezed;
    squeezed << 0.1, 0.0, 0.0, 0.1;  // below the uncertainty floor
    const auto bad = make_gaussian_state(sp, Eigen::Vector2d::Zero(), squeezed);
    CHECK(gaussian_admissibility_margin(bad) < -0.1);
    const auto rep = admissibility_check(gaussian_charfn_callable(bad),
                                         admissibility_sample(sp, 24, 2.5), sp);
    CHECK_FALSE(rep.pass);
  }
}

TEST_CASE("wigner transform") {
  SUBCASE("Gaussian state maps to the closed-form normal density (d=2)") {
    const PhaseSpace sp = make_phase_space(1, 0);
    Eigen::Matrix2d cov;
    cov << 0.7, 0.15, 0.15, 0.6;
    const Eigen::Vector2d mean(0.4, -0.3);
    const auto st = make_gaussian_state(sp, mean, cov);

    GridSpec spec;
    spec.extent = {8.0, 8.0};
    spec.points = {65, 65};
    const CharFnGrid grid = fill_charfn_grid(spec, gaussian_charfn_callable(st));
    const WignerGrid wig = wigner_from_charfn(grid);
    CHECK(wig.warnings.empty());

    double linf = 0.0;
    for (size_t i = 0; i < wig.values.size(); ++i) {
      const Eigen::VectorXd z = wig.spec.point(i);
      linf = std::max(linf, std::abs(wig.values[i] - normal_density(z, mean, cov)));
    }
    CHECK(linf <= 1e-6);

    // normalization: sum W dz = chi(0) = 1
    double mass = 0.0;
    for (double v : wig.values) mass += v;
    for (int axis = 0; axis < 2; ++axis) mass *= wig.spec.step(axis);
    CHECK(std::abs(mass - 1.0) <= 1e-6);
  }

  SUBCASE("reciprocity: wider chi gives narrower W") {
    const PhaseSpace sp = make_phase_space(0, 1);
    GridSpec spec;
    spec.extent = {12.0};
    spec.points = {129};
    for (double var : {0.5, 2.0}) {
      Eigen::MatrixXd cov(1, 1);
      cov << var;
      const auto st = make_gaussian_state(sp, Eigen::VectorXd::Zero(1), cov);
      const CharFnGrid grid = fill_charfn_grid(spec, gaussian_charfn_callable(st));
      const WignerGrid wig = wigner_from_charfn(grid);
      // peak of N(0, var) is 1/sqrt(2 pi var)
      double peak = 0.0;
      for (double v : wig.values) peak = std::max(peak, v);
      CHECK(peak == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI * var)).epsilon(1e-5));
    }
  }

  SUBCASE("round trip W -> chi is exact on interior points") {
    const PhaseSpace sp = make_phase_space(1, 0);
    PhiloxStream rng(12, 0);
    const auto st = random_admissible_state(rng, sp);
    GridSpec spec;
    spec.extent = {9.0, 9.0};
    spec.points = {33, 33};
    const CharFnGrid grid = fill_charfn_grid(spec, gaussian_charfn_callable(st));
    const CharFnGrid back = charfn_from_wigner(wigner_transform(grid), true);
    double err = 0.0;
    for (size_t i = 0; i < grid.values.size(); ++i)
      err = std::max(err, std::abs(grid.values[i] - back.values[i]));
    CHECK(err <= 1e-8);
  }

  SUBCASE("boundary decay warning on a too-small grid") {
    const PhaseSpace sp = make_phase_space(1, 0);
    const auto st = make_gaussian_state(sp, Eigen::Vector2d::Zero(),
                                        0.5 * Eigen::Matrix2d::Identity());
    GridSpec spec;
    spec.extent = {1.0, 1.0};  // chi nowhere near decayed
    spec.points = {17, 17};
    const CharFnGrid grid = fill_charfn_grid(spec, gaussian_charfn_callable(st));
    const WignerGrid wig = wigner_from_charfn(grid);
    CHECK_FALSE(wig.warnings.empty());
  }

  SUBCASE("dimension cap") {
    GridSpec spec;
    spec.extent = {1, 1, 1, 1, 1};
    spec.points = {3, 3, 3, 3, 3};
    CharFnGrid grid;
    grid.spec = spec;
    grid.values.assign(spec.size(), cplx(1.0, 0.0));
    CHECK_THROWS_AS(wigner_from_charfn(grid), std::invalid_argument);
  }
}

TEST_CASE("charfn grid checks") {
  const PhaseSpace sp = make_phase_space(1, 0);
  const auto st = make_gaussian_state(sp, Eigen::Vector2d(0.3, 0.1),
                                      0.6 * Eigen::Matrix2d::Identity());
  GridSpec spec;
  spec.extent = {7.0, 7.0};
  spec.points = {33, 33};
  const CharFnGrid grid = fill_charfn_grid(spec, gaussian_charfn_callable(st));
  const GridCheck chk = check_charfn_grid(grid);
  CHECK(chk.chi0_error <= 1e-10);
  CHECK(chk.hermitian_asymmetry <= 1e-10);
}

TEST_CASE("marginals") {
  SUBCASE("block-diagonal covariance: marginals are the blocks") {
    const PhaseSpace sp = make_phase_space(1, 1);
    Eigen::Matrix3d cov = Eigen::Vector3d(0.5, 0.7, 1.2).asDiagonal();
    const auto st = make_gaussian_state(sp, Eigen::Vector3d(1, 2, 3), cov);
    const auto m = marginals(st);
    CHECK(m.quantum_mean.isApprox(Eigen::Vector2d(1, 2)));
    CHECK(m.classical_mean[0] == 3.0);
    CHECK(m.quantum_cov(0, 0) == 0.5);
    CHECK(m.classical_cov(0, 0) == 1.2);
  }

  SUBCASE("correlated state: quantum marginal stays admissible") {
    PhiloxStream rng(13, 0);
    for (int trial = 0; trial < 20; ++trial) {
      const PhaseSpace sp = make_phase_space(1, 2);
      const auto st = random_admissible_state(rng, sp);
      const auto m = marginals(st);
      const PhaseSpace q = make_phase_space(1, 0);
      const auto qs = make_gaussian_state(q, m.quantum_mean, m.quantum_cov);
      CHECK(gaussian_admissibility_margin(qs) >= -1e-10);
    }
  }

  SUBCASE("hybrid 1+1 with off-diagonal coupling 0.3") {
    const PhaseSpace sp = make_phase_space(1, 1);
    Eigen::Matrix3d cov;
    cov << 0.8, 0.0, 0.3, 0.0, 0.8, 0.0, 0.3, 0.0, 1.5;
    const auto st = make_gaussian_state(sp, Eigen::Vector3d::Zero(), cov);
    const auto m = marginals(st);
    CHECK(m.classical_cov(0, 0) == 1.5);
    CHECK(m.quantum_cov(0, 0) == 0.8);
    // cross-check by sampling the characteristic function on the classical axis
    const cplx v = gaussian_charfn(st, Eigen::Vector3d(0, 0, 1.0));
    CHECK(v.real() == doctest::Approx(std::exp(-0.5 * 1.5)));
  }

  SUBCASE("classical marginal density equals the Fourier inversion of chi(0,k)") {
    const PhaseSpace sp = make_phase_space(1, 1);
    Eigen::Matrix3d cov;
    cov << 0.9, 0.1, 0.25, 0.1, 0.7, -0.2, 0.25, -0.2, 1.1;
    const auto st = make_gaussian_state(sp, Eigen::Vector3d(0.0, 0.0, 0.6), cov);
    const auto m = marginals(st);

    GridSpec spec;
    spec.extent = {10.0};
    spec.points = {129};
    const CharFnGrid grid = fill_charfn_grid(spec, [&](const Eigen::VectorXd& k) {
      return gaussian_charfn(st, Eigen::Vector3d(0.0, 0.0, k[0]));
    });
    const WignerGrid dens = wigner_from_charfn(grid);
    double linf = 0.0;
    for (size_t i = 0; i < dens.values.size(); ++i) {
      const Eigen::VectorXd z = dens.spec.point(i);
      linf = std::max(linf,
                      std::abs(dens.values[i] -
                               normal_density(z, m.classical_mean, m.classical_cov)));
    }
    CHECK(linf <= 1e-6);
  }
}

TEST_CASE("conditional_decomposition") {
  SUBCASE("block-diagonal: conditional state is the quantum marginal, x-independent") {
    const PhaseSpace sp = make_phase_space(1, 1);
    Eigen::Matrix3d cov = Eigen::Vector3d(0.5, 0.5, 2.0).asDiagonal();
    const auto st = make_gaussian_state(sp, Eigen::Vector3d(1, -1, 4), cov);
    const auto cd = conditional_decomposition(st);
    CHECK(cd.cond_mean_slope.cwiseAbs().maxCoeff() == 0.0);
    CHECK(cd.cond_mean_const.isApprox(Eigen::Vector2d(1, -1)));
    CHECK(cd.cond_cov.isApprox(0.5 * Eigen::Matrix2d::Identity()));
  }

  SUBCASE("coupled 3x3 example against an independent Schur complement") {
    const PhaseSpace sp = make_phase_space(1, 1);
    Eigen::Matrix3d cov;
    cov << 0.9, 0.1, 0.25, 0.1, 0.7, -0.2, 0.25, -0.2, 1.1;
    const auto st = make_gaussian_state(sp, Eigen::Vector3d(0.2, -0.4, 0.6), cov);
    const auto cd = conditional_decomposition(st);

    const Eigen::Matrix2d vq = cov.topLeftCorner(2, 2);
    const Eigen::Vector2d vqc = cov.topRightCorner(2, 1);
    const double vcl = cov(2, 2);
    const Eigen::Matrix2d schur = vq - vqc * vqc.transpose() / vcl;
    CHECK((cd.cond_cov - schur).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((cd.cond_mean_slope - vqc / vcl).cwiseAbs().maxCoeff() <= 1e-14);

    // conditional covariance inherits admissibility
    const PhaseSpace q = make_phase_space(1, 0);
    const auto qs = make_gaussian_state(q, cd.cond_mean_const, cd.cond_cov);
    CHECK(gaussian_admissibility_margin(qs) >= -1e-9);
  }

  SUBCASE("conditional reassembly reproduces the joint characteristic function") {
    // integral p(x) chi_cond(zeta | x) e^{i k x} dx == chi_joint(zeta, k),
    // quadrature over x against the closed joint form.
    const PhaseSpace sp = make_phase_space(1, 1);
    Eigen::Matrix3d cov;
    cov << 0.9, 0.1, 0.25, 0.1, 0.7, -0.2, 0.25, -0.2, 1.1;
    const auto st = make_gaussian_state(sp, Eigen::Vector3d(0.2, -0.4, 0.6), cov);
    const auto cd = conditional_decomposition(st);

    PhiloxStream rng(14, 0);
    for (int trial = 0; trial < 50; ++trial) {
      const Eigen::VectorXd xi = random_vector(rng, 3, 1.2);
      const Eigen::Vector2d zeta = xi.head(2);
      const double k = xi[2];

      // trapezoid over +-10 std dev
      const double sd = std::sqrt(cd.classical_cov(0, 0));
      const int npts = 4001;
      const double lo = cd.classical_mean[0] - 10.0 * sd;
      const double hi = cd.classical_mean[0] + 10.0 * sd;
      const double h = (hi - lo) / (npts - 1);
      cplx acc(0.0, 0.0);
      for (int i = 0; i < npts; ++i) {
        const double x = lo + i * h;
        const double p =
            std::exp(-0.5 * (x - cd.classical_mean[0]) * (x - cd.classical_mean[0]) /
                     cd.classical_cov(0, 0)) /
            std::sqrt(2.0 * M_PI * cd.classical_cov(0, 0));
        const Eigen::Vector2d cm =
            cd.cond_mean_const + cd.cond_mean_slope * Eigen::VectorXd::Constant(1, x - cd.classical_mean[0]);
        const cplx chi_cond =
            std::exp(cplx(-0.5 * zeta.dot(cd.cond_cov * zeta), cm.dot(zeta)));
        const double w = (i == 0 || i == npts - 1) ? 0.5 : 1.0;
        acc += w * p * chi_cond * std::polar(1.0, k * x);
      }
      acc *= h;
      CHECK(std::abs(acc - gaussian_charfn(st, xi)) <= 1e-8);
    }
  }

  SUBCASE("non-admissible joint state is caught at the conditional level") {
    const PhaseSpace sp = make_phase_space(1, 1);
    Eigen::Matrix3d cov = Eigen::Vector3d(0.1, 0.1, 1.0).asDiagonal();  // below vacuum
    const auto st = make_gaussian_state(sp, Eigen::Vector3d::Zero(), cov);
    REQUIRE(gaussian_admissibility_margin(st) < -1e-9);
    CHECK_THROWS_WITH_AS(conditional_decomposition(st),
                         doctest::Contains("admissib"), std::invalid_argument);
  }

  SUBCASE("singular classical block is an explicit error") {
    const PhaseSpace sp = make_phase_space(1, 1);
    Eigen::Matrix3d cov = Eigen::Vector3d(0.5, 0.5, 0.0).asDiagonal();
    const auto st = make_gaussian_state(sp, Eigen::Vector3d::Zero(), cov);
    CHECK_THROWS_WITH_AS(conditional_decomposition(st),
                         doctest::Contains("regularize"), std::invalid_argument);
  }

  SUBCASE("near-singular classical block sets the conditioning flag") {
    const PhaseSpace sp = make_phase_space(1, 1);
    Eigen::Matrix3d cov = Eigen::Vector3d(0.5, 0.5, 1e-13).asDiagonal();
    const auto st = make_gaussian_state(sp, Eigen::Vector3d::Zero(), cov);
    const auto cd = conditional_decomposition(st);
    CHECK(cd.ill_conditioned);
  }
}

TEST_CASE("charfn_from_grid interpolation") {
  const PhaseSpace sp = make_phase_space(1, 0);
  const auto st = make_gaussian_state(sp, Eigen::Vector2d(0.2, -0.1),
                                      0.6 * Eigen::Matrix2d::Identity());
  GridSpec spec;
  spec.extent = {6.0, 6.0};
  spec.points = {121, 121};
  const CharFnGrid grid = fill_charfn_grid(spec, gaussian_charfn_callable(st));
  const CharFn interp = charfn_from_grid(grid);

  SUBCASE("exact on grid points") {
    for (size_t i : {size_t(0), grid.values.size() / 2, grid.values.size() - 1}) {
      const cplx v = interp(grid.spec.point(i));
      CHECK(std::abs(v - grid.values[i]) <= 1e-14);
    }
  }
  SUBCASE("close to the smooth function between points") {
    PhiloxStream rng(16, 0);
    for (int i = 0; i < 50; ++i) {
      const Eigen::VectorXd xi = random_vector(rng, 2, 3.0);
      CHECK(std::abs(interp(xi) - gaussian_charfn(st, xi)) <= 5e-3);
    }
  }
  SUBCASE("zero outside the grid") {
    CHECK(interp(Eigen::Vector2d(7.0, 0.0)) == cplx(0.0, 0.0));
  }
}

TEST_CASE("grid CSV round trip is bit exact") {
  const PhaseSpace sp = make_phase_space(1, 0);
  PhiloxStream rng(15, 0);
  const auto st = random_admissible_state(rng, sp);
  GridSpec spec;
  spec.extent = {5.0, 5.0};
  spec.points = {9, 9};
  const CharFnGrid grid = fill_charfn_grid(spec, gaussian_charfn_callable(st));

  const std::string path = "/tmp/qf_test_grid.csv";
  write_charfn_grid_csv(grid, path, {"test: round trip"});
  const CharFnGrid back = read_charfn_grid_csv(path);
  REQUIRE(back.values.size() == grid.values.size());
  for (size_t i = 0; i < grid.values.size(); ++i) {
    CHECK(back.values[i].real() == grid.values[i].real());
    CHECK(back.values[i].imag() == grid.values[i].imag());
  }
  std::remove(path.c_str());
}
