#include "quasifree/numerics.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace quasifree {

namespace {

using Eigen::MatrixXd;

void pade3(const MatrixXd& a, MatrixXd& u, MatrixXd& v) {
  const double b[] = {120., 60., 12., 1.};
  const MatrixXd a2 = a * a;
  const MatrixXd id = MatrixXd::Identity(a.rows(), a.cols());
  u = a * (b[3] * a2 + b[1] * id);
  v = b[2] * a2 + b[0] * id;
}

void pade5(const MatrixXd& a, MatrixXd& u, MatrixXd& v) {
  const double b[] = {30240., 15120., 3360., 420., 30., 1.};
  const MatrixXd a2 = a * a;
  const MatrixXd a4 = a2 * a2;
  const MatrixXd id = MatrixXd::Identity(a.rows(), a.cols());
  u = a * (b[5] * a4 + b[3] * a2 + b[1] * id);
  v = b[4] * a4 + b[2] * a2 + b[0] * id;
}

void pade7(const MatrixXd& a, MatrixXd& u, MatrixXd& v) {
  const double b[] = {17297280., 8648640., 1995840., 277200.,
                      25200.,    1512.,    56.,      1.};
  const MatrixXd a2 = a * a;
  const MatrixXd a4 = a2 * a2;
  const MatrixXd a6 = a4 * a2;
  const MatrixXd id = MatrixXd::Identity(a.rows(), a.cols());
  u = a * (b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  v = b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

void pade9(const MatrixXd& a, MatrixXd& u, MatrixXd& v) {
  const double b[] = {17643225600., 8821612800., 2075673600., 302702400.,
                      30270240.,    2162160.,    110880.,     3960.,
                      90.,          1.};
  const MatrixXd a2 = a * a;
  const MatrixXd a4 = a2 * a2;
  const MatrixXd a6 = a4 * a2;
  const MatrixXd a8 = a6 * a2;
  const MatrixXd id = MatrixXd::Identity(a.rows(), a.cols());
  u = a * (b[9] * a8 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  v = b[8] * a8 + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

void pade13(const MatrixXd& a, MatrixXd& u, MatrixXd& v) {
  const double b[] = {64764752532480000., 32382376266240000., 7771770303897600.,
                      1187353796428800.,  129060195264000.,   10559470521600.,
                      670442572800.,      33522128640.,       1323241920.,
                      40840800.,          960960.,            16380.,
                      182.,               1.};
  const MatrixXd a2 = a * a;
  const MatrixXd a4 = a2 * a2;
  const MatrixXd a6 = a4 * a2;
  const MatrixXd id = MatrixXd::Identity(a.rows(), a.cols());
  MatrixXd tmp = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2);
  tmp += b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
  u = a * tmp;
  v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2);
  v += b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

}  // namespace

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("matrix_exponential: square matrix required");
  if (!a.allFinite()) throw std::invalid_argument("matrix_exponential: non-finite entries");
  const double l1norm = a.cwiseAbs().colwise().sum().maxCoeff();
  MatrixXd u, v;
  int squarings = 0;
  if (l1norm < 1.495585217958292e-2) {
    pade3(a, u, v);
  } else if (l1norm < 2.539398330063230e-1) {
    pade5(a, u, v);
  } else if (l1norm < 9.504178996162932e-1) {
    pade7(a, u, v);
  } else if (l1norm < 2.097847961257068e0) {
    pade9(a, u, v);
  } else {
    const double maxnorm = 5.371920351148152;
    std::frexp(l1norm / maxnorm, &squarings);
    if (squarings < 0) squarings = 0;
    if (squarings > 1021) throw std::overflow_error("matrix_exponential: norm too large");
    const MatrixXd scaled = a * std::ldexp(1.0, -squarings);
    pade13(scaled, u, v);
  }
  const MatrixXd numer = v + u;
  const MatrixXd denom = v - u;
  MatrixXd result = denom.partialPivLu().solve(numer);
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

const GaussLegendreRule& gauss_legendre(int order) {
  static std::mutex mtx;
  static std::map<int, GaussLegendreRule> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;
  if (order < 1) throw std::invalid_argument("gauss_legendre: order >= 1 required");

  GaussLegendreRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const int m = (order + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Newton iteration on P_order from the Chebyshev-like initial guess.
    double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < order; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = order * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[order - 1 - i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[order - 1 - i] = rule.weights[i];
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  auto [pos, inserted] = cache.emplace(order, std::move(rule));
  return pos->second;
}

Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& m, double tol) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (m + m.transpose()));
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  Eigen::VectorXd lam = es.eigenvalues();
  for (int i = 0; i < lam.size(); ++i) {
    if (lam[i] < -tol * scale)
      throw std::runtime_error("psd_factor: matrix is not positive semidefinite (eigenvalue " +
                               std::to_string(lam[i]) + ")");
    if (lam[i] < 0.0) lam[i] = 0.0;
  }
  return es.eigenvectors() * lam.cwiseSqrt().asDiagonal();
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m, double tol) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (m + m.transpose()));
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  Eigen::VectorXd lam = es.eigenvalues();
  for (int i = 0; i < lam.size(); ++i) {
    if (lam[i] < -tol * scale)
      throw std::runtime_error("psd_sqrt: matrix is not positive semidefinite");
    if (lam[i] < 0.0) lam[i] = 0.0;
  }
  return es.eigenvectors() * lam.cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

double min_eigenvalue_hermitian(const Eigen::MatrixXcd& m) {
  if (m.rows() == 0) return 0.0;
  const Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double spectral_abscissa(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::EigenSolver<MatrixXd> es(m, false);
  return es.eigenvalues().real().maxCoeff();
}

std::vector<Eigen::VectorXd> halton_points(int dim, int count, double radius,
                                           bool include_origin) {
  static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19,
                               23, 29, 31, 37, 41, 43, 47, 53};
  if (dim < 1 || dim > 16) throw std::invalid_argument("halton_points: dim out of range");
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(count);
  int emitted = 0;
  if (include_origin && count > 0) {
    pts.push_back(Eigen::VectorXd::Zero(dim));
    ++emitted;
  }
  for (int i = 1; emitted < count; ++i, ++emitted) {
    Eigen::VectorXd p(dim);
    for (int axis = 0; axis < dim; ++axis) {
      const int base = primes[axis];
      double f = 1.0, r = 0.0;
      for (int k = i; k > 0; k /= base) {
        f /= base;
        r += f * (k % base);
      }
      p[axis] = radius * (2.0 * r - 1.0);
    }
    pts.push_back(std::move(p));
  }
  return pts;
}

}  // namespace quasifree
