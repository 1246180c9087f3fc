#include "quasifree/states.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "quasifree/io_util.hpp"
#include "quasifree/kernels.hpp"
#include "quasifree/numerics.hpp"

namespace quasifree {

HybridGaussianState make_gaussian_state(PhaseSpace space, Eigen::VectorXd mean,
                                        Eigen::MatrixXd cov) {
  if (mean.size() != space.d || cov.rows() != space.d || cov.cols() != space.d)
    throw std::invalid_argument("gaussian state: dimension mismatch");
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("gaussian state: covariance must be symmetric");
  return {std::move(space), std::move(mean), std::move(cov)};
}

std::complex<double> gaussian_charfn(const HybridGaussianState& state,
                                     const Eigen::VectorXd& xi) {
  if (xi.size() != state.space.d)
    throw std::invalid_argument("gaussian_charfn: dimension mismatch");
  return std::exp(std::complex<double>(-0.5 * xi.dot(state.cov * xi),
                                       state.mean.dot(xi)));
}

CharFn gaussian_charfn_callable(const HybridGaussianState& state) {
  return [state](const Eigen::VectorXd& xi) { return gaussian_charfn(state, xi); };
}

double gaussian_admissibility_margin(const HybridGaussianState& state) {
  Eigen::MatrixXcd m = state.cov.cast<std::complex<double>>() +
                       std::complex<double>(0.0, 0.5) *
                           state.space.sigma.cast<std::complex<double>>();
  return min_eigenvalue_hermitian(m);
}

AdmissibilityReport admissibility_check(const CharFn& chi,
                                        const std::vector<Eigen::VectorXd>& sample,
                                        const PhaseSpace& space, double tol) {
  if (sample.empty() || sample.size() > 64)
    throw std::invalid_argument("admissibility_check: sample size must be in [1, 64]");
  const int n = static_cast<int>(sample.size());

  AdmissibilityReport rep;
  Eigen::MatrixXcd m(n, n);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      const double twist = 0.5 * symplectic_pairing(space, sample[k], sample[l]);
      m(k, l) = chi(sample[k] - sample[l]) * std::polar(1.0, twist);
    }
  rep.min_eigenvalue = min_eigenvalue_hermitian(m);
  rep.chi0_error = std::abs(chi(Eigen::VectorXd::Zero(space.d)) - 1.0);
  rep.pass = rep.min_eigenvalue >= -tol && rep.chi0_error <= tol;

  // Heuristic continuity probe near the origin (condition 1).
  const double h = 1e-6;
  for (int axis = 0; axis < std::min(space.d, 4); ++axis) {
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(space.d);
    dx[axis] = h;
    if (std::abs(chi(dx) - chi(Eigen::VectorXd::Zero(space.d))) > 1e-2) {
      rep.warnings.push_back("chi appears discontinuous near 0 along axis " +
                             std::to_string(axis));
      break;
    }
  }
  return rep;
}

std::vector<Eigen::VectorXd> admissibility_sample(const PhaseSpace& space,
                                                  int count, double radius) {
  return halton_points(space.d, count, radius, /*include_origin=*/true);
}

size_t GridSpec::size() const {
  size_t total = 1;
  for (int n : points) total *= static_cast<size_t>(n);
  return total;
}

std::vector<int> GridSpec::unflatten(size_t flat) const {
  std::vector<int> idx(dim());
  for (int axis = dim() - 1; axis >= 0; --axis) {
    idx[axis] = static_cast<int>(flat % points[axis]);
    flat /= points[axis];
  }
  return idx;
}

Eigen::VectorXd GridSpec::point(size_t flat) const {
  const auto idx = unflatten(flat);
  Eigen::VectorXd p(dim());
  for (int axis = 0; axis < dim(); ++axis) p[axis] = coord(axis, idx[axis]);
  return p;
}

void GridSpec::validate() const {
  if (extent.size() != points.size() || extent.empty())
    throw std::invalid_argument("grid spec: extent/points size mismatch");
  for (size_t i = 0; i < points.size(); ++i) {
    if (points[i] < 3 || points[i] % 2 == 0)
      throw std::invalid_argument("grid spec: point counts must be odd and >= 3");
    if (!(extent[i] > 0.0))
      throw std::invalid_argument("grid spec: extents must be positive");
  }
}

GridCheck check_charfn_grid(const CharFnGrid& grid) {
  grid.spec.validate();
  if (grid.values.size() != grid.spec.size())
    throw std::invalid_argument("charfn grid: value count mismatch");
  GridCheck chk;
  const size_t total = grid.values.size();
  // Origin sits at the exact centre of the flattened array.
  chk.chi0_error = std::abs(grid.values[(total - 1) / 2] - std::complex<double>(1.0, 0.0));
  for (size_t i = 0; i < total; ++i) {
    const size_t mirror = total - 1 - i;  // index of -xi on a centred grid
    chk.hermitian_asymmetry = std::max(
        chk.hermitian_asymmetry,
        std::abs(grid.values[i] - std::conj(grid.values[mirror])));
    const auto idx = grid.spec.unflatten(i);
    for (int axis = 0; axis < grid.spec.dim(); ++axis)
      if (idx[axis] == 0 || idx[axis] == grid.spec.points[axis] - 1) {
        chk.boundary_max = std::max(chk.boundary_max, std::abs(grid.values[i]));
        break;
      }
  }
  return chk;
}

WignerGrid wigner_from_charfn(const CharFnGrid& grid, bool parallel) {
  grid.spec.validate();
  if (grid.spec.dim() > 4)
    throw std::invalid_argument("wigner_from_charfn: dimension capped at 4");
  WignerGrid out = wigner_transform(grid, parallel);
  const GridCheck chk = check_charfn_grid(grid);
  if (chk.boundary_max > 1e-6)
    out.warnings.push_back(
        "characteristic function does not decay at the grid boundary (max |chi| = " +
        std::to_string(chk.boundary_max) + "); Wigner values may be aliased");
  return out;
}

CharFnGrid charfn_from_wigner(const WignerGrid& grid, bool parallel) {
  return wigner_inverse_transform(grid, parallel);
}

CharFn charfn_from_grid(const CharFnGrid& grid) {
  grid.spec.validate();
  CharFnGrid copy = grid;
  return [copy](const Eigen::VectorXd& xi) -> std::complex<double> {
    const GridSpec& spec = copy.spec;
    const int dim = spec.dim();
    if (xi.size() != dim) throw std::invalid_argument("charfn grid interpolation: bad dimension");
    std::vector<int> base(dim);
    std::vector<double> frac(dim);
    for (int axis = 0; axis < dim; ++axis) {
      const double u = (xi[axis] + spec.extent[axis]) / spec.step(axis);
      if (u < 0.0 || u > spec.points[axis] - 1) return {0.0, 0.0};
      const double fl = std::floor(u);
      base[axis] = std::min(static_cast<int>(fl), spec.points[axis] - 2);
      frac[axis] = u - base[axis];
    }
    std::complex<double> acc{0.0, 0.0};
    for (int corner = 0; corner < (1 << dim); ++corner) {
      double w = 1.0;
      size_t flat = 0;
      for (int axis = 0; axis < dim; ++axis) {
        const int bit = (corner >> axis) & 1;
        w *= bit ? frac[axis] : 1.0 - frac[axis];
        flat = flat * spec.points[axis] + (base[axis] + bit);
      }
      acc += w * copy.values[flat];
    }
    return acc;
  };
}

GaussianMarginals marginals(const HybridGaussianState& state) {
  const int n2 = 2 * state.space.n;
  const int s = state.space.s;
  GaussianMarginals m;
  m.quantum_mean = state.mean.head(n2);
  m.quantum_cov = state.cov.topLeftCorner(n2, n2);
  m.classical_mean = state.mean.tail(s);
  m.classical_cov = state.cov.bottomRightCorner(s, s);
  return m;
}

ConditionalDecomposition conditional_decomposition(const HybridGaussianState& state) {
  const int n2 = 2 * state.space.n;
  const int s = state.space.s;
  if (s == 0)
    throw std::invalid_argument("conditional_decomposition: no classical sector");

  const Eigen::MatrixXd v_cl = state.cov.bottomRightCorner(s, s);
  const Eigen::MatrixXd v_qc = state.cov.topRightCorner(n2, s);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(v_cl);
  const double dmin = ldlt.vectorD().minCoeff();
  const double dmax = ldlt.vectorD().maxCoeff();
  if (ldlt.info() != Eigen::Success || dmin <= 0.0)
    throw std::invalid_argument(
        "conditional_decomposition: classical covariance block is singular; "
        "regularize it (add a small multiple of the identity) before conditioning");

  ConditionalDecomposition out;
  out.classical_mean = state.mean.tail(s);
  out.classical_cov = v_cl;
  out.cond_mean_slope = ldlt.solve(v_qc.transpose()).transpose();  // V_qc V_cl^-1
  out.cond_mean_const = state.mean.head(n2);
  out.cond_cov = state.cov.topLeftCorner(n2, n2) - out.cond_mean_slope * v_qc.transpose();
  out.cond_cov = 0.5 * (out.cond_cov + out.cond_cov.transpose()).eval();
  out.ill_conditioned = dmin < 1e-10 * std::max(1.0, dmax);

  // Conditioning inherits admissibility; a violation means the input state
  // was not admissible in the first place.
  if (n2 > 0) {
    const Eigen::MatrixXcd twisted =
        out.cond_cov.cast<std::complex<double>>() +
        std::complex<double>(0.0, 0.5) *
            state.space.sigma_quantum().cast<std::complex<double>>();
    if (min_eigenvalue_hermitian(twisted) < -1e-9)
      throw std::invalid_argument(
          "conditional_decomposition: conditional covariance violates quantum "
          "admissibility; the joint state is not an admissible hybrid state");
  }
  return out;
}

void write_charfn_grid_csv(const CharFnGrid& grid, const std::string& path,
                           const std::vector<std::string>& header_extra) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "# charfn_grid dim=" << grid.spec.dim();
  os << " extent=";
  for (size_t i = 0; i < grid.spec.extent.size(); ++i)
    os << (i ? "," : "") << format_g17(grid.spec.extent[i]);
  os << " points=";
  for (size_t i = 0; i < grid.spec.points.size(); ++i)
    os << (i ? "," : "") << grid.spec.points[i];
  os << "\n";
  for (const auto& line : header_extra) os << "# " << line << "\n";
  for (int axis = 0; axis < grid.spec.dim(); ++axis) os << "xi_" << axis << ",";
  os << "re,im\n";
  for (size_t i = 0; i < grid.values.size(); ++i) {
    const Eigen::VectorXd p = grid.spec.point(i);
    for (int axis = 0; axis < grid.spec.dim(); ++axis)
      os << format_g17(p[axis]) << ",";
    os << format_g17(grid.values[i].real()) << "," << format_g17(grid.values[i].imag())
       << "\n";
  }
}

CharFnGrid read_charfn_grid_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(is, line) || line.rfind("# charfn_grid", 0) != 0)
    throw std::runtime_error(path + ": missing charfn_grid header");

  CharFnGrid grid;
  {
    std::istringstream hs(line);
    std::string tok;
    while (hs >> tok) {
      if (tok.rfind("extent=", 0) == 0) {
        std::istringstream vs(tok.substr(7));
        std::string piece;
        while (std::getline(vs, piece, ',')) grid.spec.extent.push_back(std::stod(piece));
      } else if (tok.rfind("points=", 0) == 0) {
        std::istringstream vs(tok.substr(7));
        std::string piece;
        while (std::getline(vs, piece, ',')) grid.spec.points.push_back(std::stoi(piece));
      }
    }
  }
  grid.spec.validate();
  grid.values.reserve(grid.spec.size());
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("xi_", 0) == 0) continue;  // column header
    std::istringstream ls(line);
    std::string piece;
    std::vector<double> cols;
    while (std::getline(ls, piece, ',')) cols.push_back(std::stod(piece));
    if (cols.size() != static_cast<size_t>(grid.spec.dim()) + 2)
      throw std::runtime_error(path + ": malformed row");
    grid.values.emplace_back(cols[cols.size() - 2], cols[cols.size() - 1]);
  }
  if (grid.values.size() != grid.spec.size())
    throw std::runtime_error(path + ": value count does not match grid spec");
  return grid;
}

void write_wigner_grid_csv(const WignerGrid& grid, const std::string& path,
                           const std::vector<std::string>& header_extra) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "# wigner_grid dim=" << grid.spec.dim();
  os << " extent=";
  for (size_t i = 0; i < grid.spec.extent.size(); ++i)
    os << (i ? "," : "") << format_g17(grid.spec.extent[i]);
  os << " points=";
  for (size_t i = 0; i < grid.spec.points.size(); ++i)
    os << (i ? "," : "") << grid.spec.points[i];
  os << "\n";
  for (const auto& line : header_extra) os << "# " << line << "\n";
  for (const auto& warn : grid.warnings) os << "# warning: " << warn << "\n";
  for (int axis = 0; axis < grid.spec.dim(); ++axis) os << "z_" << axis << ",";
  os << "value\n";
  for (size_t i = 0; i < grid.values.size(); ++i) {
    const Eigen::VectorXd p = grid.spec.point(i);
    for (int axis = 0; axis < grid.spec.dim(); ++axis)
      os << format_g17(p[axis]) << ",";
    os << format_g17(grid.values[i]) << "\n";
  }
}

}  // namespace quasifree
