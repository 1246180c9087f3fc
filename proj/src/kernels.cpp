#include "quasifree/kernels.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace quasifree {

namespace {

using cplx = std::complex<double>;

/// z-space grid reciprocal to a xi-space grid: same point counts,
/// dz = 2 pi / (N dxi).
GridSpec reciprocal_spec(const GridSpec& spec) {
  GridSpec out;
  out.points = spec.points;
  out.extent.resize(spec.extent.size());
  for (int axis = 0; axis < spec.dim(); ++axis) {
    const double dz = 2.0 * M_PI / (spec.points[axis] * spec.step(axis));
    out.extent[axis] = 0.5 * (spec.points[axis] - 1) * dz;
  }
  return out;
}

/// F[a][b] = exp(sign * i * 2 pi (a-m)(b-m)/N), m = (N-1)/2.
Eigen::MatrixXcd centred_dft_matrix(int n, double sign) {
  Eigen::MatrixXcd f(n, n);
  const int m = (n - 1) / 2;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      f(a, b) = std::polar(1.0, sign * 2.0 * M_PI * double(a - m) * double(b - m) / n);
  return f;
}

/// Apply the per-axis transform along `axis` of a row-major tensor.
/// Lines are independent; the loop over them is the parallel dimension.
void apply_axis(std::vector<cplx>& data, const std::vector<int>& dims, int axis,
                const Eigen::MatrixXcd& f, bool parallel) {
  const int n = dims[axis];
  long stride = 1;
  for (size_t a = axis + 1; a < dims.size(); ++a) stride *= dims[a];
  long outer = 1;
  for (int a = 0; a < axis; ++a) outer *= dims[a];
  const long lines = outer * stride;

#pragma omp parallel for schedule(static) if (parallel)
  for (long line = 0; line < lines; ++line) {
    const long o = line / stride;
    const long in = line % stride;
    const long base = o * n * stride + in;
    Eigen::VectorXcd buf(n);
    for (int b = 0; b < n; ++b) buf[b] = data[base + b * stride];
    const Eigen::VectorXcd res = f * buf;
    for (int a = 0; a < n; ++a) data[base + a * stride] = res[a];
  }
}

}  // namespace

CharFnGrid fill_charfn_grid(const GridSpec& spec, const CharFn& chi, bool parallel) {
  spec.validate();
  CharFnGrid grid;
  grid.spec = spec;
  grid.values.resize(spec.size());
  const long total = static_cast<long>(spec.size());
#pragma omp parallel for schedule(static) if (parallel)
  for (long i = 0; i < total; ++i)
    grid.values[i] = chi(spec.point(static_cast<size_t>(i)));
  return grid;
}

WignerGrid wigner_transform(const CharFnGrid& grid, bool parallel) {
  grid.spec.validate();
  if (grid.values.size() != grid.spec.size())
    throw std::invalid_argument("wigner_transform: value count mismatch");

  std::vector<cplx> work = grid.values;
  double scale = 1.0;
  for (int axis = 0; axis < grid.spec.dim(); ++axis) {
    const Eigen::MatrixXcd f = centred_dft_matrix(grid.spec.points[axis], -1.0);
    apply_axis(work, grid.spec.points, axis, f, parallel);
    scale *= grid.spec.step(axis) / (2.0 * M_PI);
  }

  WignerGrid out;
  out.spec = reciprocal_spec(grid.spec);
  out.values.resize(work.size());
  const long total = static_cast<long>(work.size());
#pragma omp parallel for schedule(static) if (parallel)
  for (long i = 0; i < total; ++i) out.values[i] = scale * work[i].real();
  return out;
}

CharFnGrid wigner_inverse_transform(const WignerGrid& grid, bool parallel) {
  grid.spec.validate();
  if (grid.values.size() != grid.spec.size())
    throw std::invalid_argument("wigner_inverse_transform: value count mismatch");

  std::vector<cplx> work(grid.values.begin(), grid.values.end());
  double scale = 1.0;
  for (int axis = 0; axis < grid.spec.dim(); ++axis) {
    const Eigen::MatrixXcd f = centred_dft_matrix(grid.spec.points[axis], +1.0);
    apply_axis(work, grid.spec.points, axis, f, parallel);
    scale *= grid.spec.step(axis);
  }

  CharFnGrid out;
  out.spec = reciprocal_spec(grid.spec);  // reciprocity is an involution
  out.values.resize(work.size());
  const long total = static_cast<long>(work.size());
#pragma omp parallel for schedule(static) if (parallel)
  for (long i = 0; i < total; ++i) out.values[i] = scale * work[i];
  return out;
}

WignerGrid wigner_transform_direct(const CharFnGrid& grid) {
  grid.spec.validate();
  WignerGrid out;
  out.spec = reciprocal_spec(grid.spec);
  out.values.assign(grid.spec.size(), 0.0);

  double scale = 1.0;
  for (int axis = 0; axis < grid.spec.dim(); ++axis)
    scale *= grid.spec.step(axis) / (2.0 * M_PI);

  for (size_t a = 0; a < out.values.size(); ++a) {
    const Eigen::VectorXd z = out.spec.point(a);
    cplx acc{0.0, 0.0};
    for (size_t b = 0; b < grid.values.size(); ++b) {
      const Eigen::VectorXd xi = grid.spec.point(b);
      acc += grid.values[b] * std::polar(1.0, -z.dot(xi));
    }
    out.values[a] = scale * acc.real();
  }
  return out;
}

}  // namespace quasifree
