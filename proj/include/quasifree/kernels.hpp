#pragma once

#include "quasifree/states.hpp"

namespace quasifree {

/// Data-parallel kernels. Each has an OpenMP path (parallel = true) and a
/// serial path producing bit-identical output; the serial one is the
/// reference used in tests and the benchmark.

/// Evaluate chi on every grid point.
CharFnGrid fill_charfn_grid(const GridSpec& spec, const CharFn& chi,
                            bool parallel = true);

/// Centred multidimensional DFT realizing the continuous Fourier inversion
/// W(z) = (2pi)^-d integral e^{-i z.xi} chi(xi) dxi on the sampling lattice.
/// Applied axis by axis with a precomputed N x N transform matrix; the
/// parallel path splits the independent lines across threads.
WignerGrid wigner_transform(const CharFnGrid& grid, bool parallel = true);

/// Exact inverse of wigner_transform (up to roundoff).
CharFnGrid wigner_inverse_transform(const WignerGrid& grid, bool parallel = true);

/// Brute-force O(M^2) direct sum, independent of the axis-split path.
/// Testing oracle only; feasible for small grids.
WignerGrid wigner_transform_direct(const CharFnGrid& grid);

}  // namespace quasifree
