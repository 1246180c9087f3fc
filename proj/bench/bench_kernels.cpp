// Timing comparison of the OpenMP kernels against their serial references.
// Also verifies that both paths agree to the bit, which is the contract the
// tests rely on.

#include <chrono>
#include <cmath>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "quasifree/kernels.hpp"
#include "quasifree/rng.hpp"
#include "quasifree/semigroup.hpp"
#include "quasifree/states.hpp"
#include "quasifree/stochastic.hpp"

using namespace quasifree;

namespace {

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <typename F>
double timed(F&& f) {
  const double t0 = now_s();
  f();
  return now_s() - t0;
}

void report(const char* name, double serial_s, double parallel_s, double max_diff) {
  std::printf("%-28s serial %8.3f s   omp %8.3f s   speedup %5.2fx   max|diff| %g\n",
              name, serial_s, parallel_s, serial_s / parallel_s, max_diff);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (OpenMP disabled)\n");
#endif

  // Characteristic-function grid fill (d = 3).
  {
    PhaseSpace sp = make_phase_space(1, 1);
    Eigen::Matrix3d cov = Eigen::Vector3d(0.5, 0.6, 0.9).asDiagonal();
    const auto st = make_gaussian_state(sp, Eigen::Vector3d(0.2, -0.1, 0.4), cov);
    GridSpec spec;
    spec.extent = {8.0, 8.0, 8.0};
    spec.points = {65, 65, 65};
    CharFnGrid a, b;
    const double ts = timed([&] { a = fill_charfn_grid(spec, gaussian_charfn_callable(st), false); });
    const double tp = timed([&] { b = fill_charfn_grid(spec, gaussian_charfn_callable(st), true); });
    double diff = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i)
      diff = std::max(diff, std::abs(a.values[i] - b.values[i]));
    report("charfn grid fill 65^3", ts, tp, diff);

    // Wigner transform on the same grid.
    WignerGrid wa, wb;
    const double ws = timed([&] { wa = wigner_transform(a, false); });
    const double wp = timed([&] { wb = wigner_transform(a, true); });
    diff = 0.0;
    for (size_t i = 0; i < wa.values.size(); ++i)
      diff = std::max(diff, std::abs(wa.values[i] - wb.values[i]));
    report("wigner transform 65^3", ws, wp, diff);
  }

  // Monte Carlo OU ensemble.
  {
    PhaseSpace sp = make_phase_space(0, 1);
    Eigen::MatrixXd z(1, 1), am(1, 1);
    z << -1.0;
    am << 2.0;
    const auto params = make_generator_params(sp, z, Eigen::VectorXd::Zero(1), am);
    const ClassicalSDEModel model = classical_sde_from_params(params);
    Eigen::MatrixXd cov0(1, 1);
    cov0 << 1.0;
    InitialSampler x0{Eigen::VectorXd::Zero(1), cov0, false};
    TrajectoryEnsemble ea, eb;
    const double ts = timed(
        [&] { ea = simulate_classical(model, x0, 1.0, 1e-3, 40000, 99, {1.0}, false); });
    const double tp = timed(
        [&] { eb = simulate_classical(model, x0, 1.0, 1e-3, 40000, 99, {1.0}, true); });
    double diff = 0.0;
    for (size_t i = 0; i < ea.samples.size(); ++i)
      diff = std::max(diff, std::abs(ea.samples[i] - eb.samples[i]));
    report("monte carlo OU 4e4 paths", ts, tp, diff);
  }

  return 0;
}
