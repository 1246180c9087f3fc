#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "quasifree/generator.hpp"
#include "quasifree/states.hpp"

namespace quasifree {

struct ClassicalJump {
  Eigen::VectorXd y;     // classical displacement (length s)
  double weight = 0.0;   // rate
  bool compensated = false;  // hybrid-norm indicator of the source atom
};

/// Sample-path model of the classical drift-diffusion-jump evolution.
struct ClassicalSDEModel {
  Eigen::VectorXd drift_const;   // alpha0
  Eigen::MatrixXd drift_linear;  // Z00^T, acting on the state
  Eigen::MatrixXd quantum_feed;  // Z10^T (informational; must vanish for pure
                                 // classical simulation)
  Eigen::MatrixXd diffusion;     // C, infinitesimal covariance
  std::vector<ClassicalJump> jumps;
};

/// Classical reduction of a hybrid generator. Atoms keep the compensation
/// decision made on the full hybrid norm; atoms with zero classical part
/// drop out.
ClassicalSDEModel classical_sde_from_params(const GeneratorParams& params);

/// Initial condition: point mass when deterministic, else N(mean, cov).
struct InitialSampler {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  bool deterministic = true;
};

struct TrajectoryEnsemble {
  uint64_t seed = 0;
  int n_paths = 0;
  double dt = 0.0;
  int dim = 0;                      // recorded coordinates per time
  std::vector<double> times;        // recorded instants, ascending
  std::vector<double> samples;      // [path][time][coord], row-major

  double at(int path, int time_idx, int coord) const {
    return samples[(static_cast<size_t>(path) * times.size() + time_idx) * dim + coord];
  }
};

/// Euler-Maruyama between exactly placed compound-Poisson jump events.
/// Paths are independent Philox substreams keyed by path index, so the
/// ensemble is bit-identical for any worker count.
TrajectoryEnsemble simulate_classical(const ClassicalSDEModel& model,
                                      const InitialSampler& x0, double horizon,
                                      double dt, int n_paths, uint64_t seed,
                                      std::vector<double> record_times = {},
                                      bool parallel = true);

/// Gaussian-hybrid surrogate: for nu = 0 the full hybrid dynamics is the
/// linear Gaussian system dY = (Z^T Y + alpha) dt + noise with infinitesimal
/// covariance A; classical coordinates are recorded. Rejects nu != 0.
TrajectoryEnsemble simulate_hybrid_gaussian(const GeneratorParams& params,
                                            const HybridGaussianState& state0,
                                            double horizon, double dt,
                                            int n_paths, uint64_t seed,
                                            std::vector<double> record_times = {},
                                            bool parallel = true);

struct EmpiricalCharFn {
  std::complex<double> value;
  double std_error = 0.0;  // jackknife standard error of the mean
};

/// (1/n) sum_paths exp(i sum_j k_j . X(t_j)) over recorded times.
EmpiricalCharFn empirical_charfn(const TrajectoryEnsemble& ensemble,
                                 const std::vector<double>& times,
                                 const std::vector<Eigen::VectorXd>& kvecs);

struct MomentSummary {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Eigen::VectorXd mean_se;  // standard error per coordinate
  Eigen::VectorXd var_se;   // standard error of the diagonal variances
};

MomentSummary ensemble_moments(const TrajectoryEnsemble& ensemble, double time);

void write_ensemble_csv(const TrajectoryEnsemble& ensemble, const std::string& path,
                        const std::vector<std::string>& header_extra = {});

}  // namespace quasifree
