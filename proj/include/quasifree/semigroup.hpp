#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "quasifree/generator.hpp"

namespace quasifree {

using CharFn = std::function<std::complex<double>(const Eigen::VectorXd&)>;

/// S_t = exp(Z t) at a fixed time.
struct FlowOperator {
  double t = 0.0;
  Eigen::MatrixXd matrix;
};

/// Requires t >= 0 (the semigroup is not a group).
FlowOperator flow(const GeneratorParams& params, double t);

struct QuadratureSpec {
  int order = 16;       // Gauss-Legendre order per panel
  double tol = 1e-10;   // target error on the integral, scaled by (1 + t)
  int max_levels = 12;  // dyadic subdivision limit
};

struct QuadratureError : std::runtime_error {
  double achieved;
  QuadratureError(const std::string& what, double achieved_)
      : std::runtime_error(what), achieved(achieved_) {}
};

/// Precomputed quadrature plan for integral(0..t) psi(S_tau xi) dtau at one
/// fixed t: flow matrices at the nodes are cached per subdivision level, so
/// batch evaluation over many xi reuses them. Thread-safe; results do not
/// depend on evaluation order.
class NoisePlan {
 public:
  NoisePlan(const GeneratorParams& params, double t, QuadratureSpec spec = {});

  /// integral(0..t) psi(S_tau xi) dtau, adaptively refined.
  std::complex<double> log_noise(const Eigen::VectorXd& xi) const;
  /// f_t(xi) = exp(log_noise(xi)).
  std::complex<double> noise(const Eigen::VectorXd& xi) const;

  double t() const { return t_; }
  const Eigen::MatrixXd& flow_matrix() const { return flow_t_; }

 private:
  struct Level {
    std::vector<double> weights;
    std::vector<Eigen::MatrixXd> flows;
  };
  const Level& level(int idx) const;

  GeneratorParams params_;
  QuadratureSpec spec_;
  double t_;
  Eigen::MatrixXd flow_t_;
  mutable std::vector<std::unique_ptr<Level>> levels_;
  mutable std::mutex mutex_;
};

/// The (f_t, S_t) pair packaged behind a parameter set. Immutable and
/// shareable; every method is pure.
class NoiseFunctionEvaluator {
 public:
  explicit NoiseFunctionEvaluator(GeneratorParams params, QuadratureSpec spec = {})
      : params_(std::move(params)), spec_(spec) {}

  const GeneratorParams& params() const { return params_; }
  const QuadratureSpec& quadrature() const { return spec_; }

  NoisePlan plan(double t) const { return NoisePlan(params_, t, spec_); }
  std::complex<double> noise_function(const Eigen::VectorXd& xi, double t) const {
    return plan(t).noise(xi);
  }

 private:
  GeneratorParams params_;
  QuadratureSpec spec_;
};

/// chi_t(xi) = f_t(xi) chi_0(S_t xi).
std::complex<double> evolve_charfn(const NoiseFunctionEvaluator& ev,
                                   const CharFn& chi0, const Eigen::VectorXd& xi,
                                   double t);

/// First and second moments transported by the semigroup. For nu = 0 this is
/// the full evolved (Gaussian) state; with jump atoms present the state is
/// not Gaussian and moments_only is set.
struct PropagatedGaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  bool moments_only = false;
};

/// Integrates dm/dt = Z^T m + alpha_eff, dV/dt = Z^T V + V Z + A_eff with a
/// step-doubling RK4 (alpha_eff absorbs uncompensated atoms, A_eff adds
/// sum w eta eta^T).
PropagatedGaussian gaussian_propagate(const GeneratorParams& params,
                                      const Eigen::VectorXd& mean0,
                                      const Eigen::MatrixXd& cov0, double t,
                                      double tol = 1e-10);

struct SemigroupResiduals {
  double flow_residual = 0.0;     // max-norm of S_{t+s} - S_t S_s
  double cocycle_residual = 0.0;  // |f_{t+s}(xi) - f_s(xi) f_t(S_s xi)|
};

SemigroupResiduals check_semigroup_law(const NoiseFunctionEvaluator& ev,
                                       const Eigen::VectorXd& xi, double t,
                                       double s);

/// E[exp(i sum_j k_j . X(t_j))] for classical-sector probes k_j at strictly
/// ascending times, by backward recursion through the quasi-free action.
std::complex<double> multi_time_charfn(const NoiseFunctionEvaluator& ev,
                                       const CharFn& chi0,
                                       const std::vector<double>& times,
                                       const std::vector<Eigen::VectorXd>& kvecs);

}  // namespace quasifree
