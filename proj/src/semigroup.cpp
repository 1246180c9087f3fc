#include "quasifree/semigroup.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

#include "quasifree/numerics.hpp"

namespace quasifree {

FlowOperator flow(const GeneratorParams& params, double t) {
  if (t < 0.0) throw std::invalid_argument("flow: negative time");
  FlowOperator out;
  out.t = t;
  out.matrix = matrix_exponential(params.z * t);
  if (!out.matrix.allFinite())
    throw std::overflow_error("flow: exp(Z t) overflowed");
  return out;
}

NoisePlan::NoisePlan(const GeneratorParams& params, double t, QuadratureSpec spec)
    : params_(params), spec_(spec), t_(t) {
  if (t < 0.0) throw std::invalid_argument("noise plan: negative time");
  flow_t_ = matrix_exponential(params_.z * t_);
}

const NoisePlan::Level& NoisePlan::level(int idx) const {
  std::lock_guard<std::mutex> lock(mutex_);
  while (static_cast<int>(levels_.size()) <= idx) {
    const int lvl = static_cast<int>(levels_.size());
    auto level = std::make_unique<Level>();
    const auto& rule = gauss_legendre(spec_.order);
    const int panels = 1 << lvl;
    const double h = t_ / panels;
    level->weights.reserve(size_t(panels) * rule.nodes.size());
    level->flows.reserve(size_t(panels) * rule.nodes.size());
    for (int p = 0; p < panels; ++p) {
      for (size_t i = 0; i < rule.nodes.size(); ++i) {
        const double tau = (p + 0.5 * (rule.nodes[i] + 1.0)) * h;
        level->weights.push_back(0.5 * h * rule.weights[i]);
        level->flows.push_back(matrix_exponential(params_.z * tau));
      }
    }
    levels_.push_back(std::move(level));
  }
  return *levels_[idx];
}

std::complex<double> NoisePlan::log_noise(const Eigen::VectorXd& xi) const {
  if (xi.size() != params_.space.d)
    throw std::invalid_argument("noise: xi dimension mismatch");
  if (t_ == 0.0) return {0.0, 0.0};

  const double tol = spec_.tol * (1.0 + t_);
  std::complex<double> prev{0.0, 0.0};
  for (int lvl = 0; lvl <= spec_.max_levels; ++lvl) {
    const Level& lv = level(lvl);
    std::complex<double> acc{0.0, 0.0};
    for (size_t i = 0; i < lv.weights.size(); ++i)
      acc += lv.weights[i] * psi_eval(params_.exponent, lv.flows[i] * xi);
    if (lvl > 0 && std::abs(acc - prev) <= tol) return acc;
    prev = acc;
  }
  throw QuadratureError("noise function quadrature did not converge; last refinement changed the integral by " +
                            std::to_string(std::abs(prev)),
                        std::abs(prev));
}

std::complex<double> NoisePlan::noise(const Eigen::VectorXd& xi) const {
  return std::exp(log_noise(xi));
}

std::complex<double> evolve_charfn(const NoiseFunctionEvaluator& ev,
                                   const CharFn& chi0, const Eigen::VectorXd& xi,
                                   double t) {
  const NoisePlan plan = ev.plan(t);
  return plan.noise(xi) * chi0(plan.flow_matrix() * xi);
}

namespace {

struct MomentState {
  Eigen::VectorXd m;
  Eigen::MatrixXd v;
};

MomentState rk4_run(const Eigen::MatrixXd& zt, const Eigen::VectorXd& alpha_eff,
                    const Eigen::MatrixXd& a_eff, MomentState y, double t,
                    int steps) {
  const double h = t / steps;
  const auto deriv = [&](const MomentState& st) {
    MomentState d;
    d.m = zt * st.m + alpha_eff;
    d.v = zt * st.v + st.v * zt.transpose() + a_eff;
    return d;
  };
  for (int i = 0; i < steps; ++i) {
    const MomentState k1 = deriv(y);
    const MomentState k2 = deriv({y.m + 0.5 * h * k1.m, y.v + 0.5 * h * k1.v});
    const MomentState k3 = deriv({y.m + 0.5 * h * k2.m, y.v + 0.5 * h * k2.v});
    const MomentState k4 = deriv({y.m + h * k3.m, y.v + h * k3.v});
    y.m += (h / 6.0) * (k1.m + 2.0 * k2.m + 2.0 * k3.m + k4.m);
    y.v += (h / 6.0) * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    y.v = 0.5 * (y.v + y.v.transpose()).eval();
    if (!y.m.allFinite() || !y.v.allFinite())
      throw std::runtime_error("gaussian_propagate: non-finite intermediate values");
  }
  return y;
}

}  // namespace

PropagatedGaussian gaussian_propagate(const GeneratorParams& params,
                                      const Eigen::VectorXd& mean0,
                                      const Eigen::MatrixXd& cov0, double t,
                                      double tol) {
  if (t < 0.0) throw std::invalid_argument("gaussian_propagate: negative time");
  const int d = params.space.d;
  if (mean0.size() != d || cov0.rows() != d || cov0.cols() != d)
    throw std::invalid_argument("gaussian_propagate: dimension mismatch");

  // Effective drift and diffusion seen by the first two moments.
  Eigen::VectorXd alpha_eff = params.exponent.alpha;
  Eigen::MatrixXd a_eff = params.exponent.a_matrix;
  for (const auto& atom : params.exponent.nu.atoms) {
    if (!atom.compensated(params.exponent.nu.cutoff_radius))
      alpha_eff += atom.weight * atom.eta;
    a_eff += atom.weight * atom.eta * atom.eta.transpose();
  }

  PropagatedGaussian out;
  out.moments_only = !params.exponent.nu.empty();
  if (t == 0.0) {
    out.mean = mean0;
    out.cov = cov0;
    return out;
  }

  const Eigen::MatrixXd zt = params.z.transpose();
  const double znorm = params.z.cwiseAbs().maxCoeff();
  int steps = std::max(16, static_cast<int>(std::ceil(4.0 * t * znorm)));
  MomentState coarse = rk4_run(zt, alpha_eff, a_eff, {mean0, cov0}, t, steps);
  for (int iter = 0; iter < 24; ++iter) {
    if (steps > (1 << 24))
      throw std::runtime_error("gaussian_propagate: step size underflow");
    const MomentState fine =
        rk4_run(zt, alpha_eff, a_eff, {mean0, cov0}, t, steps * 2);
    const double scale = 1.0 + fine.v.cwiseAbs().maxCoeff() + fine.m.cwiseAbs().maxCoeff();
    const double diff = std::max((fine.m - coarse.m).cwiseAbs().maxCoeff(),
                                 (fine.v - coarse.v).cwiseAbs().maxCoeff());
    coarse = fine;
    steps *= 2;
    if (diff <= tol * scale) break;
  }
  out.mean = coarse.m;
  out.cov = coarse.v;
  return out;
}

SemigroupResiduals check_semigroup_law(const NoiseFunctionEvaluator& ev,
                                       const Eigen::VectorXd& xi, double t,
                                       double s) {
  if (t < 0.0 || s < 0.0) throw std::invalid_argument("check_semigroup_law: negative time");
  const NoisePlan plan_s = ev.plan(s);
  const NoisePlan plan_t = ev.plan(t);
  const NoisePlan plan_ts = ev.plan(t + s);

  SemigroupResiduals res;
  res.flow_residual = (plan_ts.flow_matrix() - plan_t.flow_matrix() * plan_s.flow_matrix())
                          .cwiseAbs()
                          .maxCoeff();
  const std::complex<double> lhs = plan_ts.noise(xi);
  const std::complex<double> rhs = plan_s.noise(xi) * plan_t.noise(plan_s.flow_matrix() * xi);
  res.cocycle_residual = std::abs(lhs - rhs);
  return res;
}

std::complex<double> multi_time_charfn(const NoiseFunctionEvaluator& ev,
                                       const CharFn& chi0,
                                       const std::vector<double>& times,
                                       const std::vector<Eigen::VectorXd>& kvecs) {
  const auto m = times.size();
  if (m == 0 || kvecs.size() != m)
    throw std::invalid_argument("multi_time_charfn: need matching times/kvecs");
  for (size_t j = 0; j < m; ++j) {
    if (times[j] <= 0.0 || (j > 0 && times[j] <= times[j - 1]))
      throw std::invalid_argument("multi_time_charfn: times must be strictly ascending and positive");
    if (kvecs[j].size() != ev.params().space.s)
      throw std::invalid_argument("multi_time_charfn: kvecs must be classical-sector vectors");
  }

  // Backward recursion; the Weyl phases are identically 1 because classical
  // frequencies are symplectically null.
  const PhaseSpace& space = ev.params().space;
  Eigen::VectorXd xi = space.embed_classical(kvecs[m - 1]);
  std::complex<double> acc(1.0, 0.0);
  for (size_t j = m - 1; j > 0; --j) {
    const NoisePlan plan = ev.plan(times[j] - times[j - 1]);
    acc *= plan.noise(xi);
    xi = plan.flow_matrix() * xi;
    xi += space.embed_classical(kvecs[j - 1]);
  }
  const NoisePlan plan = ev.plan(times[0]);
  acc *= plan.noise(xi);
  xi = plan.flow_matrix() * xi;
  return acc * chi0(xi);
}

}  // namespace quasifree
