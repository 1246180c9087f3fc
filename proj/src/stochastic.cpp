#include "quasifree/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "quasifree/io_util.hpp"
#include "quasifree/numerics.hpp"
#include "quasifree/rng.hpp"

namespace quasifree {

namespace {

std::vector<double> normalize_record_times(std::vector<double> times, double horizon) {
  if (times.empty()) times.push_back(horizon);
  std::sort(times.begin(), times.end());
  if (times.front() < 0.0 || times.back() > horizon + 1e-12)
    throw std::invalid_argument("record times must lie in [0, horizon]");
  return times;
}

struct LinearSDE {
  Eigen::VectorXd drift_const;   // already net of the jump compensator
  Eigen::MatrixXd drift_linear;
  Eigen::MatrixXd noise_factor;  // L with L L^T = infinitesimal covariance
  int noise_rank = 0;
  std::vector<ClassicalJump> jumps;  // empty for the hybrid surrogate
  double jump_rate = 0.0;
};

/// One path. Draw order: initial condition, then chronologically one
/// exponential per scheduled jump, `noise_rank` normals per Euler substep
/// and one uniform per executed jump. Fully determined by the stream.
/// The substep loop is kept allocation-free.
void run_path(const LinearSDE& sde, const InitialSampler& x0,
              const Eigen::MatrixXd& x0_factor, double horizon, double dt,
              const std::vector<double>& record, PhiloxStream& rng,
              double* out) {
  const int dim = static_cast<int>(sde.drift_const.size());
  Eigen::VectorXd x = x0.mean;
  Eigen::VectorXd gauss(sde.noise_rank);
  Eigen::VectorXd dx(dim);
  if (!x0.deterministic) {
    Eigen::VectorXd g(x0_factor.cols());
    for (int i = 0; i < g.size(); ++i) g[i] = rng.normal();
    x.noalias() += x0_factor * g;
  }

  double t = 0.0;
  double next_jump = sde.jump_rate > 0.0 ? rng.exponential(sde.jump_rate)
                                         : std::numeric_limits<double>::infinity();
  size_t rec_idx = 0;

  const auto diffuse_to = [&](double target) {
    while (t < target - 1e-15) {
      const double remaining = target - t;
      const int substeps = std::max(1, static_cast<int>(std::ceil(remaining / dt - 1e-12)));
      const double h = remaining / substeps;
      const double sqrth = std::sqrt(h);
      for (int step = 0; step < substeps; ++step) {
        dx = sde.drift_const;
        dx.noalias() += sde.drift_linear * x;
        dx *= h;
        if (sde.noise_rank > 0) {
          for (int i = 0; i < sde.noise_rank; ++i) gauss[i] = sqrth * rng.normal();
          dx.noalias() += sde.noise_factor * gauss;
        }
        x += dx;
      }
      t = target;
    }
    t = target;
  };

  while (rec_idx < record.size()) {
    const double target = std::min(record[rec_idx], next_jump);
    if (target > horizon + 1e-12) break;
    diffuse_to(target);
    if (target == next_jump && next_jump <= record[rec_idx]) {
      // categorical atom choice by cumulative rate
      const double u = rng.uniform() * sde.jump_rate;
      double csum = 0.0;
      for (const auto& jump : sde.jumps) {
        csum += jump.weight;
        if (u <= csum || &jump == &sde.jumps.back()) {
          x.tail(jump.y.size()) += jump.y;  // jumps act on classical coords
          break;
        }
      }
      next_jump += rng.exponential(sde.jump_rate);
    }
    while (rec_idx < record.size() && record[rec_idx] <= t + 1e-15) {
      for (int c = 0; c < dim; ++c) out[rec_idx * dim + c] = x[c];
      ++rec_idx;
    }
  }
}

TrajectoryEnsemble run_ensemble(const LinearSDE& sde, const InitialSampler& x0,
                                double horizon, double dt, int n_paths,
                                uint64_t seed, std::vector<double> record_times,
                                bool parallel) {
  if (dt <= 0.0) throw std::invalid_argument("simulate: dt must be positive");
  if (n_paths < 1) throw std::invalid_argument("simulate: n_paths >= 1 required");
  const auto record = normalize_record_times(std::move(record_times), horizon);

  Eigen::MatrixXd x0_factor;
  if (!x0.deterministic) x0_factor = psd_factor(x0.cov);

  TrajectoryEnsemble ens;
  ens.seed = seed;
  ens.n_paths = n_paths;
  ens.dt = dt;
  ens.dim = static_cast<int>(sde.drift_const.size());
  ens.times = record;
  ens.samples.resize(static_cast<size_t>(n_paths) * record.size() * ens.dim);

#pragma omp parallel for schedule(static) if (parallel)
  for (int p = 0; p < n_paths; ++p) {
    PhiloxStream rng(seed, static_cast<uint64_t>(p));
    run_path(sde, x0, x0_factor, horizon, dt, record, rng,
             ens.samples.data() + static_cast<size_t>(p) * record.size() * ens.dim);
  }
  return ens;
}

}  // namespace

ClassicalSDEModel classical_sde_from_params(const GeneratorParams& params) {
  const Blocks blocks = derive_blocks(params);
  ClassicalSDEModel m;
  m.drift_const = blocks.view.alpha0;
  m.drift_linear = blocks.view.z00.transpose();
  m.quantum_feed = blocks.view.z10.transpose();
  m.diffusion = blocks.derived.c;
  for (const auto& atom : params.exponent.nu.atoms) {
    const Eigen::VectorXd y = params.space.classical_part(atom.eta);
    if (y.norm() <= 1e-12) continue;  // purely quantum atoms do not move x
    m.jumps.push_back({y, atom.weight,
                       atom.compensated(params.exponent.nu.cutoff_radius)});
  }
  return m;
}

TrajectoryEnsemble simulate_classical(const ClassicalSDEModel& model,
                                      const InitialSampler& x0, double horizon,
                                      double dt, int n_paths, uint64_t seed,
                                      std::vector<double> record_times,
                                      bool parallel) {
  const auto s = model.drift_const.size();
  if (model.quantum_feed.size() != 0 &&
      model.quantum_feed.cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument(
        "simulate_classical: quantum feed Z10 != 0; the classical component is "
        "not autonomous (use simulate_hybrid_gaussian)");

  LinearSDE sde;
  sde.drift_const = model.drift_const;
  sde.drift_linear = model.drift_linear;
  Eigen::MatrixXd factor = psd_factor(model.diffusion);
  // Drop numerically-zero columns so noiseless models draw no normals.
  int rank = 0;
  for (int c = 0; c < factor.cols(); ++c)
    if (factor.col(c).norm() > 1e-14) ++rank;
  sde.noise_factor.resize(s, rank);
  for (int c = 0, k = 0; c < factor.cols(); ++c)
    if (factor.col(c).norm() > 1e-14) sde.noise_factor.col(k++) = factor.col(c);
  sde.noise_rank = rank;
  sde.jumps = model.jumps;
  for (const auto& jump : model.jumps) {
    sde.jump_rate += jump.weight;
    if (jump.compensated) sde.drift_const -= jump.weight * jump.y;
  }
  return run_ensemble(sde, x0, horizon, dt, n_paths, seed, std::move(record_times),
                      parallel);
}

TrajectoryEnsemble simulate_hybrid_gaussian(const GeneratorParams& params,
                                            const HybridGaussianState& state0,
                                            double horizon, double dt,
                                            int n_paths, uint64_t seed,
                                            std::vector<double> record_times,
                                            bool parallel) {
  if (!params.exponent.nu.empty())
    throw std::invalid_argument(
        "simulate_hybrid_gaussian: jump atoms present; the Gaussian surrogate "
        "only covers nu = 0");

  LinearSDE sde;
  sde.drift_const = params.exponent.alpha;
  sde.drift_linear = params.z.transpose();
  Eigen::MatrixXd factor = psd_factor(params.exponent.a_matrix);
  int rank = 0;
  for (int c = 0; c < factor.cols(); ++c)
    if (factor.col(c).norm() > 1e-14) ++rank;
  sde.noise_factor.resize(params.space.d, rank);
  for (int c = 0, k = 0; c < factor.cols(); ++c)
    if (factor.col(c).norm() > 1e-14) sde.noise_factor.col(k++) = factor.col(c);
  sde.noise_rank = rank;

  InitialSampler x0;
  x0.mean = state0.mean;
  x0.cov = state0.cov;
  x0.deterministic = state0.cov.cwiseAbs().maxCoeff() == 0.0;

  TrajectoryEnsemble full = run_ensemble(sde, x0, horizon, dt, n_paths, seed,
                                         std::move(record_times), parallel);

  // Keep only the classical coordinates.
  const int s = params.space.s;
  const int off = 2 * params.space.n;
  TrajectoryEnsemble ens;
  ens.seed = full.seed;
  ens.n_paths = full.n_paths;
  ens.dt = full.dt;
  ens.dim = s;
  ens.times = full.times;
  ens.samples.resize(static_cast<size_t>(ens.n_paths) * ens.times.size() * s);
  for (int p = 0; p < ens.n_paths; ++p)
    for (size_t ti = 0; ti < ens.times.size(); ++ti)
      for (int c = 0; c < s; ++c)
        ens.samples[(static_cast<size_t>(p) * ens.times.size() + ti) * s + c] =
            full.at(p, static_cast<int>(ti), off + c);
  return ens;
}

namespace {

size_t find_time_index(const TrajectoryEnsemble& ens, double t) {
  for (size_t i = 0; i < ens.times.size(); ++i)
    if (std::abs(ens.times[i] - t) <= 1e-12) return i;
  throw std::invalid_argument("ensemble does not record time " + std::to_string(t));
}

}  // namespace

EmpiricalCharFn empirical_charfn(const TrajectoryEnsemble& ensemble,
                                 const std::vector<double>& times,
                                 const std::vector<Eigen::VectorXd>& kvecs) {
  if (times.size() != kvecs.size() || times.empty())
    throw std::invalid_argument("empirical_charfn: need matching times/kvecs");
  std::vector<size_t> tidx;
  for (double t : times) tidx.push_back(find_time_index(ensemble, t));
  for (const auto& k : kvecs)
    if (k.size() != ensemble.dim)
      throw std::invalid_argument("empirical_charfn: kvec dimension mismatch");

  // Per-path terms first, then a fixed-order reduction, so the value does not
  // depend on the thread count.
  const int n = ensemble.n_paths;
  std::vector<std::complex<double>> terms(n);
#pragma omp parallel for schedule(static)
  for (int p = 0; p < n; ++p) {
    double phase = 0.0;
    for (size_t j = 0; j < times.size(); ++j)
      for (int c = 0; c < ensemble.dim; ++c)
        phase += kvecs[j][c] * ensemble.at(p, static_cast<int>(tidx[j]), c);
    terms[p] = std::polar(1.0, phase);
  }

  std::complex<double> sum{0.0, 0.0};
  for (const auto& v : terms) sum += v;
  const std::complex<double> mean = sum / double(n);

  double sq = 0.0;
  for (const auto& v : terms) sq += std::norm(v - mean);
  EmpiricalCharFn out;
  out.value = mean;
  out.std_error = n > 1 ? std::sqrt(sq / (double(n) * double(n - 1))) : 0.0;
  return out;
}

MomentSummary ensemble_moments(const TrajectoryEnsemble& ensemble, double time) {
  const size_t ti = find_time_index(ensemble, time);
  const int n = ensemble.n_paths;
  const int dim = ensemble.dim;

  MomentSummary m;
  m.mean = Eigen::VectorXd::Zero(dim);
  for (int p = 0; p < n; ++p)
    for (int c = 0; c < dim; ++c) m.mean[c] += ensemble.at(p, static_cast<int>(ti), c);
  m.mean /= double(n);

  m.cov = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd m4 = Eigen::VectorXd::Zero(dim);
  for (int p = 0; p < n; ++p) {
    Eigen::VectorXd x(dim);
    for (int c = 0; c < dim; ++c) x[c] = ensemble.at(p, static_cast<int>(ti), c) - m.mean[c];
    m.cov += x * x.transpose();
    m4 += x.array().pow(4).matrix();
  }
  m.cov /= double(n - 1);
  m4 /= double(n);

  m.mean_se = (m.cov.diagonal() / double(n)).cwiseSqrt();
  m.var_se.resize(dim);
  for (int c = 0; c < dim; ++c) {
    const double v = m.cov(c, c);
    m.var_se[c] = std::sqrt(std::max(0.0, m4[c] - v * v) / double(n));
  }
  return m;
}

void write_ensemble_csv(const TrajectoryEnsemble& ensemble, const std::string& path,
                        const std::vector<std::string>& header_extra) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "# trajectory_ensemble seed=" << ensemble.seed << " n_paths=" << ensemble.n_paths
     << " dt=" << format_g17(ensemble.dt) << "\n";
  for (const auto& line : header_extra) os << "# " << line << "\n";
  os << "path_id,time";
  for (int c = 0; c < ensemble.dim; ++c) os << ",x_" << c;
  os << "\n";
  for (int p = 0; p < ensemble.n_paths; ++p)
    for (size_t ti = 0; ti < ensemble.times.size(); ++ti) {
      os << p << "," << format_g17(ensemble.times[ti]);
      for (int c = 0; c < ensemble.dim; ++c)
        os << "," << format_g17(ensemble.at(p, static_cast<int>(ti), c));
      os << "\n";
    }
}

}  // namespace quasifree
