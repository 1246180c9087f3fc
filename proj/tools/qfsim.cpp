#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "quasifree/config.hpp"
#include "quasifree/io_util.hpp"
#include "quasifree/kernels.hpp"
#include "quasifree/numerics.hpp"
#include "quasifree/semigroup.hpp"
#include "quasifree/states.hpp"
#include "quasifree/stochastic.hpp"
#include "quasifree/version.hpp"

namespace fs = std::filesystem;
using namespace quasifree;

namespace {

constexpr int kExitInvalidModel = 1;
constexpr int kExitBadConfig = 2;

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  double tol = -1.0;  // <0: take from config
  int64_t seed = -1;
  std::vector<double> times;
  int grid_points = 0;
  double grid_extent = 0.0;
  bool force = false;
  double horizon = -1.0;
  double dt = -1.0;
  int n_paths = 0;
  double time_at = 0.0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "model configuration (JSON)")->required();
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--tol", o.tol, "positivity/quadrature tolerance override");
  cmd->add_option("--seed", o.seed, "RNG seed override");
  cmd->add_option("--times", o.times, "time list override");
  cmd->add_option("--grid", o.grid_points, "grid points per axis (odd)");
  cmd->add_option("--extent", o.grid_extent, "grid half-width per axis");
  cmd->add_flag("--force", o.force, "run even if the model fails validation");
}

std::vector<std::string> file_header(const ModelConfig& cfg, const std::string& cmd) {
  return {std::string("quasifree v") + kVersion, "command: " + cmd,
          "config_hash: " + cfg.config_hash, "seed: " + std::to_string(cfg.run.seed)};
}

ModelConfig load_or_exit(const CommonOpts& o) {
  ModelConfig cfg = load_config(o.config_path);  // ConfigError handled in main
  if (o.tol > 0.0) {
    cfg.run.quad_tol = o.tol;
    cfg.run.positivity_tol = o.tol;
  }
  if (o.seed >= 0) cfg.run.seed = static_cast<uint64_t>(o.seed);
  if (!o.times.empty()) cfg.run.times = o.times;
  if (o.horizon > 0.0) cfg.run.horizon = o.horizon;
  if (o.dt > 0.0) cfg.run.dt = o.dt;
  if (o.n_paths > 0) cfg.run.n_paths = o.n_paths;
  if (o.grid_points > 0) {
    GridSpec g;
    const double ext = o.grid_extent > 0.0 ? o.grid_extent : 8.0;
    for (int axis = 0; axis < cfg.params.space.d; ++axis) {
      g.points.push_back(o.grid_points);
      g.extent.push_back(ext);
    }
    g.validate();
    cfg.run.grid = g;
  }
  return cfg;
}

struct ValidationResult {
  PositivityReport positivity;
  LevyValidation levy;
  StructureFlags flags;
  std::optional<InformationFlowReport> info_flow;
  double abscissa = 0.0;
  bool valid = false;
};

ValidationResult run_validation(const ModelConfig& cfg) {
  ValidationResult r;
  r.positivity = validate_positivity(cfg.params, cfg.run.positivity_tol);
  r.levy = validate_levy(cfg.params.exponent.nu);
  r.flags = classify(cfg.params);
  r.abscissa = spectral_abscissa(cfg.params.z);
  r.valid = r.positivity.valid && r.levy.valid;
  if (r.valid) r.info_flow = check_no_information_flow(cfg.params, cfg.run.positivity_tol);
  return r;
}

void write_certificate(const ModelConfig& cfg, const ValidationResult& r,
                       const std::string& path) {
  std::ofstream os(path);
  os << "quasifree validation certificate\n";
  os << "version: " << kVersion << "\n";
  os << "config_hash: " << cfg.config_hash << "\n";
  os << "valid: " << (r.valid ? "true" : "false") << "\n";
  os << "tol: " << format_g17(cfg.run.positivity_tol) << "\n";
  os << "min_eig_A_plus_iB: " << format_g17(r.positivity.min_eig_a_plus_ib) << "\n";
  os << "min_eig_A_minus_iB: " << format_g17(r.positivity.min_eig_a_minus_ib) << "\n";
  os << "min_eig_GEC_block: " << format_g17(r.positivity.min_eig_gec) << "\n";
  os << "positivity_forms_agree: " << (r.positivity.forms_agree ? "true" : "false") << "\n";
  if (!r.positivity.valid) os << "positivity_violation: " << r.positivity.message << "\n";
  os << "levy_valid: " << (r.levy.valid ? "true" : "false") << "\n";
  if (!r.levy.valid)
    os << "levy_violation: " << r.levy.message << " (atom " << r.levy.atom_index << ")\n";
  os << "translation_invariant: " << (r.flags.translation_invariant ? "true" : "false") << "\n";
  os << "quantum_dissipationless: " << (r.flags.quantum_dissipationless ? "true" : "false") << "\n";
  os << "classical_dissipationless: " << (r.flags.classical_dissipationless ? "true" : "false") << "\n";
  os << "autonomous_quantum_reduction: "
     << (r.flags.autonomous_quantum_reduction ? "true" : "false") << "\n";
  os << "autonomous_classical_reduction: "
     << (r.flags.autonomous_classical_reduction ? "true" : "false") << "\n";
  if (r.info_flow) {
    os << "information_flow: " << r.info_flow->message << "\n";
    os << "E_frobenius_norm: " << format_g17(r.info_flow->e_norm) << "\n";
    if (!r.info_flow->forced_zero_terms.empty()) {
      os << "forced_zero_interactions:";
      for (const auto& t : r.info_flow->forced_zero_terms) os << " " << t;
      os << "\n";
    }
  }
  os << "spectral_abscissa_Z: " << format_g17(r.abscissa) << "\n";
  if (r.abscissa > 1e-12)
    os << "warning: exp(Z t) grows without bound; long-horizon moments may overflow\n";
}

/// Validation gate shared by every command except `validate`.
int gate(const ModelConfig& cfg, const CommonOpts& o, ValidationResult* out) {
  ValidationResult r = run_validation(cfg);
  if (!r.valid && !o.force) {
    std::cerr << "model failed validation ("
              << (r.positivity.valid ? r.levy.message : r.positivity.message)
              << "); use --force to run anyway\n";
    return kExitInvalidModel;
  }
  if (out) *out = r;
  return 0;
}

CharFn initial_charfn(const ModelConfig& cfg) {
  if (cfg.initial_gaussian) return gaussian_charfn_callable(*cfg.initial_gaussian);
  if (cfg.initial_charfn_csv)
    return charfn_from_grid(read_charfn_grid_csv(*cfg.initial_charfn_csv));
  throw std::runtime_error("this command needs an initial_state in the config");
}

std::vector<Eigen::VectorXd> xi_sample_points(const ModelConfig& cfg) {
  if (!cfg.run.xi_samples.empty()) return cfg.run.xi_samples;
  return admissibility_sample(cfg.params.space, 16, 2.0);
}

int cmd_validate(const CommonOpts& o) {
  const ModelConfig cfg = load_or_exit(o);
  const ValidationResult r = run_validation(cfg);
  fs::create_directories(o.out_dir);
  write_certificate(cfg, r, o.out_dir + "/certificate.txt");
  std::cout << (r.valid ? "VALID" : "INVALID") << " (certificate: " << o.out_dir
            << "/certificate.txt)\n";
  return r.valid ? 0 : kExitInvalidModel;
}

int cmd_evolve(const CommonOpts& o) {
  const ModelConfig cfg = load_or_exit(o);
  if (int rc = gate(cfg, o, nullptr)) return rc;
  fs::create_directories(o.out_dir);
  const auto header = file_header(cfg, "evolve");

  NoiseFunctionEvaluator ev(cfg.params, {16, cfg.run.quad_tol, 12});
  // Without an initial state the evolved quantity is the noise function
  // itself: the scalar amplitude carried by each evolved Weyl operator.
  const bool bare_noise = !cfg.initial_gaussian && !cfg.initial_charfn_csv;
  const CharFn chi0 = bare_noise
                          ? CharFn([](const Eigen::VectorXd&) {
                              return std::complex<double>(1.0, 0.0);
                            })
                          : initial_charfn(cfg);

  // Moment trajectories (Gaussian initial state only).
  if (cfg.initial_gaussian) {
    std::ofstream os(o.out_dir + "/moments.csv");
    for (const auto& line : header) os << "# " << line << "\n";
    const int d = cfg.params.space.d;
    os << "t";
    for (int i = 0; i < d; ++i) os << ",mean_" << i;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) os << ",cov_" << i << "_" << j;
    os << ",moments_only\n";
    for (double t : cfg.run.times) {
      const PropagatedGaussian pg = gaussian_propagate(
          cfg.params, cfg.initial_gaussian->mean, cfg.initial_gaussian->cov, t);
      os << format_g17(t);
      for (int i = 0; i < d; ++i) os << "," << format_g17(pg.mean[i]);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) os << "," << format_g17(pg.cov(i, j));
      os << "," << (pg.moments_only ? 1 : 0) << "\n";
    }
  }

  // Sampled characteristic function (or bare noise function).
  {
    std::ofstream os(o.out_dir + "/charfn.csv");
    for (const auto& line : header) os << "# " << line << "\n";
    if (bare_noise) os << "# values: noise function f_t (no initial state configured)\n";
    for (int i = 0; i < cfg.params.space.d; ++i) os << "xi_" << i << ",";
    os << "t,re,im\n";
    for (double t : cfg.run.times) {
      const NoisePlan plan = ev.plan(t);
      for (const auto& xi : xi_sample_points(cfg)) {
        const std::complex<double> v = plan.noise(xi) * chi0(plan.flow_matrix() * xi);
        for (int i = 0; i < xi.size(); ++i) os << format_g17(xi[i]) << ",";
        os << format_g17(t) << "," << format_g17(v.real()) << ","
           << format_g17(v.imag()) << "\n";
      }
    }
  }

  // Optional Wigner grids.
  if (cfg.run.grid) {
    if (cfg.params.space.d > 4) {
      std::cerr << "wigner grids are capped at d <= 4\n";
      return kExitInvalidModel;
    }
    for (double t : cfg.run.times) {
      const NoisePlan plan = ev.plan(t);  // shared across the grid points
      const CharFn chi_t = [&](const Eigen::VectorXd& xi) {
        return plan.noise(xi) * chi0(plan.flow_matrix() * xi);
      };
      const CharFnGrid grid = fill_charfn_grid(*cfg.run.grid, chi_t);
      const WignerGrid wig = wigner_from_charfn(grid);
      write_wigner_grid_csv(wig, o.out_dir + "/wigner_t" + format_g17(t) + ".csv", header);
    }
  }
  std::cout << "evolve outputs written to " << o.out_dir << "\n";
  return 0;
}

int cmd_correlate(const CommonOpts& o) {
  const ModelConfig cfg = load_or_exit(o);
  if (int rc = gate(cfg, o, nullptr)) return rc;
  if (cfg.run.probes.empty()) {
    std::cerr << "correlate: no run.probes in the config\n";
    return kExitBadConfig;
  }
  fs::create_directories(o.out_dir);

  NoiseFunctionEvaluator ev(cfg.params, {16, cfg.run.quad_tol, 12});
  const CharFn chi0 = initial_charfn(cfg);

  std::ofstream os(o.out_dir + "/correlations.csv");
  for (const auto& line : file_header(cfg, "correlate")) os << "# " << line << "\n";
  os << "times,kvecs,re,im\n";
  for (const auto& probe : cfg.run.probes) {
    const std::complex<double> v = multi_time_charfn(ev, chi0, probe.times, probe.kvecs);
    for (size_t j = 0; j < probe.times.size(); ++j)
      os << (j ? ";" : "") << format_g17(probe.times[j]);
    os << ",";
    for (size_t j = 0; j < probe.kvecs.size(); ++j) {
      if (j) os << ";";
      for (int c = 0; c < probe.kvecs[j].size(); ++c)
        os << (c ? " " : "") << format_g17(probe.kvecs[j][c]);
    }
    os << "," << format_g17(v.real()) << "," << format_g17(v.imag()) << "\n";
  }
  std::cout << "correlations written to " << o.out_dir << "/correlations.csv\n";
  return 0;
}

int cmd_sample(const CommonOpts& o) {
  const ModelConfig cfg = load_or_exit(o);
  if (int rc = gate(cfg, o, nullptr)) return rc;
  if (!cfg.initial_gaussian) {
    std::cerr << "sample: a Gaussian initial_state is required\n";
    return kExitBadConfig;
  }
  fs::create_directories(o.out_dir);

  const PhaseSpace& space = cfg.params.space;
  const Blocks blocks = derive_blocks(cfg.params);
  const bool has_atoms = !cfg.params.exponent.nu.empty();
  const bool has_feed =
      blocks.view.z10.size() > 0 && blocks.view.z10.cwiseAbs().maxCoeff() > 1e-12;

  const double horizon = cfg.run.horizon;
  const double dt = cfg.run.dt > 0.0 ? cfg.run.dt : 1e-3 * horizon;
  std::vector<double> record;
  for (double t : cfg.run.times)
    if (t >= 0.0 && t <= horizon) record.push_back(t);
  if (record.empty()) record.push_back(horizon);

  TrajectoryEnsemble ens;
  if (space.n == 0 || (has_atoms && !has_feed)) {
    // Classical component is autonomous: simulate its reduced dynamics.
    const ClassicalSDEModel model = classical_sde_from_params(cfg.params);
    const GaussianMarginals marg = marginals(*cfg.initial_gaussian);
    InitialSampler x0{marg.classical_mean, marg.classical_cov,
                      marg.classical_cov.cwiseAbs().maxCoeff() == 0.0};
    ens = simulate_classical(model, x0, horizon, dt, cfg.run.n_paths, cfg.run.seed, record);
  } else if (!has_atoms) {
    ens = simulate_hybrid_gaussian(cfg.params, *cfg.initial_gaussian, horizon, dt,
                                   cfg.run.n_paths, cfg.run.seed, record);
  } else {
    std::cerr << "sample: path-wise simulation with quantum back-action (Z10 != 0) "
                 "and jump atoms is a stochastic unraveling, which this engine "
                 "does not do; only moment/characteristic-function comparisons "
                 "cover that regime\n";
    return kExitInvalidModel;
  }

  write_ensemble_csv(ens, o.out_dir + "/trajectories.csv", file_header(cfg, "sample"));

  // Empirical vs analytic moments at each recorded time.
  std::ofstream os(o.out_dir + "/summary.txt");
  for (const auto& line : file_header(cfg, "sample")) os << "# " << line << "\n";
  os << "time,coord,empirical_mean,analytic_mean,mean_se,empirical_var,analytic_var,var_se\n";
  for (double t : ens.times) {
    const MomentSummary mom = ensemble_moments(ens, t);
    const PropagatedGaussian pg = gaussian_propagate(
        cfg.params, cfg.initial_gaussian->mean, cfg.initial_gaussian->cov, t);
    for (int c = 0; c < ens.dim; ++c) {
      const int full = 2 * space.n + c;
      os << format_g17(t) << "," << c << "," << format_g17(mom.mean[c]) << ","
         << format_g17(pg.mean[full]) << "," << format_g17(mom.mean_se[c]) << ","
         << format_g17(mom.cov(c, c)) << "," << format_g17(pg.cov(full, full)) << ","
         << format_g17(mom.var_se[c]) << "\n";
    }
  }
  std::cout << "ensemble written to " << o.out_dir << " (" << ens.n_paths
            << " paths, seed " << ens.seed << ")\n";
  return 0;
}

int cmd_wigner(const CommonOpts& o) {
  const ModelConfig cfg = load_or_exit(o);
  if (int rc = gate(cfg, o, nullptr)) return rc;
  if (!cfg.run.grid) {
    std::cerr << "wigner: no grid given (config run.grid or --grid/--extent)\n";
    return kExitBadConfig;
  }
  if (cfg.params.space.d > 4) {
    std::cerr << "wigner grids are capped at d <= 4\n";
    return kExitInvalidModel;
  }
  fs::create_directories(o.out_dir);
  const auto header = file_header(cfg, "wigner");
  const double t = o.time_at;

  CharFnGrid grid;
  if (cfg.initial_gaussian && cfg.params.exponent.nu.empty()) {
    // Gaussian state stays Gaussian: evolve moments, then sample exactly.
    const PropagatedGaussian pg = gaussian_propagate(
        cfg.params, cfg.initial_gaussian->mean, cfg.initial_gaussian->cov, t);
    const HybridGaussianState evolved =
        make_gaussian_state(cfg.params.space, pg.mean, pg.cov);
    grid = fill_charfn_grid(*cfg.run.grid, gaussian_charfn_callable(evolved));
  } else {
    NoiseFunctionEvaluator ev(cfg.params, {16, cfg.run.quad_tol, 12});
    const CharFn chi0 = initial_charfn(cfg);
    const NoisePlan plan = ev.plan(t);
    grid = fill_charfn_grid(*cfg.run.grid, [&](const Eigen::VectorXd& xi) {
      return plan.noise(xi) * chi0(plan.flow_matrix() * xi);
    });
  }
  write_charfn_grid_csv(grid, o.out_dir + "/charfn_grid.csv", header);
  const WignerGrid wig = wigner_from_charfn(grid);
  for (const auto& w : wig.warnings) std::cerr << "warning: " << w << "\n";
  write_wigner_grid_csv(wig, o.out_dir + "/wigner.csv", header);
  std::cout << "wigner grid written to " << o.out_dir << "/wigner.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quasi-free hybrid quantum-classical dynamics engine"};
  app.require_subcommand(1);

  CommonOpts o;
  CLI::App* validate = app.add_subcommand("validate", "check model validity, emit a certificate");
  CLI::App* evolve = app.add_subcommand("evolve", "moments, characteristic function and Wigner grids over time");
  CLI::App* correlate = app.add_subcommand("correlate", "multi-time classical characteristic values");
  CLI::App* sample = app.add_subcommand("sample", "Monte Carlo trajectory ensemble with analytic comparison");
  CLI::App* wigner = app.add_subcommand("wigner", "Wigner grid of the (evolved) state");
  for (CLI::App* cmd : {validate, evolve, correlate, sample, wigner}) add_common(cmd, o);
  sample->add_option("--horizon", o.horizon, "simulation horizon");
  sample->add_option("--dt", o.dt, "Euler step (default 1e-3 * horizon)");
  sample->add_option("--paths", o.n_paths, "number of Monte Carlo paths");
  wigner->add_option("--time", o.time_at, "evolve the state to this time first");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(o);
    if (evolve->parsed()) return cmd_evolve(o);
    if (correlate->parsed()) return cmd_correlate(o);
    if (sample->parsed()) return cmd_sample(o);
    if (wigner->parsed()) return cmd_wigner(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitBadConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidModel;
  }
  return 0;
}
