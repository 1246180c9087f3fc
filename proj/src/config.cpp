#include "quasifree/config.hpp"

#include <json.hpp>

#include "quasifree/io_util.hpp"

namespace quasifree {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config field '" + where + "': " + what);
}

const json& require(const json& j, const std::string& key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) fail(where + "." + key, "missing");
  return *it;
}

double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<int>();
}

Eigen::VectorXd as_vector(const json& j, const std::string& where, int expect = -1) {
  if (!j.is_array()) fail(where, "expected an array of numbers");
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i)
    v[i] = as_number(j[i], where + "[" + std::to_string(i) + "]");
  if (expect >= 0 && v.size() != expect)
    fail(where, "expected length " + std::to_string(expect) + ", got " +
                    std::to_string(v.size()));
  return v;
}

Eigen::MatrixXd as_matrix(const json& j, const std::string& where, int rows, int cols) {
  if (!j.is_array()) fail(where, "expected an array of row arrays");
  if (static_cast<int>(j.size()) != rows)
    fail(where, "expected " + std::to_string(rows) + " rows, got " +
                    std::to_string(j.size()));
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const Eigen::VectorXd row =
        as_vector(j[r], where + "[" + std::to_string(r) + "]", cols);
    m.row(r) = row.transpose();
  }
  return m;
}

}  // namespace

namespace {
ModelConfig parse_config_impl(const std::string& json_text);
}  // namespace

ModelConfig parse_config(const std::string& json_text) {
  try {
    return parse_config_impl(json_text);
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

namespace {

ModelConfig parse_config_impl(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("JSON parse error: ") + e.what());
  }

  const json& jd = require(root, "dims", "");
  const int n = as_int(require(jd, "n", "dims"), "dims.n");
  const int s = as_int(require(jd, "s", "dims"), "dims.s");
  PhaseSpace space;
  try {
    space = make_phase_space(n, s);
  } catch (const std::exception& e) {
    fail("dims", e.what());
  }
  const int d = space.d;

  const Eigen::MatrixXd z = as_matrix(require(root, "z", ""), "z", d, d);
  const Eigen::MatrixXd a = as_matrix(require(root, "a", ""), "a", d, d);
  const Eigen::VectorXd alpha =
      root.contains("alpha") ? as_vector(root["alpha"], "alpha", d)
                             : Eigen::VectorXd::Zero(d);

  LevyMeasure nu;
  if (root.contains("levy_atoms")) {
    const json& atoms = root["levy_atoms"];
    if (!atoms.is_array()) fail("levy_atoms", "expected an array");
    for (size_t i = 0; i < atoms.size(); ++i) {
      const std::string where = "levy_atoms[" + std::to_string(i) + "]";
      LevyAtom atom;
      atom.eta = as_vector(require(atoms[i], "eta", where), where + ".eta", d);
      atom.weight = as_number(require(atoms[i], "weight", where), where + ".weight");
      if (atoms[i].contains("compensate")) {
        const std::string mode = atoms[i]["compensate"].get<std::string>();
        if (mode == "auto") atom.comp = Compensation::Auto;
        else if (mode == "always") atom.comp = Compensation::Always;
        else if (mode == "never") atom.comp = Compensation::Never;
        else fail(where + ".compensate", "expected auto|always|never");
      }
      nu.atoms.push_back(std::move(atom));
    }
  }

  ModelConfig cfg;
  try {
    cfg.params = make_generator_params(space, z, alpha, a, std::move(nu));
  } catch (const std::exception& e) {
    fail("(model)", e.what());
  }

  if (root.contains("initial_state")) {
    const json& js = root["initial_state"];
    if (js.contains("charfn_csv")) {
      cfg.initial_charfn_csv = js["charfn_csv"].get<std::string>();
    } else {
      const Eigen::VectorXd mean =
          as_vector(require(js, "mean", "initial_state"), "initial_state.mean", d);
      const Eigen::MatrixXd cov =
          as_matrix(require(js, "cov", "initial_state"), "initial_state.cov", d, d);
      try {
        cfg.initial_gaussian = make_gaussian_state(space, mean, cov);
      } catch (const std::exception& e) {
        fail("initial_state", e.what());
      }
    }
  }

  if (root.contains("run")) {
    const json& jr = root["run"];
    RunParams& run = cfg.run;
    if (jr.contains("times")) {
      run.times.clear();
      for (size_t i = 0; i < jr["times"].size(); ++i)
        run.times.push_back(as_number(jr["times"][i], "run.times"));
    }
    if (jr.contains("quad_tol")) run.quad_tol = as_number(jr["quad_tol"], "run.quad_tol");
    if (jr.contains("positivity_tol"))
      run.positivity_tol = as_number(jr["positivity_tol"], "run.positivity_tol");
    if (jr.contains("seed")) run.seed = jr["seed"].get<uint64_t>();
    if (jr.contains("horizon")) run.horizon = as_number(jr["horizon"], "run.horizon");
    if (jr.contains("dt")) run.dt = as_number(jr["dt"], "run.dt");
    if (jr.contains("n_paths")) run.n_paths = as_int(jr["n_paths"], "run.n_paths");
    if (jr.contains("xi_samples")) {
      for (size_t i = 0; i < jr["xi_samples"].size(); ++i)
        run.xi_samples.push_back(
            as_vector(jr["xi_samples"][i], "run.xi_samples", d));
    }
    if (jr.contains("grid")) {
      GridSpec grid;
      const json& jg = jr["grid"];
      const Eigen::VectorXd ext =
          as_vector(require(jg, "extent", "run.grid"), "run.grid.extent");
      for (int i = 0; i < ext.size(); ++i) grid.extent.push_back(ext[i]);
      const json& jp = require(jg, "points", "run.grid");
      for (size_t i = 0; i < jp.size(); ++i)
        grid.points.push_back(as_int(jp[i], "run.grid.points"));
      try {
        grid.validate();
      } catch (const std::exception& e) {
        fail("run.grid", e.what());
      }
      run.grid = std::move(grid);
    }
    if (jr.contains("probes")) {
      for (size_t i = 0; i < jr["probes"].size(); ++i) {
        const std::string where = "run.probes[" + std::to_string(i) + "]";
        const json& jp = jr["probes"][i];
        CorrelationProbe probe;
        const json& jt = require(jp, "times", where);
        for (size_t k = 0; k < jt.size(); ++k)
          probe.times.push_back(as_number(jt[k], where + ".times"));
        const json& jk = require(jp, "kvecs", where);
        for (size_t k = 0; k < jk.size(); ++k)
          probe.kvecs.push_back(as_vector(jk[k], where + ".kvecs", space.s));
        if (probe.times.size() != probe.kvecs.size())
          fail(where, "times and kvecs must have the same length");
        run.probes.push_back(std::move(probe));
      }
    }
  }

  cfg.config_hash = fnv1a64_hex(json_text);
  return cfg;
}

}  // namespace

ModelConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

}  // namespace quasifree
