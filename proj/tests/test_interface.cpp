#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "quasifree/config.hpp"
#include "quasifree/io_util.hpp"

using namespace quasifree;
namespace fs = std::filesystem;

namespace {

const char* kDampedModeJson = R"json({
  "dims": {"n": 1, "s": 0},
  "z": [[-0.5, 0.0], [0.0, -0.5]],
  "a": [[0.5, 0.0], [0.0, 0.5]],
  "alpha": [0.0, 0.0],
  "initial_state": {"mean": [1.0, 0.0], "cov": [[0.5, 0.0], [0.0, 0.5]]},
  "run": {"times": [0.5, 1.0], "seed": 7}
})json";

const char* kNoDiffusionJson = R"json({
  "dims": {"n": 1, "s": 0},
  "z": [[-0.5, 0.0], [0.0, -0.5]],
  "a": [[0.0, 0.0], [0.0, 0.0]],
  "initial_state": {"mean": [0.0, 0.0], "cov": [[0.5, 0.0], [0.0, 0.5]]}
})json";

const char* kOuJson = R"json({
  "dims": {"n": 0, "s": 1},
  "z": [[-1.0]],
  "a": [[2.0]],
  "initial_state": {"mean": [0.0], "cov": [[1.0]]},
  "run": {"times": [1.0], "seed": 3, "n_paths": 2000, "horizon": 1.0,
          "probes": [{"times": [0.5, 1.0], "kvecs": [[0.5], [1.0]]}]}
})json";

std::string write_temp(const std::string& name, const std::string& body) {
  const std::string path = (fs::temp_directory_path() / name).string();
  std::ofstream os(path);
  os << body;
  return path;
}

#ifdef QFSIM_PATH
int run_cli(const std::string& args) {
  const std::string cmd = std::string(QFSIM_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}
#endif

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("well-formed model parses to validated params and state") {
    const ModelConfig cfg = parse_config(kDampedModeJson);
    CHECK(cfg.params.space.n == 1);
    CHECK(cfg.params.space.s == 0);
    CHECK(cfg.params.z(0, 0) == -0.5);
    REQUIRE(cfg.initial_gaussian.has_value());
    CHECK(cfg.initial_gaussian->mean[0] == 1.0);
    CHECK(cfg.run.seed == 7);
    CHECK(cfg.run.times.size() == 2);
    CHECK(cfg.config_hash.size() == 16);
  }

  SUBCASE("missing field gives an addressed diagnostic") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"dims": {"n": 1}})"),
                         doctest::Contains("dims.s"), ConfigError);
  }

  SUBCASE("wrong matrix shape gives an addressed diagnostic") {
    CHECK_THROWS_WITH_AS(
        parse_config(R"({"dims": {"n": 1, "s": 0}, "z": [[1, 0]], "a": [[0,0],[0,0]]})"),
        doctest::Contains("z"), ConfigError);
  }

  SUBCASE("truncated file is a parse error") {
    CHECK_THROWS_WITH_AS(parse_config("{\"dims\": {"), doctest::Contains("parse"),
                         ConfigError);
  }

  SUBCASE("ill-typed field is a config error, not a generic failure") {
    CHECK_THROWS_AS(
        parse_config(R"({"dims": {"n": 0, "s": 1}, "z": [[0]], "a": [[0]],
                         "run": {"seed": "abc"}})"),
        ConfigError);
  }

  SUBCASE("levy atoms with compensation modes") {
    const char* json = R"({
      "dims": {"n": 0, "s": 1}, "z": [[0.0]], "a": [[0.0]],
      "levy_atoms": [{"eta": [0.5], "weight": 1.0, "compensate": "never"},
                      {"eta": [2.0], "weight": 0.5}]
    })";
    const ModelConfig cfg = parse_config(json);
    REQUIRE(cfg.params.exponent.nu.atoms.size() == 2);
    CHECK(cfg.params.exponent.nu.atoms[0].comp == Compensation::Never);
    CHECK(cfg.params.exponent.nu.atoms[1].comp == Compensation::Auto);
  }

  SUBCASE("probes parse into correlation requests") {
    const ModelConfig cfg = parse_config(kOuJson);
    REQUIRE(cfg.run.probes.size() == 1);
    CHECK(cfg.run.probes[0].times.size() == 2);
    CHECK(cfg.run.probes[0].kvecs[1][0] == 1.0);
  }

  SUBCASE("hash is stable and content-sensitive") {
    CHECK(parse_config(kOuJson).config_hash == parse_config(kOuJson).config_hash);
    CHECK(parse_config(kOuJson).config_hash != parse_config(kDampedModeJson).config_hash);
  }
}

TEST_CASE("format_g17 round trip") {
  for (double x : {0.1, 1.0 / 3.0, 2.718281828459045, 1e-300, -7.25}) {
    const std::string s = format_g17(x);
    CHECK(std::stod(s) == x);
  }
}

#ifdef QFSIM_PATH

TEST_CASE("cli exit codes and outputs") {
  const std::string out = (fs::temp_directory_path() / "qfsim_test_out").string();
  fs::remove_all(out);

  SUBCASE("validate: damped mode is exit 0 with a certificate") {
    const std::string cfg = write_temp("qf_damped.json", kDampedModeJson);
    CHECK(run_cli("validate --config " + cfg + " --out " + out) == 0);
    std::ifstream is(out + "/certificate.txt");
    REQUIRE(is.good());
    std::string text((std::istreambuf_iterator<char>(is)),
                     std::istreambuf_iterator<char>());
    CHECK(text.find("valid: true") != std::string::npos);
    CHECK(text.find("quantum_dissipationless: false") != std::string::npos);
  }

  SUBCASE("validate: dissipative drift without diffusion is exit 1") {
    const std::string cfg = write_temp("qf_nodiff.json", kNoDiffusionJson);
    CHECK(run_cli("validate --config " + cfg + " --out " + out) == 1);
    std::ifstream is(out + "/certificate.txt");
    std::string text((std::istreambuf_iterator<char>(is)),
                     std::istreambuf_iterator<char>());
    CHECK(text.find("valid: false") != std::string::npos);
    CHECK(text.find("negative eigenvalue") != std::string::npos);
  }

  SUBCASE("malformed config is exit 2") {
    const std::string cfg = write_temp("qf_broken.json", "{\"dims\": {");
    CHECK(run_cli("validate --config " + cfg + " --out " + out) == 2);
  }

  SUBCASE("growing flow produces a certificate warning") {
    const char* grow = R"({"dims": {"n": 0, "s": 1}, "z": [[0.3]], "a": [[0.1]]})";
    const std::string cfg = write_temp("qf_grow.json", grow);
    CHECK(run_cli("validate --config " + cfg + " --out " + out) == 0);
    std::ifstream is(out + "/certificate.txt");
    std::string text((std::istreambuf_iterator<char>(is)),
                     std::istreambuf_iterator<char>());
    CHECK(text.find("grows without bound") != std::string::npos);
  }

  SUBCASE("other commands refuse invalid models without --force") {
    const std::string cfg = write_temp("qf_nodiff.json", kNoDiffusionJson);
    CHECK(run_cli("evolve --config " + cfg + " --out " + out) == 1);
  }

  SUBCASE("evolve + correlate + sample run and write their files") {
    const std::string cfg = write_temp("qf_ou.json", kOuJson);
    CHECK(run_cli("evolve --config " + cfg + " --out " + out) == 0);
    CHECK(fs::exists(out + "/moments.csv"));
    CHECK(fs::exists(out + "/charfn.csv"));
    // a stateless config emits the noise function itself
    const char* stateless = R"({"dims": {"n": 0, "s": 1}, "z": [[-1.0]], "a": [[2.0]]})";
    const std::string cfg_f = write_temp("qf_stateless.json", stateless);
    CHECK(run_cli("evolve --config " + cfg_f + " --out " + out + "_f") == 0);
    std::ifstream is(out + "_f/charfn.csv");
    std::string text((std::istreambuf_iterator<char>(is)),
                     std::istreambuf_iterator<char>());
    CHECK(text.find("noise function") != std::string::npos);
    fs::remove_all(out + "_f");
    CHECK(run_cli("correlate --config " + cfg + " --out " + out) == 0);
    CHECK(fs::exists(out + "/correlations.csv"));
    CHECK(run_cli("sample --config " + cfg + " --out " + out) == 0);
    CHECK(fs::exists(out + "/trajectories.csv"));
    CHECK(fs::exists(out + "/summary.txt"));
  }

  SUBCASE("byte-for-byte reproducibility from (config, seed)") {
    const std::string cfg = write_temp("qf_ou.json", kOuJson);
    const std::string out2 = out + "_repeat";
    fs::remove_all(out2);
    REQUIRE(run_cli("sample --config " + cfg + " --out " + out) == 0);
    REQUIRE(run_cli("sample --config " + cfg + " --out " + out2) == 0);
    CHECK(read_file(out + "/trajectories.csv") == read_file(out2 + "/trajectories.csv"));
    CHECK(read_file(out + "/summary.txt") == read_file(out2 + "/summary.txt"));
    fs::remove_all(out2);
  }

  SUBCASE("wigner command writes a grid for d = 2") {
    const std::string cfg = write_temp("qf_damped.json", kDampedModeJson);
    CHECK(run_cli("wigner --config " + cfg + " --out " + out +
                  " --grid 33 --extent 8 --time 0.5") == 0);
    CHECK(fs::exists(out + "/wigner.csv"));
    CHECK(fs::exists(out + "/charfn_grid.csv"));
  }

  SUBCASE("a written charfn grid feeds back in as an initial state") {
    const std::string cfg = write_temp("qf_damped.json", kDampedModeJson);
    REQUIRE(run_cli("wigner --config " + cfg + " --out " + out +
                    " --grid 65 --extent 8") == 0);
    const std::string grid_path = out + "/charfn_grid.csv";
    std::string body(kDampedModeJson);
    const auto pos = body.find("\"initial_state\"");
    REQUIRE(pos != std::string::npos);
    const auto end = body.find("},", pos);
    body = body.substr(0, pos) +
           "\"initial_state\": {\"charfn_csv\": \"" + grid_path + "\"" +
           body.substr(end);
    const std::string cfg2 = write_temp("qf_grid_init.json", body);
    CHECK(run_cli("wigner --config " + cfg2 + " --out " + out +
                  "_grid --grid 33 --extent 6 --time 0.2") == 0);
    CHECK(fs::exists(out + "_grid/wigner.csv"));
    fs::remove_all(out + "_grid");
  }

  fs::remove_all(out);
}

#endif  // QFSIM_PATH
