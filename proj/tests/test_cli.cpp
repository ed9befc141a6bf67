#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <unistd.h>

#include "fsde/cli/commands.hpp"
#include "fsde/cli/config.hpp"
#include "fsde/csv.hpp"
#include "fsde/mlf.hpp"

using namespace fsde;
using namespace fsde::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json base_config() {
  return json::parse(R"({
    "schema_version": 1,
    "model": {"alpha": "fdt", "hurst": 0.75, "potential": {"kind": "zero"}, "x0": 0.0},
    "grid": {"dt": 0.01, "n_steps": 200},
    "ensemble": {"n_paths": 16, "seed": 42}
  })");
}

std::string pointer_of(const json& cfg) {
  try {
    (void)parse_config(cfg.dump());
  } catch (const ConfigError& e) {
    return e.pointer();
  }
  return "<accepted>";
}

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("fsde_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  fs::path write(const std::string& name, const json& cfg) const {
    const auto p = dir / name;
    std::ofstream(p) << cfg.dump(2);
    return p;
  }
};

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "fsde_lab");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config: fdt keyword and defaults") {
  const auto c = parse_config(base_config().dump());
  CHECK(c.alpha == 0.5);
  CHECK(c.alpha_is_fdt);
  CHECK(c.hurst == 0.75);
  CHECK(c.seed == 42);
  CHECK(c.n_paths == 16);
  CHECK(c.method == Method::volterra);
  CHECK(c.model().fdt);
  CHECK(c.grid() == TimeGrid(0.01, 200));
  auto j = base_config();
  j["model"]["x0"] = {{"mean", 1.0}, {"sd", 0.5}};
  j["model"]["potential"] = {{"kind", "clipped_double_well"}, {"params", {{"a", 1}, {"b", 2}, {"clip_radius", 3}}}};
  j["method"] = "picard";
  const auto d = parse_config(j.dump());
  CHECK(d.x0_sd == 0.5);
  CHECK(d.potential.build().kind() == Potential::Kind::clipped_double_well);
  CHECK(d.method == Method::picard);
  CHECK(json::parse(d.model_json())["x0"]["sd"] == 0.5);
}

TEST_CASE("config: validation errors carry JSON pointers") {
  auto j = base_config();
  j["model"]["alpha"] = 0.2;
  CHECK(pointer_of(j) == "/model/alpha");
  j["model"]["alpha"] = 1.0;
  CHECK(pointer_of(j) == "/model/alpha");
  j["model"]["alpha"] = "star";
  CHECK(pointer_of(j) == "/model/alpha");

  j = base_config();
  j["ensemble"].erase("seed");
  CHECK(pointer_of(j) == "/ensemble/seed");

  j = base_config();
  j["model"]["colour"] = "red";
  CHECK(pointer_of(j) == "/model/colour");
  j = base_config();
  j["extra"] = 1;
  CHECK(pointer_of(j) == "/extra");

  j = base_config();
  j["model"]["hurst"] = 0.5;
  CHECK(pointer_of(j) == "/model/hurst");
  j = base_config();
  j["grid"]["dt"] = -0.1;
  CHECK(pointer_of(j) == "/grid/dt");
  j = base_config();
  j["ensemble"]["n_paths"] = 1;
  CHECK(pointer_of(j) == "/ensemble/n_paths");
  j = base_config();
  j["ensemble"]["seed"] = -3;
  CHECK(pointer_of(j) == "/ensemble/seed");
  j = base_config();
  j["schema_version"] = 2;
  CHECK(pointer_of(j) == "/schema_version");
  j = base_config();
  j["method"] = "euler";
  CHECK(pointer_of(j) == "/method");
  j["method"] = "exact-linear";
  CHECK(pointer_of(j) == "/method");
  j = base_config();
  j["model"]["potential"] = {{"kind", "linear"}, {"params", {{"k", 0}}}};
  CHECK(pointer_of(j) == "/model/potential/params/k");
  j = base_config();
  j["embedding"] = {{"masses", {1.0, -0.3}}};
  CHECK(pointer_of(j) == "/embedding/masses/1");
  j = base_config();
  j["outputs"] = {{"prefix", "a/b"}};
  CHECK(pointer_of(j) == "/outputs/prefix");
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
}

TEST_CASE("csv round trip keeps every bit") {
  Scratch s;
  const std::vector<double> a{1.0 / 3.0, -0.0, 1e-300, 4.9e-324, 6.02214076e23, -2.5};
  const std::vector<double> b{0.1, 0.2, 0.30000000000000004, 1e300, -1e-10, 7.0};
  const std::vector<std::string> names{"a", "b"};
  const std::vector<std::vector<double>> cols{a, b};
  const auto file = s.dir / "sub" / "t.csv";
  write_columns_csv(file, names, cols);
  CHECK(slurp(file).rfind("# fsde_lab csv v1\n", 0) == 0);
  std::vector<std::string> back_names;
  const auto back = read_columns_csv(file, &back_names);
  CHECK(back_names == names);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(std::memcmp(&back[0][i], &a[i], sizeof(double)) == 0);
    CHECK(std::memcmp(&back[1][i], &b[i], sizeof(double)) == 0);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(fnv1a("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
  const std::vector<std::vector<double>> ragged{{1.0}, {1.0, 2.0}};
  CHECK_THROWS(write_columns_csv(s.dir / "r.csv", names, ragged));
}

TEST_CASE("exit codes for usage errors") {
  Scratch s;
  const auto cfg = s.write("c.json", base_config());
  CHECK(invoke({}).code == exit_usage);
  CHECK(invoke({"simulate"}).code == exit_usage);
  CHECK(invoke({"--config", cfg.string(), "simulate", "--frobnicate"}).code == exit_usage);
  CHECK(invoke({"--config", (s.dir / "missing.json").string(), "simulate"}).code == exit_usage);
  CHECK(invoke({"--config", cfg.string(), "verify"}).code == exit_usage);
  auto bad = base_config();
  bad["model"]["alpha"] = 0.2;
  const auto r = invoke({"--config", s.write("bad.json", bad).string(), "simulate"});
  CHECK(r.code == exit_usage);
  CHECK(r.err.find("/model/alpha") != std::string::npos);
  // verify linear on a zero potential is a configuration error
  CHECK(invoke({"--config", cfg.string(), "--out", s.dir.string(), "verify", "linear"}).code == exit_usage);
  CHECK(invoke({"--help"}).code == exit_pass);
}

TEST_CASE("numerical failures exit with code 3") {
  Scratch s;
  auto j = base_config();
  j["model"]["potential"] = {{"kind", "linear"}, {"params", {{"k", 1e8}}}};
  j["grid"] = {{"dt", 1.0}, {"n_steps", 300}};
  const auto r = invoke({"--config", s.write("stiff.json", j).string(), "--out", s.dir.string(), "simulate"});
  CHECK(r.code == exit_numerical);
  CHECK(r.err.find("paths failed") != std::string::npos);
}

TEST_CASE("ml eval writes a table") {
  Scratch s;
  auto j = base_config();
  j["ml"] = {{"alpha", 0.5}, {"z", {0.0, -1.0, -10.0}}};
  const auto r = invoke({"--config", s.write("ml.json", j).string(), "--out", s.dir.string(), "ml", "eval"});
  REQUIRE(r.code == exit_pass);
  const auto cols = read_columns_csv(s.dir / "run_ml.csv", nullptr);
  CHECK(cols[1][1] == doctest::Approx(std::exp(1.0) * std::erfc(1.0)).epsilon(1e-12));
  CHECK(cols[1][2] == doctest::Approx(std::exp(100.0) * std::erfc(10.0)).epsilon(1e-10));
  CHECK(json::parse(r.out)["values"].size() == 3);
}

TEST_CASE("simulate is reproducible across worker counts and honours the seed") {
  Scratch s;
  auto j = base_config();
  j["model"]["potential"] = {{"kind", "linear"}, {"params", {{"k", 1.0}}}};
  j["ensemble"]["keep_paths"] = 2;
  j["outputs"] = {{"prefix", "sim"}};
  const auto cfg = s.write("sim.json", j).string();
  const auto d1 = s.dir / "w1", d3 = s.dir / "w3", d7 = s.dir / "seed7";
  REQUIRE(invoke({"--config", cfg, "--workers", "1", "--out", d1.string(), "simulate"}).code == exit_pass);
  REQUIRE(invoke({"--config", cfg, "--workers", "3", "--out", d3.string(), "simulate"}).code == exit_pass);
  REQUIRE(invoke({"--config", cfg, "--seed-override", "7", "--out", d7.string(), "simulate"}).code == exit_pass);
  CHECK(slurp(d1 / "sim_curves.csv") == slurp(d3 / "sim_curves.csv"));
  CHECK(slurp(d1 / "sim_terminal.csv") == slurp(d3 / "sim_terminal.csv"));
  CHECK(slurp(d1 / "sim_terminal.csv") != slurp(d7 / "sim_terminal.csv"));
  CHECK(fs::exists(d1 / "sim_path_00001.csv"));
  const auto manifest = json::parse(slurp(d1 / "sim_manifest.json"));
  CHECK(manifest["seed"] == 42);
  CHECK(json::parse(slurp(d7 / "sim_manifest.json"))["seed"] == 7);
  CHECK(manifest["files"].size() == 4);
  CHECK(manifest["method"] == "volterra");
}

TEST_CASE("verify subdiff reports the measured exponent") {
  Scratch s;
  auto j = base_config();
  j["grid"] = {{"dt", 0.01}, {"n_steps", 400}};
  j["ensemble"]["n_paths"] = 1500;
  j["verify"] = {{"t_lo", 0.5}, {"t_hi", 4.0}};
  const auto r = invoke({"--config", s.write("sub.json", j).string(), "--out", s.dir.string(), "verify", "subdiff"});
  CHECK(r.code == exit_pass);
  const auto summary = json::parse(slurp(s.dir / "run_verify_subdiff.json"));
  CHECK(summary["schema_version"] == config_schema_version);
  CHECK(summary["pass"] == true);
  CHECK(summary["expected_exponent"].get<double>() == doctest::Approx(0.5));
  CHECK(std::fabs(summary["measured_exponent"].get<double>() - 0.5) <= 0.05);
  CHECK(summary["claims"][0]["band"] == 0.05);
  CHECK(json::parse(r.out) == summary);
}

TEST_CASE("verify linear away from the FDT flags the variance mismatch") {
  Scratch s;
  auto j = base_config();
  j["model"] = {{"alpha", 0.9}, {"hurst", 0.75}, {"potential", {{"kind", "linear"}, {"params", {{"k", 1.0}}}}},
                {"x0", 0.0}};
  j["method"] = "exact-linear";
  j["grid"] = {{"dt", 0.05}, {"n_steps", 600}};
  j["ensemble"]["n_paths"] = 2000;
  const auto r = invoke({"--config", s.write("lin.json", j).string(), "--out", s.dir.string(), "verify", "linear"});
  const auto summary = json::parse(slurp(s.dir / "run_verify_linear.json"));
  CHECK(summary["gibbs_variance_mismatch"] == true);
  CHECK(summary["gaussian_pass"] == true);
  CHECK(summary["fdt"] == false);
  CHECK(summary["sigma_limit"].get<double>() < 0.5);
  CHECK(r.code == (summary["pass"] == true ? exit_pass : exit_statistical_failure));
  CHECK(fs::exists(s.dir / "run_covariance.csv"));
}

TEST_CASE("remaining subcommands emit parseable artifacts") {
  Scratch s;
  auto j = base_config();
  j["model"]["potential"] = {{"kind", "linear"}, {"params", {{"k", 1.0}}}};
  j["embedding"] = {{"modes", 12}, {"masses", {1.0}}};
  j["spectrum"] = {{"omega_max", 5.0}, {"points", 50}};
  j["grid"] = {{"dt", 0.05}, {"n_steps", 100}};
  j["ensemble"]["n_paths"] = 64;
  const auto cfg = s.write("all.json", j).string();
  const auto out = s.dir.string();
  CHECK(invoke({"--config", cfg, "--out", out, "fbm", "gen"}).code == exit_pass);
  CHECK(read_columns_csv(s.dir / "run_fbm_00015.csv", nullptr)[1].size() == 101);
  CHECK(invoke({"--config", cfg, "--out", out, "embed", "kernel-fit"}).code == exit_pass);
  const auto modes = ModeSet::from_json(slurp(s.dir / "run_modes.json"));
  CHECK(modes.modes.size() == 12);
  const auto emb = invoke({"--config", cfg, "--out", out, "embed", "simulate"});
  CHECK((emb.code == exit_pass || emb.code == exit_statistical_failure));
  CHECK(json::parse(slurp(s.dir / "run_embed_simulate.json"))["gle"].size() == 1);
  CHECK(invoke({"--config", cfg, "--out", out, "spectrum"}).code == exit_pass);
  CHECK(read_columns_csv(s.dir / "run_spectrum.csv", nullptr)[0].size() == 50);
  const auto cov = invoke({"--config", cfg, "--out", out, "verify", "covariance"});
  CHECK(json::parse(slurp(s.dir / "run_verify_covariance.json"))["covariance"].is_array());
  CHECK((cov.code == exit_pass || cov.code == exit_statistical_failure));
}

TEST_CASE("installed binary maps errors to exit codes") {
  const char* bin = std::getenv("FSDE_LAB_BIN");
  if (!bin) {
    MESSAGE("FSDE_LAB_BIN not set; skipping");
    return;
  }
  const std::string b = std::string("\"") + bin + "\"";
  CHECK(WEXITSTATUS(std::system((b + " --help > /dev/null").c_str())) == 0);
  CHECK(WEXITSTATUS(std::system((b + " simulate 2> /dev/null").c_str())) == 2);
  CHECK(WEXITSTATUS(std::system((b + " --workers 0 simulate 2> /dev/null").c_str())) == 2);
}
