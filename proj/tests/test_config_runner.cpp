#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qla/config.hpp"
#include "qla/errors.hpp"
#include "qla/runner.hpp"

using namespace qla;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = "model: ou-drift\ntheta_star: 1.0\nschedule: [50, 100, 200, 400]\nreps: 2000\nseed: 1\n";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qla-test-" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("parse_config") {
  TEST_CASE("minimal config resolves every default") {
    const ExperimentConfig c = parse_config_text(kMinimal);
    CHECK(c.model.kind == ModelKind::ou_drift);
    CHECK(c.schedule.size() == 4);
    CHECK(c.reps == 2000);
    CHECK(c.profile.rho1.has_value());
    const auto j = c.to_json();
    for (const char* key : {"model", "schedule", "a_matrix", "profile", "prior", "probes", "reps", "seed", "threads",
                            "out_dir", "strict", "dump_paths", "optimizer", "quadrature"})
      CHECK(j.contains(key));
    CHECK(j["profile"]["rho1"].get<double>() == doctest::Approx(0.125));
    CHECK(j["model"]["lower"][0].get<double>() == doctest::Approx(0.1));
  }

  TEST_CASE("invariant violations name the key and line") {
    try {
      parse_config_text(std::string(kMinimal) + "profile:\n  rho2: 1.2\n");
      FAIL("accepted rho2 = 1.2");
    } catch (const ConfigError& e) {
      CHECK(e.key() == "profile");
      CHECK(e.line() == 7);
    }
    try {
      parse_config_text(std::string(kMinimal) + "colour: blue\n");
      FAIL("accepted an unknown key");
    } catch (const ConfigError& e) {
      CHECK(e.key() == "colour");
      CHECK(e.line() == 6);
    }
    CHECK_THROWS_AS(parse_config_text("model: ou-drift\nschedule: [50]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("model: ou-drift\nschedule: [50, 100]\nreps: 50\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("model: ou-drift\nschedule: [50, 100]\nprobes: [nope]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("model: ou-drift\nschedule: [50, 100]\nprobes: [{name: pld_tail, K: 2}]\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config_text("model: ou-drift\nschedule: [50, 100]\nreps: many\n"), ConfigError);
  }

  TEST_CASE("hash depends only on resolved values") {
    const ExperimentConfig a = parse_config_text(kMinimal);
    const ExperimentConfig b = parse_config_text(
        "# same experiment, spelled differently\nseed: 1\nreps: 2000\nschedule:\n  - 50\n  - 100.0\n  - 200\n  - 4e2\n"
        "model: ou-drift\ntheta_star: [1]\nprofile: {alpha: 0.2, rho2: 0.5}\nprior: {kind: uniform}\n");
    CHECK(a.hash() == b.hash());
    ExperimentConfig c = a;
    c.seed = 99;
    c.threads = 8;
    c.out_dir = "elsewhere";
    CHECK(c.hash() == a.hash());
    c.reps = 2001;
    CHECK(c.hash() != a.hash());
  }

  TEST_CASE("output directory default comes from the environment") {
    setenv(kOutDirEnv, "/tmp/qla-env-out", 1);
    CHECK(parse_config_text(kMinimal).out_dir == "/tmp/qla-env-out");
    unsetenv(kOutDirEnv);
    CHECK(parse_config_text(kMinimal).out_dir == "qla-out");
  }

  TEST_CASE("probe settings and computed defaults") {
    const auto c = parse_config_text(std::string(kMinimal) +
                                     "probes:\n  - identifiability\n  - {name: qbe_integrability, reps: 200}\n");
    REQUIRE(c.probes.size() == 2);
    CHECK(c.probes[1].q.value() == 2.0);
    CHECK(c.probes[1].delta.value() == doctest::Approx(0.5));
    CHECK(c.to_json()["probes"][1]["reps"] == 200);
  }
}

TEST_SUITE("runner") {
  TEST_CASE("empty probe list: exit 0 and empty summary") {
    ExperimentConfig c = parse_config_text(std::string(kMinimal) + "probes: []\n");
    c.out_dir = scratch("empty").string();
    std::ostringstream log;
    CHECK(run(c, log) == 0);
    const auto s = nlohmann::json::parse(slurp(fs::path(c.out_dir) / "summary.json"));
    CHECK(s["reports"].empty());
    CHECK_FALSE(fs::exists(fs::path(c.out_dir) / kPartialMarker));
    std::ostringstream out;
    CHECK(report(c.out_dir, out) == 0);
  }

  TEST_CASE("identical config and seed: byte-identical outputs, also across thread counts") {
    const std::string text = "model: vol-contrast\ntheta_star: 0\nschedule: [100, 400]\nreps: 1000\nseed: 5\n"
                             "probes: [efficiency_residual, {name: pld_tail, r_grid: [2, 4]}]\n";
    ExperimentConfig a = parse_config_text(text), b = parse_config_text(text);
    a.out_dir = scratch("det-a").string();
    b.out_dir = scratch("det-b").string();
    b.threads = 4;
    std::ostringstream log;
    CHECK(run(a, log) == run(b, log));
    int files = 0;
    for (const auto& e : fs::directory_iterator(a.out_dir)) {
      const auto name = e.path().filename();
      if (name == "resolved_config.json") continue;
      ++files;
      CHECK(slurp(e.path()) == slurp(fs::path(b.out_dir) / name));
    }
    CHECK(files >= 6);
  }

  TEST_CASE("a failing probe propagates exit 1 to run and report") {
    ExperimentConfig c = parse_config_text(
        "model: vol-contrast\ntheta_star: 0\nschedule: [100, 400]\nreps: 1000\n"
        "probes: [{name: efficiency_residual, threshold: 1e-9}, identifiability]\n");
    c.out_dir = scratch("fail").string();
    std::ostringstream log;
    CHECK(run(c, log) == 1);
    std::ostringstream out;
    CHECK(report(c.out_dir, out) == 1);
    CHECK(out.str().find("efficiency_residual") != std::string::npos);
    CHECK(out.str().find("FAIL") != std::string::npos);
  }

  TEST_CASE("probe errors are recorded as failures") {
    ExperimentConfig c = parse_config_text(
        "model: vol-contrast\ntheta_star: 0\nschedule: [100, 400]\nreps: 100\nprobes: [pld_tail]\n");
    c.out_dir = scratch("err").string();
    std::ostringstream log;
    CHECK(run(c, log) == 1);
    const auto s = nlohmann::json::parse(slurp(fs::path(c.out_dir) / "summary.json"));
    CHECK(s["reports"][0].contains("error"));
  }

  TEST_CASE("report: missing directory and incomplete runs") {
    std::ostringstream out;
    CHECK_THROWS_WITH_AS(report("/nonexistent/qla-run", out), doctest::Contains("/nonexistent/qla-run"), Error);
    const fs::path dir = scratch("partial");
    fs::create_directories(dir);
    std::ofstream(dir / kPartialMarker) << "run started\n";
    CHECK(report(dir, out) == 2);
    CHECK(out.str().find("run started") != std::string::npos);
  }

  TEST_CASE("dump_paths writes one path table per horizon") {
    ExperimentConfig c = parse_config_text(std::string(kMinimal) + "dump_paths: true\nprobes: []\n");
    c.out_dir = scratch("paths").string();
    std::ostringstream log;
    run(c, log);
    CHECK(fs::exists(fs::path(c.out_dir) / "paths" / "T-400_rep-0.csv"));
  }

  TEST_CASE("exit statuses and file stems") {
    CHECK(exit_status({}) == 0);
    CHECK(exit_status({Verdict::pass, Verdict::inconclusive}) == 2);
    CHECK(exit_status({Verdict::inconclusive, Verdict::fail}) == 1);
    CHECK(report_stem("pld_tail[T=400]") == "pld_tail.T-400");
    CHECK(report_stem("condition_norms(iii)[p=16]") == "condition_norms.iii.p-16");
  }
}
