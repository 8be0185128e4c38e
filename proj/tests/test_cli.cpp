#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fkqho/json_io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FKQHO_CLI_PATH) + " " + args;
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string model(const std::string& name) {
  return std::string(FKQHO_MODELS_DIR) + "/" + name;
}

}  // namespace

TEST_CASE("solve emits the expected bottom eigenvalue") {
  const std::string out = "/tmp/fkqho_solve_test.json";
  REQUIRE(run_cli("solve --model " + model("mehler_1d.json") + " --out " + out +
                  " 2>/dev/null") == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j["solution"]["lambda0"].get<double>() == doctest::Approx(0.5));
  CHECK(j["ground_state"]["P_h_inf"][0][0].get<double>() == doctest::Approx(0.5));

  // Round trip: the embedded model re-solves to byte-identical output.
  const std::string model_copy = "/tmp/fkqho_model_echo.json";
  fkqho::write_file(model_copy, j["model"].dump());
  const std::string out2 = "/tmp/fkqho_solve_test2.json";
  REQUIRE(run_cli("solve --model " + model_copy + " --out " + out2 + " 2>/dev/null") == 0);
  const auto j2 = nlohmann::json::parse(slurp(out2));
  CHECK(j["solution"].dump() == j2["solution"].dump());
}

TEST_CASE("validate fails on the uncontrollable model") {
  CHECK(run_cli("validate --model " + model("uncontrollable_2d.json") +
                " --out /tmp/fkqho_validate.json 2>/dev/null") == 2);
  CHECK(run_cli("validate --model " + model("mehler_1d.json") +
                " --out /tmp/fkqho_validate_ok.json 2>/dev/null") == 0);
}

TEST_CASE("malformed input produces machine-readable errors") {
  const std::string bad = "/tmp/fkqho_bad_model.json";
  fkqho::write_file(bad, "{ not json");
  const std::string err_file = "/tmp/fkqho_err.json";
  CHECK(run_cli("solve --model " + bad + " 2>" + err_file + " >/dev/null") == 1);
  const auto err = nlohmann::json::parse(slurp(err_file));
  CHECK(err.contains("error"));
  CHECK(err.contains("message"));

  // Unknown model keys are rejected.
  fkqho::write_file(bad, R"({"r":1,"A":[[0]],"B":[[1]],"S":[[1]],"extra":2})");
  CHECK(run_cli("solve --model " + bad + " 2>/dev/null >/dev/null") == 1);

  // Seed is mandatory for stochastic commands.
  CHECK(run_cli("simulate --model " + model("mehler_1d.json") +
                " --scheme dmc --N 32 --T 0.1 2>/dev/null >/dev/null") == 1);
}

TEST_CASE("seeded simulate reruns byte-identically") {
  const std::string out1 = "/tmp/fkqho_traj1.csv", out2 = "/tmp/fkqho_traj2.csv";
  const std::string base = "simulate --model " + model("mehler_1d.json") +
                           " --scheme dmc --N 64 --T 0.3 --dt 0.01 --seed 12345 --out ";
  REQUIRE(run_cli(base + out1 + " 2>/dev/null") == 0);
  REQUIRE(run_cli(base + out2 + " 2>/dev/null") == 0);
  const std::string a = slurp(out1), b = slurp(out2);
  CHECK(!a.empty());
  CHECK(a == b);

  // Header advertises the documented columns.
  CHECK(a.rfind("t,mean_0,cov_0_0,lambda0_estimate,jump_count\n", 0) == 0);
}

TEST_CASE("flow, spectrum, mehler and verify subcommands run clean") {
  CHECK(run_cli("flow --model " + model("reversible_1d.json") +
                " --T 3 --steps 30 --mean 1 --cov 0.5 --out /tmp/fkqho_flow.csv"
                " 2>/dev/null") == 0);
  const std::string flow = slurp("/tmp/fkqho_flow.csv");
  CHECK(flow.rfind("t,mean_0,cov_0_0,log_mass\n", 0) == 0);

  CHECK(run_cli("spectrum --model " + model("oscillator_2d.json") +
                " --M 4 --out /tmp/fkqho_spec.json 2>/dev/null") == 0);
  const auto spec = nlohmann::json::parse(slurp("/tmp/fkqho_spec.json"));
  CHECK(spec["modes"].size() == 15);  // C(4+2, 2)

  CHECK(run_cli("spectrum --model " + model("mehler_1d.json") +
                " --M 12 --format csv --t 1 --grid-half 1.5 --grid-n 5"
                " --out /tmp/fkqho_kernel.csv 2>/dev/null") == 0);
  const std::string kernel = slurp("/tmp/fkqho_kernel.csv");
  CHECK(kernel.rfind("x,y,value\n", 0) == 0);
  CHECK(std::count(kernel.begin(), kernel.end(), '\n') == 26);  // header + 5*5

  CHECK(run_cli("mehler --model " + model("mehler_1d.json") +
                " --t 1 --M 25 --grid-half 2 --grid-n 9 --out /tmp/fkqho_mehler.json"
                " 2>/dev/null") == 0);
  const auto mr = nlohmann::json::parse(slurp("/tmp/fkqho_mehler.json"));
  CHECK(mr["max_series_error"].get<double>() <= 1e-6);

  CHECK(run_cli("verify --model " + model("mehler_1d.json") +
                " --level fast --out /tmp/fkqho_verify.txt 2>/dev/null") == 0);
  CHECK(slurp("/tmp/fkqho_verify.txt").find("all checks passed") != std::string::npos);
}

TEST_CASE("enkf and hproc schemes are reachable from the front end") {
  for (const std::string scheme : {"enkf1", "enkf2", "enkf3", "hproc"}) {
    CHECK(run_cli("simulate --model " + model("mehler_1d.json") + " --scheme " + scheme +
                  " --N 32 --T 0.2 --dt 0.01 --seed 5 --out /tmp/fkqho_" + scheme +
                  ".csv 2>/dev/null") == 0);
  }
  CHECK(run_cli("simulate --model " + model("mehler_1d.json") +
                " --scheme backward --N 64 --T 1.0 --dt 0.01 --seed 5 --cov 1"
                " --out /tmp/fkqho_backward.csv 2>/dev/null") == 0);
  CHECK(run_cli("simulate --model " + model("mehler_1d.json") +
                " --scheme nope --N 8 --T 0.1 --dt 0.01 --seed 5 2>/dev/null >/dev/null") ==
        1);
}
