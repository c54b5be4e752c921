#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "kvwave/config.hpp"
#include "kvwave/pipeline.hpp"

using namespace kvwave;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  "domain": {"dim": 1, "lengths": [1.0], "n_cells": [49]},
  "material": {"m0": 1.0},
  "coupling": {"p": 1.0},
  "initial": {"u0_modes": [{"index": [1], "amplitude": 0.1}]}
})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("kvwave_test_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text, "case.json");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string with(const std::string& base, const std::string& from, const std::string& to) {
  std::string s = base;
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  s.replace(pos, from.size(), to);
  return s;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(KVWAVE_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("minimal config gets defaults") {
  const ProblemSpec s = parse_config_text(kMinimal);
  CHECK(s.domain.n_cells[0] == 49);
  CHECK(s.domain.n_cells[1] == 1);
  CHECK(s.material.m1 == 0.0);
  CHECK(s.material.gamma == 1.0);
  CHECK(s.g1.terms().empty());
  CHECK(s.coupling.a == 1.0);
  CHECK(s.coupling.n == 1);
  CHECK(s.numerics == NumericsConfig{});
  CHECK(s.outputs == OutputConfig{});
  CHECK(s.certify == CertifyConfig{});
  CHECK(s.seed == 20240101u);
  REQUIRE(s.initial.u0.size() == 1);
  CHECK(s.initial.u0[0].amplitude == 0.1);
}

TEST_CASE("invariant violations are rejected") {
  CHECK(error_of(with(kMinimal, R"("m0": 1.0)", R"("m0": 0.0)")).find("(A1)") != std::string::npos);
  const std::string heavy = with(kMinimal, R"("coupling")",
                                 R"("kernels": {"g1": [{"a": 1.5, "b": 1.0}]}, "coupling")");
  const std::string e = error_of(heavy);
  CHECK(e.find("k1") != std::string::npos);
  CHECK(e.find("must be > 0") != std::string::npos);

  const std::string two_d = with(with(kMinimal, R"("p": 1.0)", R"("p": 2.0)"),
                                 R"("dim": 1, "lengths": [1.0], "n_cells": [49])",
                                 R"("dim": 2, "lengths": [1.0, 1.0], "n_cells": [9, 9])");
  CHECK(error_of(two_d) != "");
  const std::string good_2d = with(two_d, R"("index": [1])", R"("index": [1, 1])");
  CHECK(error_of(good_2d) == "");
  CHECK(error_of(with(kMinimal, R"("p": 1.0)", R"("p": -1.0)")).find("-1 < p") != std::string::npos);
  CHECK(error_of(with(kMinimal, R"("index": [1])", R"("index": [0])")).find("index") !=
        std::string::npos);
}

TEST_CASE("structural errors name the location") {
  const std::string broken = "{\n  \"domain\": {\"dim\": 1,\n  \"lengths\": [1.0]]\n}";
  const std::string e = error_of(broken);
  CHECK(e.rfind("case.json:3:", 0) == 0);

  CHECK(error_of(R"({"domain": {"dim": 1, "lengths": [1.0], "n_cells": [49]}, "material": {"m0": 1.0},
                    "initial": {}})")
            .find("coupling") != std::string::npos);
  const std::string mismatch = error_of(with(kMinimal, R"("m0": 1.0)", R"("m0": "one")"));
  CHECK(mismatch.find("material.m0") != std::string::npos);
  CHECK(mismatch.find("expected number, got string") != std::string::npos);
  const std::string unknown = error_of(with(kMinimal, R"("m0": 1.0)", R"("m0": 1.0, "m2": 3)"));
  CHECK(unknown.find("material.m2") != std::string::npos);
  CHECK_THROWS_AS(parse_config("/nonexistent/kvwave.json"), ConfigError);
}

TEST_CASE("spec dump round trip") {
  ProblemSpec s = parse_config_text(kMinimal);
  s.g2 = PronyKernel({{0.1, 0.7}, {0.2, 3.0}});
  s.numerics.memory_mode = MemoryMode::prony;
  s.numerics.dt = 1.0 / 3.0 * 1e-3;
  s.initial.v1 = {SineMode{{3, 1}, -0.123456789012345678}};
  s.seed = 18446744073709551615ull;
  const std::string text = json_text(spec_to_json(s));
  const ProblemSpec back = parse_config_text(text);
  CHECK(back == s);
  CHECK(json_text(spec_to_json(back)) == text);

  const ProblemSpec from_file = parse_config(KVWAVE_SOURCE_DIR "/configs/small_data.json");
  CHECK(parse_config_text(json_text(spec_to_json(from_file))) == from_file);
}

TEST_CASE("zero data gives a zero series and passing hypotheses") {
  ProblemSpec s = parse_config_text(kMinimal);
  s.initial = InitialData{};
  s.numerics.t_end = 0.05;
  const SimResult r = run_pipeline(s);
  CHECK(r.series.size() == 51);
  const std::string csv = series_csv(r.series);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,E,I,J,kinetic,memory,potential,dissipation_residual,alpha_t");
  int rows = 0;
  while (std::getline(in, line)) {
    const std::string values = line.substr(line.find(','));
    CHECK(values == ",0,0,0,0,0,0,0,0");
    ++rows;
  }
  CHECK(rows == 51);
  REQUIRE(r.report);
  CHECK(r.report->hyp_E0_below_E1);
  CHECK(r.report->hyp_initial_in_well);
  CHECK(r.report->hyp_lambda_positive);
  CHECK(r.report->trajectory_in_well);
  CHECK(exit_code_for(r) == ExitCode::ok);
}

TEST_CASE("t_end = 0 gives a single row") {
  ProblemSpec s = parse_config_text(kMinimal);
  s.numerics.t_end = 0.0;
  const SimResult r = run_pipeline(s, false);
  CHECK_FALSE(r.report);
  const std::string csv = series_csv(r.series);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("outputs are deterministic") {
  ProblemSpec s = parse_config(KVWAVE_SOURCE_DIR "/configs/small_data.json");
  s.numerics.t_end = 0.5;
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  write_outputs(run_pipeline(s), s, a);
  write_outputs(run_pipeline(s), s, b);
  const std::string csv = slurp(a / "series.csv");
  CHECK(csv.size() > 1000);
  CHECK(csv == slurp(b / "series.csv"));
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  const nlohmann::json j = nlohmann::json::parse(slurp(a / "report.json"));
  CHECK(j["seed"] == 20240101u);
  CHECK(j["run"]["records"] == 501);
  CHECK(j["mesh"]["n_cells"][0] == 99);
  CHECK(j["eta_audit"]["violations"] == 0);
}

TEST_CASE("json numbers use 17 significant digits and null for non-finite") {
  nlohmann::json j;
  j["x"] = 0.1;
  j["inf"] = INFINITY;
  j["n"] = 3;
  const std::string t = json_text(j);
  CHECK(t.find("0.10000000000000001") != std::string::npos);
  CHECK(t.find("\"inf\": null") != std::string::npos);
  CHECK(t.find("\"n\": 3") != std::string::npos);
}

TEST_CASE("exit codes") {
  ProblemSpec s = parse_config_text(kMinimal);
  s.numerics.t_end = 0.01;
  SimResult ok = run_pipeline(s);
  CHECK(exit_code_for(ok) == ExitCode::ok);
  SimResult div = ok;
  div.diverged = true;
  CHECK(exit_code_for(div) == ExitCode::diverged);
  SimResult outside = ok;
  outside.report->trajectory_in_well = false;
  CHECK(exit_code_for(outside) == ExitCode::hypothesis_failure);
  CHECK(static_cast<int>(ExitCode::config_error) == 2);
  CHECK(static_cast<int>(ExitCode::io_error) == 5);
  CHECK(static_cast<int>(ExitCode::numerical_failure) == 6);

  SimResult above = ok;
  above.report->hyp_E0_below_E1 = false;
  CHECK(exit_code_for(above) == ExitCode::hypothesis_failure);
  div.report->trajectory_in_well = false;
  CHECK(exit_code_for(div) == ExitCode::diverged);
}

TEST_CASE("unwritable output directory raises an IO error") {
  ProblemSpec s = parse_config_text(kMinimal);
  s.numerics.t_end = 0.0;
  const SimResult r = run_pipeline(s);
  const fs::path d = scratch("io");
  std::ofstream(d / "file") << "x";
  CHECK_THROWS_AS(write_outputs(r, s, d / "file" / "sub"), IoError);
}

TEST_CASE("command line tool") {
  const std::string cfg = KVWAVE_SOURCE_DIR "/configs/small_data.json";
  const fs::path d = scratch("tool");
  CHECK(cli("spec-dump --config " + cfg + " --output " + (d / "dump.json").string()) == 0);
  CHECK(parse_config((d / "dump.json").string()) == parse_config(cfg));
  CHECK(cli("certify --config " + cfg + " --output-dir " + d.string()) == 0);
  CHECK(fs::exists(d / "report.json"));
  CHECK(cli("run --config /nonexistent.json") == 2);
  CHECK(cli("run") == 2);
  CHECK(cli("spec-dump --config " + cfg + " --memory-mode fast") == 2);

  std::ofstream(d / "short.json") << with(slurp(cfg), R"("t_end": 10.0)", R"("t_end": 0.2)");
  CHECK(cli("run --config " + (d / "short.json").string() + " --stride 10 --output-dir " +
            (d / "out").string()) == 0);
  const std::string csv = slurp(d / "out" / "series.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 22);
  std::ofstream(d / "blocker") << "x";
  CHECK(cli("run --config " + (d / "short.json").string() + " --output-dir " +
            (d / "blocker").string()) == 5);

  std::ofstream(d / "cfl.json") << with(slurp(d / "short.json"), R"("dt": 1e-3)", R"("dt": 0.1)");
  CHECK(cli("run --config " + (d / "cfl.json").string() + " --output-dir " + d.string()) == 6);

  const std::string env = "KVWAVE_CONFIG=" + (d / "short.json").string() + " KVWAVE_STRIDE=100 " +
                          "KVWAVE_OUTPUT_DIR=" + (d / "env").string() + " ";
  CHECK(std::system((env + KVWAVE_CLI " run >/dev/null 2>&1").c_str()) == 0);
  const std::string env_csv = slurp(d / "env" / "series.csv");
  CHECK(std::count(env_csv.begin(), env_csv.end(), '\n') == 4);
}
