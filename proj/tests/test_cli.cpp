#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#ifndef OCTEST_CLI_PATH
#error "OCTEST_CLI_PATH must point at the CLI binary"
#endif

namespace {

using json = nlohmann::json;

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const std::string cmd =
      std::string(OCTEST_CLI_PATH) + " " + args + " 2>/dev/null";
  RunResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
    res.out.append(buf.data(), got);
  }
  const int status = pclose(pipe);
  res.exit_code = WEXITSTATUS(status);
  return res;
}

std::filesystem::path write_temp(const std::string& name,
                                 const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("threshold from a table") {
  const RunResult res = run_cli("threshold --table 318,1631,4679,7538");
  REQUIRE(res.exit_code == 0);
  const json j = json::parse(res.out);
  CHECK(j["schema"] == "octest.report/1");
  CHECK(std::abs(j["threshold"]["T"].get<double>() - 0.84) < 0.005);
  CHECK(std::abs(j["phi"].get<double>() - 0.16) < 0.005);
  CHECK(j["verdict"] == "indeterminate");
}

TEST_CASE("threshold from a summary") {
  const RunResult res =
      run_cli("threshold --pe 0.0578 --pd 0.0206 --measure rr=5.8");
  REQUIRE(res.exit_code == 0);
  const json j = json::parse(res.out);
  CHECK(std::abs(j["threshold"]["T"].get<double>() - 0.87) < 0.01);
}

TEST_CASE("threshold of the uniform table is one") {
  const RunResult res = run_cli("threshold --table 1,1,1,1");
  REQUIRE(res.exit_code == 0);
  const json j = json::parse(res.out);
  CHECK(j["threshold"]["T"].get<double>() == 1.0);
}

TEST_CASE("full test on the drug-use data warrants causal inference") {
  const RunResult res = run_cli(
      "test --table 114,978,3649,1864 --bc-e 0.50 --bc-d 0.40 "
      "--prev-e 0.43 --prev-d 0.17");
  REQUIRE(res.exit_code == 0);
  const json j = json::parse(res.out);
  CHECK(j["verdict"] == "warranted");
  const double l_eta = j["randomness"]["l_eta"].get<double>();
  const double t = j["threshold"]["T"].get<double>();
  CHECK(l_eta > t);
  // The verdict is recomputable from the report fields.
  CHECK((l_eta > t ? "warranted" : "not_warranted") == j["verdict"]);
  CHECK(j["ample_ratio"].get<double>() ==
        doctest::Approx(l_eta / t).epsilon(1e-12));
}

TEST_CASE("percent strings parse as concordances") {
  const RunResult a = run_cli(
      "test --table 318,1631,4679,7538 --bc-e 67% --bc-d 20%");
  const RunResult b = run_cli(
      "test --table 318,1631,4679,7538 --bc-e 0.67 --bc-d 0.20");
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("prevalence overrides default to the table and warn on drift") {
  const RunResult res = run_cli(
      "test --table 318,1631,4679,7538 --bc-e 0.67 --bc-d 0.20 "
      "--prev-e 0.40 --prev-d 0.14");
  REQUIRE(res.exit_code == 0);
  const json j = json::parse(res.out);
  CHECK(j["warnings"].size() == 1);  // p_e off by > 0.05, p_d within
  CHECK(j["evidence"]["exposure"]["prevalence"].get<double>() == 0.40);
}

TEST_CASE("inconsistent evidence exits with a data error") {
  const RunResult res = run_cli(
      "test --table 318,1631,4679,7538 --bc-e 0.10 --bc-d 0.20");
  CHECK(res.exit_code == 1);
}

TEST_CASE("finite population correction reproduces the published value") {
  const RunResult res = run_cli(
      "fpc --table 34,433,1015,518 --alpha 0.05 --samples 100000 --seed 11");
  REQUIRE(res.exit_code == 0);
  const json j = json::parse(res.out);
  CHECK(std::abs(j["results"]["T_n"].get<double>() - 0.55) < 0.02);
  CHECK(j["results"]["T_point"].get<double>() <
        j["results"]["T_n"].get<double>());
  CHECK(j["config"]["seed_source"] == "given");
}

TEST_CASE("fpc reports are byte-identical for a fixed seed") {
  const std::string cmd =
      "fpc --table 34,433,1015,518 --alpha 0.05 --samples 20000 --seed 7";
  const RunResult a = run_cli(cmd);
  const RunResult b = run_cli(cmd);
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("fpc without a seed echoes an entropy seed") {
  const RunResult res =
      run_cli("fpc --table 34,433,1015,518 --samples 2000");
  REQUIRE(res.exit_code == 0);
  const json j = json::parse(res.out);
  CHECK(j["config"]["seed_source"] == "entropy");
}

TEST_CASE("adjust on the vaccine strata") {
  const RunResult res = run_cli(
      "adjust --strata "
      "\"18-49:155,7,2666,1523;50-64:290,23,1755,2447;65+:561,158,1668,7132\"");
  REQUIRE(res.exit_code == 0);
  const json j = json::parse(res.out);
  CHECK(std::abs(j["adjusted"]["T_c"].get<double>() - 0.70) < 0.01);
  CHECK(std::abs(j["marginal"]["threshold"]["T"].get<double>() - 0.75) <
        0.005);
  CHECK(std::abs(j["adjusted"]["adjusted_rr"].get<double>() - 0.08) < 0.005);
  CHECK(j["strata"].size() == 3);
  CHECK(j["verdict"] == "indeterminate");
}

TEST_CASE("adjust with a single stratum matches the marginal threshold") {
  const RunResult res =
      run_cli("adjust --strata \"all:114,978,3649,1864\"");
  REQUIRE(res.exit_code == 0);
  const json j = json::parse(res.out);
  CHECK(j["adjusted"]["T_c"].get<double>() ==
        doctest::Approx(j["marginal"]["threshold"]["T"].get<double>())
            .epsilon(1e-6));
}

TEST_CASE("adjust accepts evidence and reports both ample ratios") {
  const RunResult res = run_cli(
      "adjust --strata "
      "\"18-49:155,7,2666,1523;50-64:290,23,1755,2447;65+:561,158,1668,7132\""
      " --bc-e 0.7 --bc-d 0.2 --prev-d 0.065");
  REQUIRE(res.exit_code == 0);
  const json j = json::parse(res.out);
  CHECK(j.contains("ample_ratio"));
  CHECK(j["ample_ratio"]["adjusted"].get<double>() >
        j["ample_ratio"]["marginal"].get<double>());
  CHECK((j["verdict"] == "warranted" || j["verdict"] == "not_warranted"));
}

TEST_CASE("csv pipeline end to end") {
  const auto spec = write_temp("octest_cli_spec.txt",
                               "exposure = e\noutcome = d\ncovariates = g\n");
  std::string body = "e,d,g\n";
  for (int i = 0; i < 30; ++i) body += "1,1,a\n";
  for (int i = 0; i < 70; ++i) body += "1,0,a\n";
  for (int i = 0; i < 20; ++i) body += "0,1,a\n";
  for (int i = 0; i < 80; ++i) body += "0,0,a\n";
  for (int i = 0; i < 10; ++i) body += "1,1,b\n";
  for (int i = 0; i < 90; ++i) body += "1,0,b\n";
  for (int i = 0; i < 5; ++i) body += "0,1,b\n";
  for (int i = 0; i < 95; ++i) body += "0,0,b\n";
  const auto csv = write_temp("octest_cli_data.csv", body);

  const RunResult check = run_cli("ingest-check --csv " + csv.string() +
                                  " --spec " + spec.string());
  REQUIRE(check.exit_code == 0);
  const json cj = json::parse(check.out);
  CHECK(cj["rows"].get<int>() == 400);
  CHECK(cj["strata"].size() == 2);

  const RunResult adj = run_cli("adjust --csv " + csv.string() + " --spec " +
                                spec.string());
  REQUIRE(adj.exit_code == 0);
  const json aj = json::parse(adj.out);
  CHECK(aj["adjusted"]["T_c"].get<double>() <=
        aj["marginal"]["threshold"]["T"].get<double>() + 1e-4);

  const RunResult thr =
      run_cli("threshold --csv " + csv.string() + " --spec " + spec.string());
  REQUIRE(thr.exit_code == 0);
}

TEST_CASE("quick verification suite passes and is deterministic") {
  const RunResult a = run_cli("verify --intensity quick --seed 3");
  REQUIRE(a.exit_code == 0);
  const json j = json::parse(a.out);
  CHECK(j["passed"] == j["total"]);
  const RunResult b = run_cli("verify --intensity quick --seed 3");
  CHECK(a.out == b.out);
}

TEST_CASE("fault injection makes verify exit 3") {
  const RunResult res =
      run_cli("verify --intensity quick --seed 3 --inject-fault");
  CHECK(res.exit_code == 3);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("threshold").exit_code == 2);  // no input at all
  CHECK(run_cli("threshold --table 1,1,1,1 --pe 0.5 --pd 0.5 "
                "--measure rr=2")
            .exit_code == 2);
  CHECK(run_cli("fpc --table 1,2,3").exit_code == 1);  // malformed cells
}

TEST_CASE("data errors exit 1") {
  CHECK(run_cli("threshold --table 0,5,5,5").exit_code == 1);
  CHECK(run_cli("adjust --strata \"bad:0,5,0,7\"").exit_code == 1);
}

}  // TEST_SUITE
