#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace {

struct CliRun {
  int code;
  std::string out;
};

CliRun run(const std::string& args) {
  const std::string cmd = std::string(RDSI_CLI) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string data(const std::string& name) { return std::string(RDSI_DATA_DIR) + "/" + name; }

nlohmann::json json_of(const CliRun& r) { return nlohmann::json::parse(r.out); }

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);)
    if (!l.empty()) out.push_back(l);
  return out;
}

}  // namespace

TEST(Cli, ParseErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("no-such-command").code, 2);
  EXPECT_EQ(run("discrete-solve --input " + data("malformed.json")).code, 2);
  EXPECT_EQ(run("discrete-solve --input " + data("bsc025.json") + " --config bogus=1").code, 2);
  EXPECT_EQ(run("discrete-solve --input " + data("bsc025.json") + " --format xml").code, 2);
  EXPECT_EQ(run("discrete-solve --input /nonexistent.json").code, 2);
}

TEST(Cli, AssumptionViolation) {
  EXPECT_EQ(run("discrete-solve --input " + data("no_zero_distortion.json")).code, 3);
  EXPECT_EQ(run("gaussian-curve --config var_x=-1 --config var_u=1 --config dd=0.5 --config de=0").code, 3);
}

TEST(Cli, InfeasibleEpsilon) {
  EXPECT_EQ(run("sphere-sim --input " + data("sphere.json") + " --config epsilon=10").code, 4);
}

TEST(Cli, ResourceCap) {
  EXPECT_EQ(run("sphere-sim --input " + data("sphere.json") + " --config n=200").code, 5);
}

TEST(Cli, DiscreteSolveJson) {
  const CliRun r = run("discrete-solve --input " + data("bsc025.json"));
  ASSERT_EQ(r.code, 0);
  const auto j = json_of(r);
  EXPECT_EQ(j["spec_version"], "1.0");
  EXPECT_EQ(j["seed"], 0);
  EXPECT_EQ(j["subcommand"], "discrete-solve");
  EXPECT_GT(j["rate"].get<double>(), 0.0);
}

TEST(Cli, SeedIsEchoed) {
  const CliRun r = run("discrete-solve --seed 42 --input " + data("bsc025.json"));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(json_of(r)["seed"], 42);
}

TEST(Cli, WynerZivCsvHasTwelveDigits) {
  const CliRun r = run("wz --input " + data("bsc025.json") + " --config dd=0.1 --format csv");
  ASSERT_EQ(r.code, 0);
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 2u);
  EXPECT_EQ(ls[0].rfind("dd,rate", 0), 0u);
  const std::string rate = ls[1].substr(4, ls[1].find(',', 4) - 4);
  EXPECT_EQ(rate.size(), 14u) << rate;  // "0." plus 12 significant digits
  EXPECT_NEAR(std::stod(rate), 0.41117943978530504, 1e-8);
}

TEST(Cli, SweepRows) {
  const CliRun r = run("discrete-sweep --input " + data("bsc025.json") +
                    " --config dd=0.1,0.2 --config de=0,1 --config z_size=3 --format csv");
  ASSERT_EQ(r.code, 0);
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 5u);
  EXPECT_EQ(ls[0].rfind("dd,de,rate", 0), 0u);
  for (std::size_t i = 1; i < ls.size(); ++i) EXPECT_EQ(ls[i].find(','), 3u) << ls[i];
}

TEST(Cli, GaussianCurve) {
  const CliRun r = run("gaussian-curve --input " + data("gaussian.json") + " --format json");
  ASSERT_EQ(r.code, 0);
  const auto j = json_of(r);
  EXPECT_EQ(j["spec_version"], "1.0");
  EXPECT_EQ(j["rows"].size(), 20u);
  bool found = false;
  for (const auto& row : j["rows"])
    if (row["dd"] == 0.25 && row["de"] == 0.0625) {
      found = true;
      EXPECT_NEAR(row["r_gaussian"].get<double>(), 0.5, 1e-12);
      EXPECT_EQ(row["case_id"], 3);
    }
  EXPECT_TRUE(found);
}

TEST(Cli, ExtSolveMatchesDiscreteSolve) {
  const CliRun base = run("discrete-solve --input " + data("bsc025.json") + " --config z_size=3");
  const CliRun ext = run("ext-solve --input " + data("bsc025.json") + " --config z_size=3");
  ASSERT_EQ(base.code, 0);
  ASSERT_EQ(ext.code, 0);
  EXPECT_NEAR(json_of(base)["rate"].get<double>(), json_of(ext)["rate"].get<double>(), 1e-6);
}

TEST(Cli, ExtSolveInstance) {
  const CliRun r = run("ext-solve --input " + data("ext_k2.json"));
  ASSERT_EQ(r.code, 0);
  const auto j = json_of(r);
  EXPECT_EQ(j["k"], 2);
  EXPECT_NEAR(j["rate"].get<double>(), 0.269941109186, 1e-6);
}

TEST(Cli, ReduceU) {
  const CliRun r = run("reduce-u --input " + data("ext_witness.json"));
  ASSERT_EQ(r.code, 0);
  const auto j = json_of(r);
  EXPECT_TRUE(j["ok"].get<bool>());
  EXPECT_EQ(j["u_size_before"], 4);
  EXPECT_EQ(j["u_size_after"], 2);
  EXPECT_EQ(j["rate_before"], j["rate_after"]);
}

TEST(Cli, SphereSimIsDeterministic) {
  const std::string args = "sphere-sim --input " + data("sphere.json") + " --config trials=5 --seed 3";
  const CliRun a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(lines(a.out).size(), 3u);
  const CliRun c = run("sphere-sim --input " + data("sphere.json") + " --config trials=5 --seed 4");
  EXPECT_NE(a.out, c.out);
}

TEST(Cli, OutputFile) {
  const std::string path = ::testing::TempDir() + "rdsi_cli_out.json";
  ASSERT_EQ(run("discrete-solve --input " + data("bsc025.json") + " --output " + path).code, 0);
  std::ifstream in(path);
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j["subcommand"], "discrete-solve");
}
