#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#ifndef MIPT_CLI_PATH
#error "MIPT_CLI_PATH must name the mipt executable"
#endif

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + MIPT_CLI_PATH + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("mipt_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const char* name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

const char* kClifford = "simulate --model clifford-dual --L 32 --p 0.5 --gamma 1 --t-max 40 --traj 6 --seed 3 "
                        "--observables ee,pe,bpmi --cuts half --quiet";

}  // namespace

TEST_F(Cli, SimulateWritesSchemaCsv) {
  const auto r = run(std::string(kClifford) + " --out " + path("a.csv"));
  ASSERT_EQ(r.code, 0);
  const std::string csv = slurp(path("a.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "model,L,p,beta,gamma,chi,seed_base,n_traj,t,observable,cut,value,stderr,n_samples");
  EXPECT_NE(csv.find("\nclifford-dual,32,0.5,,1,,3,6,40,bpmi,16,"), std::string::npos);
}

TEST_F(Cli, RepeatedRunsAndWorkerCountsAreByteIdentical) {
  ASSERT_EQ(run(std::string(kClifford) + " --out " + path("a.csv"), "MIPT_THREADS=1").code, 0);
  ASSERT_EQ(run(std::string(kClifford) + " --out " + path("b.csv"), "MIPT_THREADS=1").code, 0);
  ASSERT_EQ(run(std::string(kClifford) + " --out " + path("c.csv"), "MIPT_THREADS=4").code, 0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("c.csv")));
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
  std::ofstream(path("cfg.json")) << R"({"model": "clifford-dual", "L": 16, "p": 0.5, "gamma": 1,
    "t_max": 10, "traj": 2, "observables": ["ee", "pe"], "cuts": "half", "quiet": true})";
  const auto r = run("--config " + path("cfg.json") + " simulate --traj 5 --out " + path("o.csv"));
  ASSERT_EQ(r.code, 0);
  const std::string csv = slurp(path("o.csv"));
  EXPECT_NE(csv.find("\nclifford-dual,16,0.5,,1,,0,5,10,pe,0,"), std::string::npos);
  // --config may also follow the subcommand.
  ASSERT_EQ(run("simulate --config " + path("cfg.json") + " --out " + path("p.csv")).code, 0);
  EXPECT_NE(slurp(path("p.csv")).find(",0,2,10,pe,0,"), std::string::npos);
}

TEST_F(Cli, JsonFormat) {
  ASSERT_EQ(run(std::string(kClifford) + " --format json --out " + path("a.json")).code, 0);
  const auto j = nlohmann::json::parse(slurp(path("a.json")));
  ASSERT_TRUE(j.is_array());
  EXPECT_EQ(j.front().size(), 14u);
  EXPECT_TRUE(j.front()["beta"].is_null());
}

TEST_F(Cli, ErrorsExitNonZero) {
  EXPECT_EQ(run("simulate --model nope --L 8 --p 0.1 --t-max 2 --out " + path("x.csv")).code, 2);
  EXPECT_EQ(run("simulate --model qa --L 7 --p 0.1 --t-max 2 --out " + path("x.csv")).code, 2);
  EXPECT_NE(run("simulate --L 8").code, 0);
  EXPECT_NE(run("").code, 0);
  EXPECT_EQ(run("fit --in " + path("missing.csv")).code, 1);
}

TEST_F(Cli, FitReadsSimulatorOutput) {
  ASSERT_EQ(run(std::string(kClifford) + " --out " + path("a.csv")).code, 0);
  const auto r = run("fit --in " + path("a.csv") + " --kind logslope --observable ee");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["L"], 32);
  EXPECT_GT(j["fit"]["slope"].get<double>(), 0.0);
  EXPECT_EQ(j["fit"]["window"][1], 30.0);
  const auto tail = run("fit --in " + path("a.csv") + " --kind exptail --observable pe --s-inf auto");
  ASSERT_EQ(tail.code, 0);
  EXPECT_TRUE(nlohmann::json::parse(tail.out).contains("s_inf"));
}

TEST_F(Cli, CollapseAcrossSizes) {
  for (int L : {16, 32}) {
    const std::string out = path(("c" + std::to_string(L) + ".csv").c_str());
    ASSERT_EQ(run("simulate --model clifford-dual --gamma 1 --p 0.5 --t-max 80 --traj 4 --observables pe --quiet --L " +
                  std::to_string(L) + " --out " + out)
                  .code,
              0);
  }
  // Concatenate the two tables under one header.
  std::string a = slurp(path("c16.csv"));
  std::string b = slurp(path("c32.csv"));
  std::ofstream(path("both.csv")) << a << b.substr(b.find('\n') + 1);
  const auto r = run("fit --in " + path("both.csv") + " --kind collapse --observable pe --z-grid 0.5:1.5:0.25");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["quality"].size(), 5u);
  EXPECT_TRUE(j.contains("best_z"));
}

TEST_F(Cli, OracleNamedStates) {
  const auto r = run("oracle --state ghz --L 4");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["entropies"]["ee"].get<double>(), std::log(2.0), 1e-12);
  EXPECT_NEAR(j["entropies"]["sre"].get<double>(), 0.0, 1e-10);
  const auto t = nlohmann::json::parse(run("oracle --state tstates --L 3 --order 2").out);
  EXPECT_NEAR(t["entropies"]["sre"].get<double>(), 3 * std::log(4.0 / 3.0), 1e-10);
  EXPECT_EQ(run("oracle --state ghz --L 13").code, 1);
}

TEST_F(Cli, OracleTrajectoryMatchesSeed) {
  const auto a = run("oracle --model selfdual --L 6 --beta 0.8 --steps 4 --seed 9");
  const auto b = run("oracle --model selfdual --L 6 --beta 0.8 --steps 4 --seed 9");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const auto j = nlohmann::json::parse(a.out);
  EXPECT_EQ(j["spec"]["steps"], 4);
  EXPECT_GT(j["entropies"]["sre"].get<double>(), 0.0);
}
