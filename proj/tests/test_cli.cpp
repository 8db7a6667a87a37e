#include "support.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Result {
  int status = -1;
  std::string out;
};

Result cli(const std::string& args) {
  const std::string cmd = std::string(BIASLAB_CLI_PATH) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("biaslab_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write_network(const std::string& name, const biaslab::ListeningNetwork& net) {
    const auto path = dir_ / name;
    std::ofstream out(path);
    biaslab::write_network_text(out, net);
    return path.string();
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, SpectraOnFourAgent) {
  const auto path = write_network("four.txt", fixtures::four_agent_network());
  const auto r = cli("spectra " + path + " --format json");
  ASSERT_EQ(r.status, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["influence"][0].get<double>(), 0.352, 1e-9);
  EXPECT_NEAR(j["influence"][3].get<double>(), 0.128, 1e-9);
  const auto csv = cli("spectra " + path);
  EXPECT_EQ(csv.out.rfind("kind,index,value\n", 0), 0u);
}

TEST_F(CliTest, MediaSinglePair) {
  EXPECT_EQ(cli("media --M 2 --q 0.8").out, "0.2\n");
  EXPECT_EQ(cli("media --M 3 --q 0.5").out, "none\n");
  const auto table = cli("media --M 1,4 --q 0,0.5");
  EXPECT_EQ(table.out, "M,q,fringe,exists\n1,0,0:1,1\n1,0.5,0.5:0.5,1\n4,0,0.25,1\n4,0.5,0.25,1\n");
}

TEST_F(CliTest, RunReportsTheVotingShock) {
  const auto path = write_network("voting.txt", fixtures::voting_network());
  const auto r = cli("run --network " + path +
                     " --beliefs 0.15,0.3,0.5,0.65,0.75 --q 0.78 --eps 1e-6 --swing left --format json");
  ASSERT_EQ(r.status, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_FALSE(j["shock_times"].empty());
  EXPECT_EQ(j["shock_times"][0], 1);
  EXPECT_NEAR(j["consensus"].get<double>(), 0.42, 1e-9);
}

TEST_F(CliTest, RunWritesArtifacts) {
  const auto path = write_network("three.txt", fixtures::three_agent_network());
  const auto out = dir_ / "run";
  const auto r = cli("run --network " + path + " --beliefs 0,1,0.7 --q 0.3 --out " + out.string());
  ASSERT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("belief_convergence_time,135"), std::string::npos) << r.out;
  for (const char* f : {"trajectory.csv", "elections.csv", "run.json"}) EXPECT_TRUE(fs::exists(out / f)) << f;
}

TEST_F(CliTest, GenerateIsSeeded) {
  const auto a = cli("generate --family meeting --n 50 --m0 8 --random-meetings 5 --neighbor-meetings 5 --seed 3");
  const auto b = cli("generate --seed 3 --family meeting --n 50 --m0 8 --random-meetings 5 --neighbor-meetings 5");
  ASSERT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  std::istringstream in(a.out);
  EXPECT_EQ(biaslab::build_network(biaslab::read_matrix_text(in)).n(), 50u);
}

TEST_F(CliTest, WeightsAndOctopus) {
  const auto graph = dir_ / "star.txt";
  std::ofstream(graph) << "0 1 1 1\n1 0 0 0\n1 0 0 0\n1 0 0 0\n";
  const auto r = cli("weights --heuristic mh " + graph.string());
  ASSERT_EQ(r.status, 0);
  std::istringstream in(r.out);
  const auto net = biaslab::build_network(biaslab::read_matrix_text(in));
  EXPECT_NEAR(net(1, 1), 2.0 / 3.0, 1e-12);
  const auto oct = cli("octopus --beliefs 0.1,0.3,0.5,0.7,0.9 --q 0.7");
  EXPECT_EQ(oct.status, 0);
}

TEST_F(CliTest, ErrorsAsJsonWithExitCodes) {
  const auto bad = dir_ / "bad.txt";
  std::ofstream(bad) << "0.5 0.4\n0.5 0.5\n";
  const auto r = cli("spectra " + bad.string() + " --format json");
  EXPECT_EQ(r.status, 2);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["error"], "RowSumViolation");
  EXPECT_EQ(cli("media --M 0 --q 0.5").status, 2);
  EXPECT_NE(cli("nonsense").status, 0);
  EXPECT_NE(cli("").status, 0);
}

TEST_F(CliTest, SweepWithConfig) {
  const auto cfg = dir_ / "scenario.json";
  std::ofstream(cfg) << R"({"schema_version": 1, "network": {"generator": {"n": 40, "m0": 8,
    "random_meetings": 5, "neighbor_meetings": 5}}, "n_networks": 2, "n_assignments": 2, "master_seed": 1})";
  const auto out = dir_ / "sweep";
  const auto one = cli("sweep --config " + cfg.string() + " --out " + out.string() + " --threads 1");
  ASSERT_EQ(one.status, 0) << one.out;
  std::ifstream a(out / "runs.csv");
  const std::string first((std::istreambuf_iterator<char>(a)), {});
  cli("sweep --config " + cfg.string() + " --out " + out.string() + " --threads 2");
  std::ifstream b(out / "runs.csv");
  const std::string second((std::istreambuf_iterator<char>(b)), {});
  EXPECT_EQ(first, second);
  EXPECT_FALSE(first.empty());
}
