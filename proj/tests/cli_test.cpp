#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "rosefract/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result cli(const std::string &args) {
  const std::string cmd = std::string(ROSEFRACT_CLI_PATH) + " " + args + " 2>/dev/null";
  Result r;
  FILE *pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) {
    return r;
  }
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) {
    r.out.append(buf, got);
  }
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("rosefract_cli_" + std::string(
                                  ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string at(const std::string &name) const { return (dir / name).string(); }
  fs::path dir;
};

} // namespace

TEST_F(CliTest, SimulateWritesCsvAndSidecar) {
  const auto r = cli("simulate --H 0.7 --n 256 --T 2 --seed 5 --out " + at("p.csv"));
  ASSERT_EQ(r.code, 0);
  const auto csv = slurp(dir / "p.csv");
  EXPECT_EQ(csv.rfind("t,z\n0,0\n", 0), 0u);
  const auto side = rosefract::json::parse(slurp(dir / "p.json"));
  EXPECT_EQ(side.at("H"), 0.7);
  EXPECT_EQ(side.at("n"), 256);
  EXPECT_EQ(side.at("T"), 2.0);
  EXPECT_EQ(side.at("seed"), 5);
  EXPECT_EQ(side.at("method"), "hermite2");
  // Same seed, same bytes.
  ASSERT_EQ(cli("simulate --H 0.7 --n 256 --T 2 --seed 5 --out " + at("q.csv")).code, 0);
  EXPECT_EQ(slurp(dir / "q.csv"), csv);
}

TEST_F(CliTest, SojournAndLevelsetProduceSets) {
  ASSERT_EQ(cli("simulate --H 0.7 --n 4096 --T 64 --seed 2 --out " + at("p.csv")).code, 0);
  auto r = cli("sojourn --path " + at("p.csv") + " --gamma 0.2");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("a,b\n", 0), 0u);
  r = cli("sojourn --path " + at("p.csv") + " --gamma 0.2 --pixels");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("cell\n", 0), 0u);
  r = cli("levelset --path " + at("p.csv") + " --x 0 --window 1:64 --out " + at("l.csv"));
  ASSERT_EQ(r.code, 0);
  std::ifstream in(at("l.csv"));
  const auto set = rosefract::read_interval_csv(in);
  for (const auto &iv : set) {
    EXPECT_GE(iv.a, 1.0);
    EXPECT_LE(iv.b, 64.0);
  }
}

TEST_F(CliTest, DimsOnUnitInterval) {
  {
    std::ofstream os(at("unit.csv"));
    os << "a,b\n0,1\n";
  }
  for (const auto &method : {"box", "packing", "intermediate"}) {
    const auto r = cli("dims " + at("unit.csv") + " --method " + method +
                       " --theta 0.5 --scales 0.0001:0.1");
    ASSERT_EQ(r.code, 0) << method;
    const auto j = rosefract::json::parse(r.out);
    EXPECT_NEAR(j.at("value").get<double>(), 1.0, 0.05) << method;
    EXPECT_TRUE(j.contains("stderr"));
    EXPECT_TRUE(j.contains("scales"));
    EXPECT_TRUE(j.at("diagnostics").is_array());
    EXPECT_EQ(j.at("method").get<std::string>().empty(), false);
  }
}

TEST_F(CliTest, DimsOnPointsCsv) {
  {
    std::ofstream os(at("pts.csv"));
    os << "x\n";
    for (int i = 0; i <= 4096; ++i) {
      os << i / 4096.0 << '\n';
    }
  }
  const auto r = cli("dims " + at("pts.csv") + " --method box --scales 0.001:0.1");
  ASSERT_EQ(r.code, 0);
  EXPECT_NEAR(rosefract::json::parse(r.out).at("value").get<double>(), 1.0, 0.05);
}

TEST_F(CliTest, MacroOnFullPixelSet) {
  {
    std::ofstream os(at("cells.csv"));
    os << "cell\n";
    for (int c = 0; c < 1024; ++c) {
      os << c << '\n';
    }
  }
  const auto r = cli("macro " + at("cells.csv") + " --rho-grid 0:1.2:0.05 --shells 1:10");
  ASSERT_EQ(r.code, 0);
  const auto j = rosefract::json::parse(r.out);
  EXPECT_EQ(j.at("shells").size(), 10u);
  EXPECT_EQ(j.at("rho_grid").size(), 25u);
  EXPECT_EQ(j.at("shells")[0].at("log2_nu").size(), 25u);
  EXPECT_NEAR(j.at("estimate").at("value").get<double>(), 1.0, 0.05);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(cli("").code, 1);
  EXPECT_EQ(cli("simulate --H 0.7").code, 1);
  EXPECT_EQ(cli("dims " + at("missing.csv")).code, 1);
  EXPECT_EQ(cli("--help").code, 0);
  {
    std::ofstream os(at("bad.json"));
    os << R"({"kind": "sojourn-densities", "H": 2})";
  }
  EXPECT_EQ(cli("experiment --config " + at("bad.json")).code, 1);
  {
    std::ofstream os(at("garbage.csv"));
    os << "a,b\n0,zz\n";
  }
  EXPECT_EQ(cli("dims " + at("garbage.csv")).code, 1);
}

TEST_F(CliTest, ExperimentPassAndOutsideTolerance) {
  {
    std::ofstream os(at("ok.json"));
    os << R"({"kind": "image-dims", "H": 0.7, "n": 65536, "replicas": 2, "seed": 4, "thetas": [],
              "scales": [0.001953125, 0.125], "tolerances": {"image_interval": 0.3}})";
  }
  auto r = cli("experiment --config " + at("ok.json") + " --out " + at("ok"));
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(fs::exists(dir / "ok" / "summary.json"));
  EXPECT_TRUE(fs::exists(dir / "ok" / "replicas.csv"));
  {
    std::ofstream os(at("tight.json"));
    os << R"({"kind": "image-dims", "H": 0.7, "n": 65536, "replicas": 2, "seed": 4, "thetas": [],
              "scales": [0.001953125, 0.125],
              "tolerances": {"image_interval": 1e-9, "image_profile": 1e-9}})";
  }
  r = cli("experiment --config " + at("tight.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(rosefract::json::parse(r.out).at("passed"), false);
}

TEST_F(CliTest, ThreadCapDoesNotChangeOutput) {
  {
    std::ofstream os(at("c.json"));
    os << R"({"kind": "sojourn-densities", "H": 0.7, "gamma": 0.2, "N": 10, "dt": 0.25,
              "replicas": 4, "seed": 8})";
  }
  const auto one = cli("experiment --config " + at("c.json"));
  const auto many =
      cli("experiment --config " + at("c.json") + " 2>/dev/null; ROSEFRACT_THREADS=3 " + ROSEFRACT_CLI_PATH +
          " experiment --config " + at("c.json"));
  ASSERT_NE(one.code, 1);
  // `many` holds two summaries back to back; both must equal the single run.
  EXPECT_EQ(many.out, one.out + one.out);
}

TEST_F(CliTest, SelftestPasses) {
  const auto r = cli("selftest");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(rosefract::json::parse(r.out).at("passed"), true);
}
