#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kWb = WB_BINARY;

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args, const fs::path& dir) {
  const auto out = dir / "stdout.txt";
  const std::string cmd = "cd '" + dir.string() + "' && '" + kWb + "' " + args + " > stdout.txt 2> stderr.txt";
  const int status = std::system(cmd.c_str());
  std::ifstream is(out);
  std::stringstream ss;
  ss << is.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("wb_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()) + "_" +
            std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("", dir_).code, 2);
  EXPECT_EQ(run("gen --family spirals --n 1 --m 4 --out d", dir_).code, 2);
  EXPECT_EQ(run("ot missing.csv missing.csv", dir_).code, 2);
  EXPECT_EQ(run("gen --family cauchy-grid --n 1 --m 10 --out d", dir_).code, 2);
}

TEST_F(Cli, GenerateSolveAndEvaluate) {
  ASSERT_EQ(run("gen --family ellipses --n 3 --m 10 --out d --seed 4", dir_).code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "d" / "mu_0002.csv"));
  ASSERT_EQ(run("bary sua d --S 10 --out b.csv", dir_).code, 0);
  const auto f = run("frechet b.csv d", dir_);
  ASSERT_EQ(f.code, 0);
  EXPECT_GT(std::stod(f.out), 0.0);
  ASSERT_EQ(run("bary exact d/mu_0000.csv d/mu_0001.csv --out e.csv", dir_).code, 0);
  const auto o = run("ot d/mu_0000.csv d/mu_0000.csv --p 2", dir_);
  ASSERT_EQ(o.code, 0);
  EXPECT_EQ(o.out.rfind("W_p^p 0", 0), 0u) << o.out;
}

TEST_F(Cli, SweepIsByteIdenticalAcrossThreads) {
  const std::string base = "sweep --family crescents --n 3 --m 16 --S 4,8 --R 1,2 --reps 3 --seed 9 ";
  ASSERT_EQ(run(base + "--threads 1 --out a.csv --summary as.csv", dir_).code, 0);
  ASSERT_EQ(run(base + "--threads 3 --out b.csv --summary bs.csv", dir_).code, 0);
  EXPECT_EQ(slurp(dir_ / "a.csv"), slurp(dir_ / "b.csv"));
  EXPECT_EQ(slurp(dir_ / "as.csv"), slurp(dir_ / "bs.csv"));
  EXPECT_EQ(slurp(dir_ / "a.csv").substr(0, 40), "S,R,rep,seed,frechet,rel_err,runtime_ms\n");
}

TEST_F(Cli, LpSizeReport) {
  const auto r = run("lpsize --n 100 --grid 256", dir_);
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("(10^15)"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("(10^10)"), std::string::npos) << r.out;
}
