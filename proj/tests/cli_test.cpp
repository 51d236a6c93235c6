#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;

const std::string kCli = LOCOMIP_CLI;
const std::string kScenarios = LOCOMIP_SCENARIO_DIR;

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("locomip_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string flat_args(const fs::path& out) const {
    return kScenarios + "/flat/terrain.json " + kScenarios + "/robots/quadruped.json " +
           kScenarios + "/flat/task.json " + out.string() + " --gait walk --workers 1 --seed 7";
  }
  std::string check_args(const fs::path& plan) const {
    return "validate " + plan.string() + " " + kScenarios + "/flat/terrain.json " + kScenarios +
           "/robots/quadruped.json";
  }

  fs::path dir_;
};

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("plan"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("plan /nonexistent/t.json /nonexistent/r.json /nonexistent/k.json " +
                dir_.string()),
            2);
}

TEST_F(Cli, PlanValidateAndTamper) {
  const fs::path out = dir_ / "walk";
  ASSERT_EQ(run("plan " + flat_args(out)), 0);
  for (const char* f : {"plan.json", "com.csv", "forces.csv", "alpha.csv", "torque.csv", "feet.csv"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  EXPECT_EQ(run(check_args(out / "plan.json")), 0);

  nlohmann::json doc = nlohmann::json::parse(slurp(out / "plan.json"));
  nlohmann::json& fz = doc["leg_data"][0]["force"][1][2];
  fz = fz.get<double>() * 2.0 + 10.0;
  {
    std::ofstream o(dir_ / "tampered.json");
    o << doc.dump();
  }
  EXPECT_EQ(run(check_args(dir_ / "tampered.json")), 5);

  doc["version"] = 42;
  {
    std::ofstream o(dir_ / "future.json");
    o << doc.dump();
  }
  EXPECT_EQ(run(check_args(dir_ / "future.json")), 2);
}

TEST_F(Cli, ExportsAreDeterministic) {
  ASSERT_EQ(run("plan " + flat_args(dir_ / "a")), 0);
  ASSERT_EQ(run("plan " + flat_args(dir_ / "b")), 0);
  int files = 0;
  for (const auto& entry : fs::directory_iterator(dir_ / "a")) {
    const fs::path other = dir_ / "b" / entry.path().filename();
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(slurp(entry.path()), slurp(other)) << entry.path().filename();
    ++files;
  }
  EXPECT_GE(files, 5);
}

TEST_F(Cli, BenchWritesRows) {
  const fs::path csv = dir_ / "bench.csv";
  ASSERT_EQ(run("bench " + kScenarios + "/bench_quick.json " + csv.string() + " --repeats 1"), 0);
  const std::string text = slurp(csv);
  EXPECT_EQ(text.rfind("scenario,gait,angular_dynamics,repeats,mean_time_s", 0), 0u);
  EXPECT_NE(text.find("\nflat-walk,"), std::string::npos);
  EXPECT_NE(text.find("\nflat-walk-linear,"), std::string::npos);
  EXPECT_NE(text.find("\nexp4-walk,"), std::string::npos);
}

}  // namespace
