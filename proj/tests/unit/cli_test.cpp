#include "test_util.hpp"

#include "cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace stacklq;
using stacklq::test::data_path;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("stacklq_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write_zero_spec() {
    const std::string path = (dir_ / "zero.json").string();
    std::ofstream(path) << serialize_spec(zero_spec(1, 1.0, 20));
    return path;
  }

  cli::RunConfig config(const std::string& command, const std::string& spec,
                        const std::string& out = "out") {
    cli::RunConfig c;
    c.command = command;
    c.spec_path = spec;
    c.output_dir = (dir_ / out).string();
    return c;
  }

  std::string read(const std::string& out, const std::string& file) {
    std::ifstream in(dir_ / out / file, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  fs::path dir_;
};

std::vector<std::vector<std::string>> rows(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    out.push_back(cells);
  }
  return out;
}

}  // namespace

TEST_F(CliTest, ValidateZeroSpecSucceeds) {
  EXPECT_EQ(cli::execute(config("validate", write_zero_spec())), cli::kOk);
}

TEST_F(CliTest, ValidateNegativeR2Fails) {
  EXPECT_EQ(cli::execute(config("validate", data_path("invalid_r2.json"))), cli::kValidation);
  EXPECT_NE(read("out", "validation_report.txt").find("R2"), std::string::npos);
}

TEST_F(CliTest, MalformedDocumentIsParseError) {
  EXPECT_EQ(cli::execute(config("validate", data_path("malformed.json"))), cli::kParse);
  EXPECT_EQ(cli::execute(config("solve", data_path("malformed.json"))), cli::kParse);
}

TEST_F(CliTest, ArgumentErrorsAreParseErrors) {
  const char* argv[] = {"stacklq", "solve"};
  EXPECT_EQ(cli::run(2, const_cast<char**>(argv)), cli::kParse);
  const char* argv2[] = {"stacklq", "simulate", "--spec", "x.json", "--paths", "0"};
  EXPECT_EQ(cli::run(6, const_cast<char**>(argv2)), cli::kParse);
}

TEST_F(CliTest, SolveZeroSpecWritesZeros) {
  ASSERT_EQ(cli::execute(config("solve", write_zero_spec())), cli::kOk);
  for (const char* f : {"p.csv", "P1.csv", "P2.csv", "Pf1.csv", "Pf2.csv", "Pf3.csv",
                        "Omega.csv", "gains.csv"}) {
    for (const auto& r : rows(read("out", f))) EXPECT_EQ(std::stod(r.back()), 0.0) << f;
  }
}

TEST_F(CliTest, SolveClosedForm) {
  ASSERT_EQ(cli::execute(config("solve", data_path("closed_form_scalar.json"))), cli::kOk);
  const auto p = rows(read("out", "p.csv"));
  ASSERT_FALSE(p.empty());
  EXPECT_EQ(std::stod(p.front()[0]), 0.0);
  EXPECT_NEAR(std::stod(p.front().back()), 0.5, 1e-8);
}

TEST_F(CliTest, GainsCoverEveryNode) {
  ASSERT_EQ(cli::execute(config("solve", data_path("piecewise_scalar.json"))), cli::kOk);
  std::set<std::string> times;
  for (const auto& r : rows(read("out", "gains.csv"))) times.insert(r[0]);
  // 50 uniform steps plus the breakpoint at 0.37.
  EXPECT_EQ(times.size(), 52u);
}

TEST_F(CliTest, SimulateZeroSpecCostsNothing) {
  ASSERT_EQ(cli::execute(config("simulate", write_zero_spec())), cli::kOk);
  const auto c = rows(read("out", "costs.csv"));
  ASSERT_EQ(c.size(), 3u);
  for (const auto& r : c) {
    EXPECT_EQ(std::stod(r[1]), 0.0);
    EXPECT_EQ(std::stod(r[2]), 0.0);
  }
}

TEST_F(CliTest, SimulateIsBitReproducible) {
  auto a = config("simulate", data_path("generic_2d.json"), "a");
  auto b = config("simulate", data_path("generic_2d.json"), "b");
  a.n_paths = b.n_paths = 300;
  b.threads = 3;
  ASSERT_EQ(cli::execute(a), cli::kOk);
  ASSERT_EQ(cli::execute(b), cli::kOk);
  for (const char* f : {"costs.csv", "paths.csv", "summary.txt"}) {
    EXPECT_EQ(read("a", f), read("b", f)) << f;
  }
}

TEST_F(CliTest, SabotagedVerifyFails) {
  auto c = config("verify", data_path("variational_scalar.json"));
  c.steps = 60;
  c.n_paths = 2000;
  c.oracle_outer = 2;
  c.oracle_inner = 100;
  c.sabotage = 1.5;
  EXPECT_EQ(cli::execute(c), cli::kVerification);
  EXPECT_NE(read("out", "verify_report.json").find("variational_player1"), std::string::npos);
}

TEST_F(CliTest, BlowUpHasOwnExitCode) {
  // A strongly unstable uncontrolled Riccati overflows within the horizon.
  GameSpec s = zero_spec(1, 1.0, 50);
  s.coeffs.A = TimeFunction::constant(Mat::Constant(1, 1, 30.0));
  s.costs.player[0].G = Mat::Ones(1, 1);
  const std::string path = (dir_ / "unstable.json").string();
  std::ofstream(path) << serialize_spec(s);
  EXPECT_EQ(cli::execute(config("solve", path)), cli::kBlowUp);
}
