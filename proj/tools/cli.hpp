#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace stacklq::cli {

enum ExitCode : int {
  kOk = 0,
  kValidation = 1,
  kParse = 2,
  kBlowUp = 3,
  kVerification = 4,
};

struct RunConfig {
  std::string command;
  std::string spec_path;
  std::string output_dir = "stacklq_out";
  std::uint64_t seed = 42;
  std::size_t n_paths = 1000;
  std::optional<std::size_t> steps;
  std::vector<double> epsilons{-0.2, -0.1, -0.05, 0.0, 0.05, 0.1, 0.2};
  unsigned threads = 1;
  std::size_t dump_paths = 10;  // paths written to paths.csv by simulate
  std::size_t thin = 1;
  std::size_t oracle_outer = 20;
  std::size_t oracle_inner = 500;
  double sabotage = 1.0;  // feedback gain scale, test hook
};

int cmd_validate(const RunConfig& cfg);
int cmd_solve(const RunConfig& cfg);
int cmd_simulate(const RunConfig& cfg);
int cmd_verify(const RunConfig& cfg);

/// Dispatches `cfg.command`, mapping exceptions to exit codes.
int execute(const RunConfig& cfg);

/// Parses argv and runs the subcommand.
int run(int argc, char** argv);

}  // namespace stacklq::cli
