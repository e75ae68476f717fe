#pragma once

#include <stacklq/csv.hpp>
#include <stacklq/montecarlo.hpp>
#include <stacklq/oracle.hpp>
#include <stacklq/riccati.hpp>

#include <memory>
#include <string>
#include <vector>

namespace stacklq::verify {

struct CheckResult {
  std::string id;
  bool passed = false;
  std::string detail;
};

/// Copy of `spec` on a uniform grid with `steps` steps.
GameSpec with_steps(const GameSpec& spec, std::size_t steps);

/// Riccati solve, offsets and feedback law on the spec's solver grid.
std::shared_ptr<const FeedbackLaw> solve_law(const GameSpec& spec, double gain_scale = 1.0);

/// Centered-difference residuals of p, P1, P2, Pf1, Pf2, Pf3 on the spec grid
/// and on the grid with twice the steps; r/h^2 must agree within a factor 4.
CheckResult residual_order(const GameSpec& spec);

/// Changing only the W1 seed leaves Xhat and Xcheck bit-identical; changing
/// only the W2 seed leaves Xcheck bit-identical.
CheckResult measurability(const FeedbackLaw& law, std::uint64_t seed, std::size_t n_paths);

/// Nested-sampling estimate of E[Xhat | G1] against Xcheck at 5 interior nodes,
/// per component within 3 (stderr + 2h).
CheckResult tower(const FeedbackLaw& law, std::size_t n_outer, std::size_t n_inner,
                  std::uint64_t seed, unsigned threads, OracleReport* report = nullptr);

/// Every standard direction passes the slope and curvature tests.
CheckResult variational(const FeedbackLaw& law, int player, const std::vector<double>& epsilons,
                        std::size_t n_paths, std::uint64_t seed, unsigned threads,
                        std::vector<PerturbationReport>* reports = nullptr);

/// Player-1 test on a law whose feedback gains were scaled; passes when the
/// slope test fails for at least one direction.
CheckResult negative_control(const FeedbackLaw& sabotaged, const std::vector<double>& epsilons,
                             std::size_t n_paths, std::uint64_t seed, unsigned threads,
                             std::vector<PerturbationReport>* reports = nullptr);

/// Max node-wise ansatz drift mismatch at `steps` and 2 `steps`; the ratio
/// must lie in [0.25, 0.75].
CheckResult ansatz(const GameSpec& spec, std::size_t steps, std::size_t n_paths,
                   std::uint64_t seed, unsigned threads);

bool reducible(const GameSpec& spec);

/// DP against p(0): gap at h = 1e-3 within 0.01 and first-order shrinkage
/// over h in {1e-2, 5e-3, 2.5e-3}.
CheckResult dp_crosscheck(const GameSpec& spec, std::vector<DpCrosscheck>* rows = nullptr);

std::vector<double> default_epsilons();

}  // namespace stacklq::verify
