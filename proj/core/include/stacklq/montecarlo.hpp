#pragma once

#include <stacklq/closedloop.hpp>
#include <stacklq/response.hpp>

#include <string>
#include <vector>

namespace stacklq {

struct CostEstimate {
  int player = 0;
  double mean = 0.0;
  double std_error = 0.0;  // sample standard deviation / sqrt(n_paths)
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  std::size_t grid_steps = 0;
};

/// Mean and standard error of per-path samples, summed in index order.
std::pair<double, double> mean_and_stderr(const std::vector<double>& samples);

/// Left-endpoint quadrature of player i's running cost plus the terminal term
/// along one path. `nodes` are the coefficient snapshots of the path's grid.
double path_cost(const std::vector<CoeffSnapshot>& nodes, const TimeGrid& grid, int player,
                 const Mat& x, const Mat& v);

/// Throws DomainError if the bundle was simulated on another grid than `grid`.
CostEstimate estimate_cost(const GameSpec& spec, const TimeGrid& grid, int player,
                           const PathBundle& bundle);

/// Perturbation directions used by the variational test. Every direction is an
/// affine control of the Player-1 filter, so it is admissible for all players.
enum class DirectionKind { Constant, Ramp, Sine, Indicator, Feedback };

struct Direction {
  std::string id;
  DirectionKind kind = DirectionKind::Constant;
  Vec u;  // output direction, n

  /// Gain of the direction at an instant of `grid`. The indicator of [0, T/2)
  /// is evaluated at the interval midpoint so it is constant on each step.
  ControlGain gain(const TimeGrid& grid, const Instant& at) const;
};

/// constant, t/T, sin(2 pi t/T), 1[0,T/2) and linear feedback on the filtered
/// state, all along u = (1, ..., 1)/sqrt(n).
std::vector<Direction> standard_directions(int n);

struct PerturbationReport {
  int player = 0;
  std::string direction_id;
  std::vector<double> epsilons;
  std::vector<CostEstimate> costs;  // one per epsilon
  double slope0 = 0.0;
  double slope_stderr = 0.0;
  bool curvature_ok = false;

  bool slope_ok() const { return std::abs(slope0) <= 2.0 * slope_stderr; }
  bool passed() const { return slope_ok() && curvature_ok; }
};

/// Perturbs player i's equilibrium control by eps * direction with common
/// random numbers across eps. Player 1 faces the leaders' realized controls;
/// for Player 2 Player 1 re-responds, for Player 3 Players 1 and 2 re-respond.
/// Responses are affine in eps, so only eps = 0 and the largest |eps| are
/// simulated and the rest interpolated. Epsilons must be symmetric about 0 and
/// contain 0 (DomainError otherwise).
std::vector<PerturbationReport> variational_test(const FeedbackLaw& law, int player,
                                                 const std::vector<Direction>& directions,
                                                 const std::vector<double>& epsilons,
                                                 const NoiseSource& noise, std::size_t n_paths,
                                                 unsigned threads = 1);

enum class SigmaField { G1, G2 };

/// Nested-sampling estimate of conditional expectations at one node for one
/// outer draw. For G1, `filter` is Xcheck and `mean_X`/`mean_Xh` estimate
/// E[X | G1] and E[Xhat | G1]; for G2, `filter` is Xhat and only `mean_X` is set.
struct OracleSample {
  std::size_t node = 0;
  double t = 0.0;
  std::size_t outer = 0;
  Vec filter;
  Vec mean_X, stderr_X;
  Vec mean_Xh, stderr_Xh;
};

struct OracleReport {
  SigmaField field = SigmaField::G1;
  std::size_t n_outer = 0, n_inner = 0;
  std::vector<OracleSample> samples;  // outer-major, then node order
};

/// Fixes the W3 path (G1) or the (W2, W3) paths (G2) of outer draw o and
/// averages n_inner full simulations over fresh draws of the remaining
/// channels. Throws DomainError if n_inner < 100.
OracleReport particle_filter(const FeedbackLaw& law, const std::vector<std::size_t>& nodes,
                             SigmaField field, std::size_t n_outer, std::size_t n_inner,
                             const NoiseSource& noise, unsigned threads = 1);

/// Drift mismatch of ytilde = -p xcheck - phicheck, written through the
/// lifted filter as -Lambda Xcheck - ell, against the filtered adjoint drift
/// -(A' y + sum C_i' z_i - Q1 x - m1). rms[k] is the root mean square over paths
/// at node k; max_rms the maximum over nodes.
struct AnsatzResidual {
  std::vector<double> rms;
  double max_rms = 0.0;
};

AnsatzResidual ansatz_residual(const FeedbackLaw& law, const NoiseSource& noise,
                               std::size_t n_paths, unsigned threads = 1);

}  // namespace stacklq
