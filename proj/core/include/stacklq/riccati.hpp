#pragma once

#include <stacklq/lift.hpp>
#include <stacklq/trajectory.hpp>

#include <array>
#include <memory>
#include <utility>

namespace stacklq {

/// All Riccati trajectories of the three levels on one solver grid.
struct RiccatiBundle {
  std::shared_ptr<const GameSpec> spec;
  TimeGrid grid;
  MatrixTrajectory p;              // n x n
  MatrixTrajectory P1, P2;         // 2n x 2n
  MatrixTrajectory Pf1, Pf2, Pf3;  // 4n x 4n
};

/// Deterministic offsets. Phi and phi_check are row blocks of Omega.
struct OffsetBundle {
  MatrixTrajectory Omega;      // 4n
  MatrixTrajectory Phi;        // rows [2n, 4n)
  MatrixTrajectory phi_check;  // rows [3n, 4n)
};

/// Every coefficient and Riccati value at one instant.
struct LiftStack {
  CoeffSnapshot c;
  Mat p;
  Level1 l1;
  Level2 l2;
  Mat P1, P2;
  Level2ClosedLoop cl;
  Level3 l3;
  Mat Pf1, Pf2, Pf3;
};

LiftStack lift_at(const RiccatiBundle& bundle, const Instant& at);

// Right-hand sides F of dM/dt = F(t, M). They hold references to their
// arguments, which must outlive the returned function.
RhsFn rhs_p(const GameSpec& spec, const TimeGrid& grid);
RhsFn rhs_P1(const GameSpec& spec, const TimeGrid& grid, const MatrixTrajectory& p);
RhsFn rhs_P2(const GameSpec& spec, const TimeGrid& grid, const MatrixTrajectory& p,
             const MatrixTrajectory& P1);
RhsFn rhs_Pf1(const GameSpec& spec, const TimeGrid& grid, const MatrixTrajectory& p,
              const MatrixTrajectory& P1, const MatrixTrajectory& P2);
RhsFn rhs_Pf2(const GameSpec& spec, const TimeGrid& grid, const MatrixTrajectory& p,
              const MatrixTrajectory& P1, const MatrixTrajectory& P2,
              const MatrixTrajectory& Pf1);
RhsFn rhs_Pf3(const GameSpec& spec, const TimeGrid& grid, const MatrixTrajectory& p,
              const MatrixTrajectory& P1, const MatrixTrajectory& P2,
              const MatrixTrajectory& Pf1, const MatrixTrajectory& Pf2);
RhsFn rhs_Omega(const RiccatiBundle& bundle);

/// Follower Riccati. p is symmetrized after every step.
MatrixTrajectory solve_p(const GameSpec& spec, const TimeGrid& grid);

std::pair<MatrixTrajectory, MatrixTrajectory> solve_P12(const GameSpec& spec,
                                                        const TimeGrid& grid,
                                                        const MatrixTrajectory& p);

std::array<MatrixTrajectory, 3> solve_P123(const GameSpec& spec, const TimeGrid& grid,
                                           const MatrixTrajectory& p, const MatrixTrajectory& P1,
                                           const MatrixTrajectory& P2);

/// Full sequential solve p -> (P1, P2) -> (Pf1, Pf2, Pf3) on `grid`
/// (defaults to the spec's solver grid).
RiccatiBundle solve_riccati(const GameSpec& spec);
RiccatiBundle solve_riccati(const GameSpec& spec, const TimeGrid& grid);

OffsetBundle solve_offsets(const RiccatiBundle& bundle);

/// Centered-difference residual maxima of every solved equation.
struct ResidualReport {
  double p = 0, P1 = 0, P2 = 0, Pf1 = 0, Pf2 = 0, Pf3 = 0, Omega = 0;
};

ResidualReport residuals(const RiccatiBundle& bundle, const OffsetBundle& offsets);

}  // namespace stacklq
