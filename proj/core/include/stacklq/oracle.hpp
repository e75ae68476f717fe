#pragma once

#include <stacklq/model.hpp>

#include <vector>

namespace stacklq {

/// Discrete-time LQ problem with one controller:
///   x_{k+1} = A_k x_k + B_k v_k + c_k + (C_k x_k + s_k) xi_k,  E xi_k = 0, E xi_k^2 = var_k
/// stage cost 1/2 (x'Q_k x + v'R_k v + 2 q_k'x + 2 r_k'v), terminal 1/2 x'G x.
struct DiscreteLQ {
  std::size_t steps = 0;
  std::vector<Mat> A, B, C, Q, R;
  std::vector<Vec> c, s, q, r;
  std::vector<double> var;
  Mat G;
  Vec x0;
};

/// Euler discretization of Player 1's problem with the leaders' controls off,
/// on `grid`. Applicable only when B2 = B3 = 0, C1 = C2 = 0 and
/// sigma1 = sigma2 = 0 everywhere; otherwise throws ReductionNotApplicable.
DiscreteLQ reduce_to_single_player(const GameSpec& spec, const TimeGrid& grid);

/// Value V_k(x) = 1/2 x'S_k x + s_k'x + kappa_k and optimal v_k = L_k x + l_k.
struct DpSolution {
  std::vector<Mat> S;
  std::vector<Vec> s;
  std::vector<double> kappa;
  std::vector<Mat> L;
  std::vector<Vec> l;

  double value(std::size_t k, const Vec& x) const {
    return 0.5 * x.dot(S[k] * x) + s[k].dot(x) + kappa[k];
  }
};

/// Exact backward recursion. Throws InfeasibleError if R_k + B_k'S_{k+1}B_k is
/// not positive definite.
DpSolution solve_dp(const DiscreteLQ& d);

struct DpCrosscheck {
  double h = 0.0;
  double S0 = 0.0, p0 = 0.0;  // entry of largest gap
  double gap_S0 = 0.0;        // max |S_0 - p(0)|
  double value_dp = 0.0;
  double value_continuous = 0.0;  // 1/2 x0'p(0)x0 + phi(0)'x0 + kappa(0)
  double gap_value = 0.0;
  double max_relative_gap = 0.0;
};

/// Solves the reduction on `grid` by DP and compares with the follower Riccati
/// solution and its value offsets on the same grid.
DpCrosscheck crosscheck_p(const GameSpec& spec, const TimeGrid& grid);

}  // namespace stacklq
