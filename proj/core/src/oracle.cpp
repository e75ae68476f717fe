#include <stacklq/oracle.hpp>

#include <stacklq/lift.hpp>
#include <stacklq/riccati.hpp>

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace stacklq {

namespace {

bool all_zero(const TimeFunction& f) {
  for (const Mat& v : f.values()) {
    if (v.size() > 0 && v.cwiseAbs().maxCoeff() != 0.0) return false;
  }
  return true;
}

}  // namespace

DiscreteLQ reduce_to_single_player(const GameSpec& spec, const TimeGrid& grid) {
  const CoefficientSet& cs = spec.coeffs;
  const std::pair<const TimeFunction*, const char*> required_zero[] = {
      {&cs.B[1], "B2"},     {&cs.B[2], "B3"},     {&cs.C[0], "C1"},
      {&cs.C[1], "C2"},     {&cs.sigma[0], "sigma1"}, {&cs.sigma[1], "sigma2"},
  };
  for (const auto& [f, name] : required_zero) {
    if (!all_zero(*f)) {
      throw ReductionNotApplicable(std::string("single-player reduction needs ") + name +
                                   " = 0 on the whole horizon");
    }
  }
  const int n = spec.n;
  const Mat I = Mat::Identity(n, n);
  DiscreteLQ d;
  d.steps = grid.steps();
  d.x0 = spec.x0;
  for (std::size_t k = 0; k < d.steps; ++k) {
    const CoeffSnapshot c = snapshot(spec, grid, node_instant(grid, k));
    const double h = grid.step(k);
    d.A.push_back(I + h * c.A);
    d.B.push_back(h * c.B[0]);
    d.c.push_back(h * c.b);
    d.C.push_back(c.C[2]);
    d.s.push_back(c.sigma[2]);
    d.var.push_back(h);
    d.Q.push_back(h * c.Q[0]);
    d.R.push_back(h * c.R[0]);
    d.q.push_back(h * c.m[0]);
    d.r.push_back(h * c.nvec[0]);
  }
  d.G = spec.costs.player[0].G;
  return d;
}

DpSolution solve_dp(const DiscreteLQ& d) {
  const std::size_t N = d.steps;
  DpSolution out;
  out.S.resize(N + 1);
  out.s.resize(N + 1);
  out.kappa.resize(N + 1);
  out.L.resize(N);
  out.l.resize(N);
  const Eigen::Index n = d.G.rows();
  out.S[N] = d.G;
  out.s[N] = Vec::Zero(n);
  out.kappa[N] = 0.0;
  for (std::size_t k = N; k-- > 0;) {
    const Mat& S = out.S[k + 1];
    const Vec& s = out.s[k + 1];
    const Mat& A = d.A[k];
    const Mat& B = d.B[k];
    const Vec Sc_s = S * d.c[k] + s;
    const Mat Hvv = d.R[k] + B.transpose() * S * B;
    const Mat Hvx = B.transpose() * S * A;
    const Mat Hxx = d.Q[k] + A.transpose() * S * A + d.var[k] * d.C[k].transpose() * S * d.C[k];
    const Vec gv = d.r[k] + B.transpose() * Sc_s;
    const Vec gx = d.q[k] + A.transpose() * Sc_s + d.var[k] * d.C[k].transpose() * S * d.s[k];
    const double c0 = 0.5 * d.c[k].dot(S * d.c[k]) + s.dot(d.c[k]) + out.kappa[k + 1] +
                      0.5 * d.var[k] * d.s[k].dot(S * d.s[k]);
    const Eigen::LLT<Mat> llt(0.5 * (Hvv + Hvv.transpose()));
    if (llt.info() != Eigen::Success) {
      throw InfeasibleError("R_k + B_k'S_{k+1}B_k is not positive definite at step " +
                            std::to_string(k));
    }
    out.L[k] = -llt.solve(Hvx);
    out.l[k] = -llt.solve(gv);
    Mat Sk = Hxx + Hvx.transpose() * out.L[k];
    out.S[k] = 0.5 * (Sk + Sk.transpose());
    out.s[k] = gx + Hvx.transpose() * out.l[k];
    out.kappa[k] = c0 + 0.5 * gv.dot(out.l[k]);
  }
  return out;
}

DpCrosscheck crosscheck_p(const GameSpec& spec, const TimeGrid& grid) {
  const DiscreteLQ d = reduce_to_single_player(spec, grid);
  const DpSolution dp = solve_dp(d);
  const MatrixTrajectory p = solve_p(spec, grid);
  const int n = spec.n;

  // [phi; kappa] of the continuous value 1/2 x'p x + phi'x + kappa.
  RhsFn rhs = [&spec, &grid, &p, n](const Instant& at, const Mat& W) -> Mat {
    const CoeffSnapshot c = snapshot(spec, grid, at);
    const Mat pt = p.at(at);
    const Level1 l1 = build_level1(c, pt);
    const Vec phi = W.col(0).head(n);
    const Vec u = c.B[0].transpose() * phi + c.nvec[0];
    double sig = 0.0;
    for (int i = 0; i < 3; ++i) sig += c.sigma[i].dot(pt * c.sigma[i]);
    Mat out(n + 1, 1);
    out.col(0).head(n) = -(l1.Abar.transpose() * phi + l1.f1bar);
    out(n, 0) = -(phi.dot(c.b) + 0.5 * sig - 0.5 * u.dot(c.Rinv[0] * u));
    return out;
  };
  const MatrixTrajectory off = integrate_backward(rhs, Mat::Zero(n + 1, 1), grid, "value offset");

  DpCrosscheck r;
  r.h = grid.step(0);
  const Mat diff = dp.S[0] - p.front();
  Eigen::Index i = 0, j = 0;
  r.gap_S0 = diff.cwiseAbs().maxCoeff(&i, &j);
  r.S0 = dp.S[0](i, j);
  r.p0 = p.front()(i, j);
  const Vec phi0 = off.front().col(0).head(n);
  const double kappa0 = off.front()(n, 0);
  r.value_dp = dp.value(0, spec.x0);
  r.value_continuous = 0.5 * spec.x0.dot(p.front() * spec.x0) + phi0.dot(spec.x0) + kappa0;
  r.gap_value = std::abs(r.value_dp - r.value_continuous);
  const double scale_S = std::max(1.0, p.front().cwiseAbs().maxCoeff());
  const double scale_V = std::max(1.0, std::abs(r.value_continuous));
  r.max_relative_gap = std::max(r.gap_S0 / scale_S, r.gap_value / scale_V);
  return r;
}

}  // namespace stacklq
