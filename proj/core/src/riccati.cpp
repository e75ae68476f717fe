#include <stacklq/riccati.hpp>

#include "log.hpp"

#include <cmath>

namespace stacklq {

namespace {

struct Upto2 {
  CoeffSnapshot c;
  Level1 l1;
  Level2 l2;
};

Upto2 level2_at(const GameSpec& spec, const TimeGrid& grid, const MatrixTrajectory& p,
                const Instant& at) {
  Upto2 s{snapshot(spec, grid, at), {}, {}};
  s.l1 = build_level1(s.c, p.at(at));
  s.l2 = build_level2(s.c, s.l1);
  return s;
}

struct Upto3 {
  CoeffSnapshot c;
  Level2 l2;
  Level3 l3;
};

Upto3 level3_at(const GameSpec& spec, const TimeGrid& grid, const MatrixTrajectory& p,
                const MatrixTrajectory& P1, const MatrixTrajectory& P2, const Instant& at) {
  Upto2 s = level2_at(spec, grid, p, at);
  const Level2ClosedLoop cl = build_level2_closedloop(s.c, s.l2, P1.at(at), P2.at(at));
  Level3 l3 = build_level3(s.c, s.l2, cl);
  return Upto3{std::move(s.c), std::move(s.l2), std::move(l3)};
}

void symmetrize(Mat& m) { m = 0.5 * (m + m.transpose()).eval(); }

}  // namespace

LiftStack lift_at(const RiccatiBundle& b, const Instant& at) {
  LiftStack s;
  s.c = snapshot(*b.spec, b.grid, at);
  s.p = b.p.at(at);
  s.l1 = build_level1(s.c, s.p);
  s.l2 = build_level2(s.c, s.l1);
  s.P1 = b.P1.at(at);
  s.P2 = b.P2.at(at);
  s.cl = build_level2_closedloop(s.c, s.l2, s.P1, s.P2);
  s.l3 = build_level3(s.c, s.l2, s.cl);
  s.Pf1 = b.Pf1.at(at);
  s.Pf2 = b.Pf2.at(at);
  s.Pf3 = b.Pf3.at(at);
  return s;
}

RhsFn rhs_p(const GameSpec& spec, const TimeGrid& grid) {
  return [&spec, &grid](const Instant& at, const Mat& p) -> Mat {
    const CoeffSnapshot c = snapshot(spec, grid, at);
    const Mat S1 = c.B[0] * c.Rinv[0] * c.B[0].transpose();
    Mat r = p * c.A + c.A.transpose() * p - p * S1 * p + c.Q[0];
    for (int i = 0; i < 3; ++i) r += c.C[i].transpose() * p * c.C[i];
    return -r;
  };
}

RhsFn rhs_P1(const GameSpec& spec, const TimeGrid& grid, const MatrixTrajectory& p) {
  return [&spec, &grid, &p](const Instant& at, const Mat& P1) -> Mat {
    const Upto2 s = level2_at(spec, grid, p, at);
    const Level2& l = s.l2;
    Mat r = P1 * l.calA1 + l.calA1.transpose() * P1 - P1 * l.K * P1 + l.calQ2;
    for (int i = 0; i < 3; ++i) r += l.calC[i].transpose() * P1 * l.calC[i];
    return -r;
  };
}

RhsFn rhs_P2(const GameSpec& spec, const TimeGrid& grid, const MatrixTrajectory& p,
             const MatrixTrajectory& P1t) {
  return [&spec, &grid, &p, &P1t](const Instant& at, const Mat& P2) -> Mat {
    const Upto2 s = level2_at(spec, grid, p, at);
    const Level2& l = s.l2;
    const Mat P1 = P1t.at(at);
    const Mat A12 = l.calA1 + l.calA2 - l.L;
    const Mat A2L = l.calA2 - l.L;
    const Mat FK = l.calF1 - l.K;
    Mat r = P2 * A12 + A12.transpose() * P2 + P2 * FK * P2 + P1 * FK * P2 + P2 * FK * P1 +
            P1 * l.calF1 * P1 + P1 * A2L + A2L.transpose() * P1 +
            l.calC[2].transpose() * P2 * l.calC[2] - l.F2RF2;
    return -r;
  };
}

RhsFn rhs_Pf1(const GameSpec& spec, const TimeGrid& grid, const MatrixTrajectory& p,
              const MatrixTrajectory& P1, const MatrixTrajectory& P2) {
  return [&spec, &grid, &p, &P1, &P2](const Instant& at, const Mat& Pf1) -> Mat {
    const Upto3 s = level3_at(spec, grid, p, P1, P2, at);
    const Level3& l = s.l3;
    const Mat& R3inv = s.c.Rinv[2];
    const Mat D = l.frakA1 - l.frakB3 * R3inv * l.frakE.transpose();
    Mat r = Pf1 * D + D.transpose() * Pf1 - Pf1 * l.M * Pf1 + l.frakQ -
            l.frakE * R3inv * l.frakE.transpose();
    for (int i = 0; i < 3; ++i) r += l.frakC[i].transpose() * Pf1 * l.frakC[i];
    return -r;
  };
}

RhsFn rhs_Pf2(const GameSpec& spec, const TimeGrid& grid, const MatrixTrajectory& p,
              const MatrixTrajectory& P1, const MatrixTrajectory& P2,
              const MatrixTrajectory& Pf1t) {
  return [&spec, &grid, &p, &P1, &P2, &Pf1t](const Instant& at, const Mat& Pf2) -> Mat {
    const Upto3 s = level3_at(spec, grid, p, P1, P2, at);
    const Level3& l = s.l3;
    const Mat& R3inv = s.c.Rinv[2];
    const Mat Pf1 = Pf1t.at(at);
    const Mat S2 = Pf1 + Pf2;
    const Mat D = l.frakA1 - l.frakB3 * R3inv * l.frakE.transpose();
    Mat r = Pf2 * D + D.transpose() * Pf2 + S2 * l.frakA2 + l.frakA2.transpose() * S2 +
            S2 * l.frakFhat * S2 - Pf1 * l.M * Pf2 - Pf2 * l.M * Pf1 - Pf2 * l.M * Pf2 +
            l.frakQhat;
    for (int i = 1; i < 3; ++i) r += l.frakC[i].transpose() * Pf2 * l.frakC[i];
    return -r;
  };
}

RhsFn rhs_Pf3(const GameSpec& spec, const TimeGrid& grid, const MatrixTrajectory& p,
              const MatrixTrajectory& P1, const MatrixTrajectory& P2,
              const MatrixTrajectory& Pf1t, const MatrixTrajectory& Pf2t) {
  return [&spec, &grid, &p, &P1, &P2, &Pf1t, &Pf2t](const Instant& at, const Mat& Pf3) -> Mat {
    const Upto3 s = level3_at(spec, grid, p, P1, P2, at);
    const Level3& l = s.l3;
    const Mat& R = s.c.Rinv[2];
    const Mat Pf1 = Pf1t.at(at);
    const Mat Pf2 = Pf2t.at(at);
    const Mat S2 = Pf1 + Pf2;
    const Mat S3 = S2 + Pf3;
    const Mat& B = l.frakB3;
    const Mat& E = l.frakE;
    const Mat& Ec = l.frakEcheck;
    // Closed-loop drift coefficients of X and Xhat, and of Xcheck in X.
    const Mat a12 = l.frakA1 + l.frakA2 - l.M * S2 - B * R * E.transpose() + l.frakFhat * S2;
    const Mat a3 = l.frakA3 + l.frakFhat * Pf3 + l.frakFcheck * S3 - l.M * Pf3 -
                   B * R * Ec.transpose();
    Mat r = S2 * a3 + Pf3 * (a12 + a3) + (l.frakA1 + l.frakA2).transpose() * Pf3 +
            l.frakA3.transpose() * S3 + l.frakC[2].transpose() * Pf3 * l.frakC[2] -
            E * R * B.transpose() * Pf3 - Ec * R * B.transpose() * S3 -
            E * R * Ec.transpose() - Ec * R * (E + Ec).transpose();
    return -r;
  };
}

RhsFn rhs_Omega(const RiccatiBundle& b) {
  return [&b](const Instant& at, const Mat& Omega) -> Mat {
    const LiftStack s = lift_at(b, at);
    const Level3& l = s.l3;
    const Mat& R = s.c.Rinv[2];
    const Mat S2 = s.Pf1 + s.Pf2;
    const Mat S3 = S2 + s.Pf3;
    const Mat EE = l.frakE + l.frakEcheck;
    const Mat coef = (l.frakA1 + l.frakA2 + l.frakA3).transpose() +
                     S3 * (l.frakFhat + l.frakFcheck - l.M) - EE * R * l.frakB3.transpose();
    const Vec Rn3 = R * s.c.nvec[2];
    Vec src = S3 * (l.frakb - l.frakB3 * Rn3) - EE * Rn3 + l.frakf +
              l.frakC[0].transpose() * (s.Pf1 * l.Sigma[0]) +
              l.frakC[1].transpose() * (S2 * l.Sigma[1]) +
              l.frakC[2].transpose() * (S3 * l.Sigma[2]);
    return -(coef * Omega + src);
  };
}

MatrixTrajectory solve_p(const GameSpec& spec, const TimeGrid& grid) {
  MatrixTrajectory p =
      integrate_backward(rhs_p(spec, grid), spec.costs.player[0].G, grid, "p", symmetrize);
  for (std::size_t k = 0; k < p.size(); ++k) {
    const Mat& v = p.value(k);
    if ((v - v.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
      throw ConsistencyError("p lost symmetry at node " + std::to_string(k));
    }
  }
  return p;
}

std::pair<MatrixTrajectory, MatrixTrajectory> solve_P12(const GameSpec& spec,
                                                        const TimeGrid& grid,
                                                        const MatrixTrajectory& p) {
  const int n = spec.n;
  const Mat G2 = block_diag(spec.costs.player[1].G, Mat::Zero(n, n));
  MatrixTrajectory P1 = integrate_backward(rhs_P1(spec, grid, p), G2, grid, "P1");
  MatrixTrajectory P2 =
      integrate_backward(rhs_P2(spec, grid, p, P1), Mat::Zero(2 * n, 2 * n), grid, "P2");
  return {std::move(P1), std::move(P2)};
}

std::array<MatrixTrajectory, 3> solve_P123(const GameSpec& spec, const TimeGrid& grid,
                                           const MatrixTrajectory& p, const MatrixTrajectory& P1,
                                           const MatrixTrajectory& P2) {
  const int n = spec.n;
  const Mat Z4 = Mat::Zero(4 * n, 4 * n);
  Mat G3 = Z4;
  G3.topLeftCorner(n, n) = spec.costs.player[2].G;
  MatrixTrajectory Pf1 = integrate_backward(rhs_Pf1(spec, grid, p, P1, P2), G3, grid, "Pf1");
  MatrixTrajectory Pf2 =
      integrate_backward(rhs_Pf2(spec, grid, p, P1, P2, Pf1), Z4, grid, "Pf2");
  MatrixTrajectory Pf3 =
      integrate_backward(rhs_Pf3(spec, grid, p, P1, P2, Pf1, Pf2), Z4, grid, "Pf3");
  return {std::move(Pf1), std::move(Pf2), std::move(Pf3)};
}

RiccatiBundle solve_riccati(const GameSpec& spec) {
  return solve_riccati(spec, spec.solver_grid());
}

RiccatiBundle solve_riccati(const GameSpec& spec, const TimeGrid& grid) {
  RiccatiBundle b;
  b.spec = std::make_shared<const GameSpec>(spec);
  b.grid = grid;
  const GameSpec& s = *b.spec;
  log::debug("solving Riccati systems on {} steps (n={})", grid.steps(), s.n);
  b.p = solve_p(s, b.grid);
  std::tie(b.P1, b.P2) = solve_P12(s, b.grid, b.p);
  auto pf = solve_P123(s, b.grid, b.p, b.P1, b.P2);
  b.Pf1 = std::move(pf[0]);
  b.Pf2 = std::move(pf[1]);
  b.Pf3 = std::move(pf[2]);
  return b;
}

OffsetBundle solve_offsets(const RiccatiBundle& bundle) {
  const int n = bundle.spec->n;
  OffsetBundle o;
  o.Omega = integrate_backward(rhs_Omega(bundle), Mat::Zero(4 * n, 1), bundle.grid, "Omega");
  o.Phi = o.Omega.block_rows(2 * n, 2 * n);
  o.phi_check = o.Omega.block_rows(3 * n, n);
  return o;
}

ResidualReport residuals(const RiccatiBundle& b, const OffsetBundle& o) {
  const GameSpec& s = *b.spec;
  const std::vector<double> skip = s.breakpoints();
  ResidualReport r;
  r.p = centered_residual(b.p, rhs_p(s, b.grid), skip);
  r.P1 = centered_residual(b.P1, rhs_P1(s, b.grid, b.p), skip);
  r.P2 = centered_residual(b.P2, rhs_P2(s, b.grid, b.p, b.P1), skip);
  r.Pf1 = centered_residual(b.Pf1, rhs_Pf1(s, b.grid, b.p, b.P1, b.P2), skip);
  r.Pf2 = centered_residual(b.Pf2, rhs_Pf2(s, b.grid, b.p, b.P1, b.P2, b.Pf1), skip);
  r.Pf3 = centered_residual(b.Pf3, rhs_Pf3(s, b.grid, b.p, b.P1, b.P2, b.Pf1, b.Pf2), skip);
  r.Omega = centered_residual(o.Omega, rhs_Omega(b), skip);
  return r;
}

}  // namespace stacklq
