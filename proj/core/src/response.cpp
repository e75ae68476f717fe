#include <stacklq/response.hpp>

#include "parallel.hpp"

namespace stacklq {

namespace {

std::vector<ControlGain> tabulate(const ControlProcess& v, const TimeGrid& g) {
  std::vector<ControlGain> out;
  out.reserve(g.nodes().size());
  for (std::size_t k = 0; k < g.nodes().size(); ++k) out.push_back(v.gain(node_instant(g, k)));
  return out;
}

void split_columns(const MatrixTrajectory& packed, std::initializer_list<Eigen::Index> widths,
                   std::initializer_list<MatrixTrajectory*> outs) {
  Eigen::Index c0 = 0;
  auto out = outs.begin();
  for (Eigen::Index w : widths) {
    MatrixTrajectory t(packed.grid(), packed.rows(), w);
    for (std::size_t k = 0; k < packed.size(); ++k) t.value(k) = packed.value(k).middleCols(c0, w);
    for (std::size_t k = 0; k + 1 < packed.size(); ++k) {
      t.set_derivatives(k, packed.d_left(k).middleCols(c0, w), packed.d_right(k).middleCols(c0, w));
    }
    **out = std::move(t);
    ++out;
    c0 += w;
  }
}

// Control gains as maps on u, whose first 3d entries are (X, Xhat, Xcheck).
AffineMap full_map(const ControlGain& g, Eigen::Index m) {
  const Eigen::Index d = g.K.cols();
  AffineMap a{Mat::Zero(g.K.rows(), m), g.k};
  a.L.middleCols(0, d) = g.K;
  a.L.middleCols(d, d) = g.Khat;
  a.L.middleCols(2 * d, d) = g.Kcheck;
  return a;
}

AffineMap g2_filter_map(const ControlGain& g, Eigen::Index m) {
  const Eigen::Index d = g.K.cols();
  AffineMap a{Mat::Zero(g.K.rows(), m), g.k};
  a.L.middleCols(d, d) = g.K + g.Khat;
  a.L.middleCols(2 * d, d) = g.Kcheck;
  return a;
}

AffineMap g1_filter_map(const ControlGain& g, Eigen::Index m) {
  const Eigen::Index d = g.K.cols();
  AffineMap a{Mat::Zero(g.K.rows(), m), g.k};
  a.L.middleCols(2 * d, d) = g.K + g.Khat + g.Kcheck;
  return a;
}

template <class Dst>
void apply_map(const AffineMap& a, const Vec& u, Dst&& dst) {
  dst.noalias() = a.L * u;
  dst += a.c;
}

}  // namespace

// ------------------------------------------------------------- Player 1

Player1Responder::Player1Responder(const FeedbackLaw& law, const ControlProcess& v2,
                                   const ControlProcess& v3)
    : law_(&law) {
  if (!v2.is_affine() || !v3.is_affine()) {
    throw UnsupportedError(
        "Player 1 response needs v2 and v3 with closed-form G1 filters (affine controls)");
  }
  const TimeGrid& g = law.grid();
  const std::vector<ControlGain> g2 = tabulate(v2, g);
  const std::vector<ControlGain> g3 = tabulate(v3, g);
  nodes_ = node_snapshots(law.spec(), g);
  const int n = law.n();
  const Eigen::Index d = 4 * n;

  RhsFn rhs = [&law, &v2, &v3, n, d](const Instant& at, const Mat& W) -> Mat {
    const LiftStack s = law.lift(at);
    const ClosedLoopCoeffs cl = law.coeffs(at);
    const ControlGain a = v2.gain(at);
    const ControlGain b = v3.gain(at);
    const Mat M = W.leftCols(d);
    const Vec mu = W.col(d);
    const Level1& l1 = s.l1;
    const Mat& C3 = s.c.C[2];
    Mat out(n, d + 1);
    out.leftCols(d) = -(M * cl.FXc + l1.Abar.transpose() * M + C3.transpose() * M * cl.C[2] +
                        l1.F2bar.transpose() * (a.K + a.Khat + a.Kcheck) +
                        l1.F3bar.transpose() * (b.K + b.Khat + b.Kcheck));
    out.col(d) = -(M * cl.c + l1.Abar.transpose() * mu + C3.transpose() * (M * cl.Sigma[2]) +
                   l1.F2bar.transpose() * a.k + l1.F3bar.transpose() * b.k + l1.f1bar);
    return out;
  };
  const MatrixTrajectory packed =
      integrate_backward(rhs, Mat::Zero(n, d + 1), g, "player-1 response offset");
  split_columns(packed, {d, 1}, {&M_, &mu_});

  const Eigen::Index m = 3 * d + n;
  const Eigen::Index oy = 3 * d;
  const std::size_t N = g.steps();
  maps_.resize(N + 1);
  for (std::size_t k = 0; k <= N; ++k) {
    const LiftStack& s = law.node_lift(k);
    NodeMaps& nm = maps_[k];
    nm.phi = {Mat::Zero(n, m), mu_.value(k)};
    nm.phi.L.middleCols(2 * d, d) = M_.value(k);
    Mat inner = nm.phi.L;
    inner.middleCols(oy, n) += s.p;
    const Mat RB = s.c.Rinv[0] * s.c.B[0].transpose();
    nm.v1 = {-RB * inner, -(RB * nm.phi.c + s.c.Rinv[0] * s.c.nvec[0])};
    nm.v2 = full_map(g2[k], m);
    nm.v3 = full_map(g3[k], m);
    if (k == N) break;
    const AffineMap v2c = g1_filter_map(g2[k], m);
    const AffineMap v3c = g1_filter_map(g3[k], m);
    Mat drift = s.l1.F1bar * nm.phi.L + s.c.B[1] * v2c.L + s.c.B[2] * v3c.L;
    drift.middleCols(oy, n) += s.l1.Abar;
    const double h = g.step(k);
    nm.step.L = h * drift;
    nm.step.L.middleCols(oy, n) += Mat::Identity(n, n);
    nm.step.c = h * (s.l1.F1bar * nm.phi.c + s.c.B[1] * v2c.c + s.c.B[2] * v3c.c + s.l1.bbar);
  }
}

void Player1Responder::respond(const DriverPath& Z, const Increments& dW,
                               Player1Path& out) const {
  const FeedbackLaw& law = *law_;
  const TimeGrid& g = law.grid();
  const std::size_t N = g.steps();
  const int n = law.n();
  const Eigen::Index d = 4 * n;
  const Eigen::Index oy = 3 * d;
  const Eigen::Index cols = static_cast<Eigen::Index>(N + 1);
  out.xcheck.resize(n, cols);
  out.phicheck.resize(n, cols);
  for (auto& v : out.v) v.resize(n, cols);
  out.xcheck.col(0) = law.spec().x0;
  Vec u(3 * d + n);
  for (std::size_t k = 0; k <= N; ++k) {
    const Eigen::Index c = static_cast<Eigen::Index>(k);
    const NodeMaps& nm = maps_[k];
    u.segment(0, d) = Z.X.col(c);
    u.segment(d, d) = Z.Xh.col(c);
    u.segment(2 * d, d) = Z.Xc.col(c);
    u.segment(oy, n) = out.xcheck.col(c);
    apply_map(nm.phi, u, out.phicheck.col(c));
    apply_map(nm.v1, u, out.v[0].col(c));
    apply_map(nm.v2, u, out.v[1].col(c));
    apply_map(nm.v3, u, out.v[2].col(c));
    if (k == N) break;
    const LiftStack& s = law.node_lift(k);
    const double w = dW[k][2];
    auto next = out.xcheck.col(c + 1);
    apply_map(nm.step, u, next);
    next.noalias() += w * (s.c.C[2] * u.segment(oy, n));
    next += w * s.c.sigma[2];
  }
  out.x = simulate_state_path(nodes_, g, law.spec().x0, {&out.v[0], &out.v[1], &out.v[2]}, dW);
}

// ---------------------------------------------------------- Players 1, 2

Player12Responder::Player12Responder(const FeedbackLaw& law, const ControlProcess& v3)
    : law_(&law) {
  if (!v3.is_affine()) {
    throw UnsupportedError(
        "Player 2 response needs v3 with closed-form G1/G2 filters (affine control)");
  }
  const TimeGrid& g = law.grid();
  const std::vector<ControlGain> g3 = tabulate(v3, g);
  nodes_ = node_snapshots(law.spec(), g);
  const int n = law.n();
  const Eigen::Index n2 = 2 * n;
  const Eigen::Index d = 4 * n;

  // Phihat solves the G2 filter of Player 2's offset equation; the W1
  // integrand has no G2 projection and drops (exact when C1 = 0).
  RhsFn rhs = [&law, &v3, n2, d](const Instant& at, const Mat& W) -> Mat {
    const LiftStack s = law.lift(at);
    const ClosedLoopCoeffs cl = law.coeffs(at);
    const ControlGain b = v3.gain(at);
    const Mat Ma = W.leftCols(d);
    const Mat Mb = W.middleCols(d, d);
    const Vec mu = W.col(2 * d);
    const Level2& l2 = s.l2;
    const Level2ClosedLoop& c2 = s.cl;
    const Mat G = c2.g1 + c2.ghat;
    const Mat& C2 = l2.calC[1];
    const Mat& C3 = l2.calC[2];
    Mat out(n2, 2 * d + 1);
    out.leftCols(d) = -(Ma * cl.EXh + G * Ma + c2.e1 * (b.K + b.Khat) +
                        C2.transpose() * Ma * cl.C[1] + C3.transpose() * Ma * cl.C[2]);
    out.middleCols(d, d) = -(Ma * cl.EXc + Mb * cl.FXc + G * Mb + c2.gcheck * (Ma + Mb) +
                             c2.e1 * b.Kcheck + c2.echeck * (b.K + b.Khat + b.Kcheck) +
                             C3.transpose() * Mb * cl.C[2]);
    out.col(2 * d) = -((Ma + Mb) * cl.c + (G + c2.gcheck) * mu + (c2.e1 + c2.echeck) * b.k +
                       c2.f + C2.transpose() * (Ma * cl.Sigma[1]) +
                       C3.transpose() * ((Ma + Mb) * cl.Sigma[2]));
    return out;
  };
  const MatrixTrajectory packed =
      integrate_backward(rhs, Mat::Zero(n2, 2 * d + 1), g, "player-2 response offset");
  split_columns(packed, {d, d, 1}, {&Ma_, &Mb_, &mu_});

  const Eigen::Index m = 3 * d + 2 * n2;
  const Eigen::Index oh = 3 * d, oc = 3 * d + n2;
  const std::size_t N = g.steps();
  maps_.resize(N + 1);
  for (std::size_t k = 0; k <= N; ++k) {
    const LiftStack& s = law.node_lift(k);
    const Level2& l2 = s.l2;
    const Mat& Ma = Ma_.value(k);
    const Mat& Mb = Mb_.value(k);
    const Vec& mu = mu_.value(k);
    NodeMaps& nm = maps_[k];
    nm.phihat = {Mat::Zero(n2, m), mu};
    nm.phihat.L.middleCols(d, d) = Ma;
    nm.phihat.L.middleCols(2 * d, d) = Mb;
    nm.phicheck = {Mat::Zero(n2, m), mu};
    nm.phicheck.L.middleCols(2 * d, d) = Ma + Mb;
    // G1 filter of Player 2's adjoint: (P1 + P2) X2check + Phicheck.
    Mat adj = nm.phicheck.L;
    adj.middleCols(oc, n2) += s.P1 + s.P2;
    Mat inner = nm.phihat.L;
    inner.middleCols(oh, n2) += s.P1;
    inner.middleCols(oc, n2) += s.P2;
    const Mat& R2inv = s.c.Rinv[1];
    const Mat RB2 = R2inv * l2.calB2.transpose();
    const Mat RF2 = R2inv * l2.calF2;
    const Vec v2c_const = -(RB2 * mu + R2inv * s.c.nvec[1]);
    nm.v2 = {-RB2 * inner, v2c_const};
    nm.v2.L.middleCols(oc, n2) -= RF2;
    AffineMap v2c{-RB2 * adj, v2c_const};
    v2c.L.middleCols(oc, n2) -= RF2;
    Mat inner1 = adj.bottomRows(n);
    inner1.middleCols(oc, n) += s.p;
    const Mat RB1 = s.c.Rinv[0] * s.c.B[0].transpose();
    nm.v1 = {-RB1 * inner1, -(RB1 * mu.tail(n) + s.c.Rinv[0] * s.c.nvec[0])};
    nm.v3 = full_map(g3[k], m);
    if (k == N) break;
    const AffineMap v3h = g2_filter_map(g3[k], m);
    const AffineMap v3c = g1_filter_map(g3[k], m);
    const double h = g.step(k);
    const Mat common = l2.calF1 * adj;
    const Vec common_c = l2.calF1 * mu + l2.barb2;
    nm.step_hat.L = h * (common + l2.calB2 * nm.v2.L + l2.calB3 * v3h.L);
    nm.step_hat.L.middleCols(oh, n2) += Mat::Identity(n2, n2) + h * l2.calA1;
    nm.step_hat.L.middleCols(oc, n2) += h * l2.calA2;
    nm.step_hat.c = h * (common_c + l2.calB2 * nm.v2.c + l2.calB3 * v3h.c);
    nm.step_check.L = h * (common + l2.calB2 * v2c.L + l2.calB3 * v3c.L);
    nm.step_check.L.middleCols(oc, n2) += Mat::Identity(n2, n2) + h * (l2.calA1 + l2.calA2);
    nm.step_check.c = h * (common_c + l2.calB2 * v2c.c + l2.calB3 * v3c.c);
  }
}

void Player12Responder::respond(const DriverPath& Z, const Increments& dW,
                                Player12Path& out) const {
  const FeedbackLaw& law = *law_;
  const TimeGrid& g = law.grid();
  const std::size_t N = g.steps();
  const int n = law.n();
  const Eigen::Index n2 = 2 * n;
  const Eigen::Index d = 4 * n;
  const Eigen::Index oh = 3 * d, oc = 3 * d + n2;
  const Eigen::Index cols = static_cast<Eigen::Index>(N + 1);
  out.X2hat.resize(n2, cols);
  out.X2check.resize(n2, cols);
  out.Phihat.resize(n2, cols);
  out.Phicheck.resize(n2, cols);
  for (auto& v : out.v) v.resize(n, cols);
  Vec X0 = Vec::Zero(n2);
  X0.head(n) = law.spec().x0;
  out.X2hat.col(0) = X0;
  out.X2check.col(0) = X0;
  Vec u(3 * d + 2 * n2);
  for (std::size_t k = 0; k <= N; ++k) {
    const Eigen::Index c = static_cast<Eigen::Index>(k);
    const NodeMaps& nm = maps_[k];
    u.segment(0, d) = Z.X.col(c);
    u.segment(d, d) = Z.Xh.col(c);
    u.segment(2 * d, d) = Z.Xc.col(c);
    u.segment(oh, n2) = out.X2hat.col(c);
    u.segment(oc, n2) = out.X2check.col(c);
    apply_map(nm.phihat, u, out.Phihat.col(c));
    apply_map(nm.phicheck, u, out.Phicheck.col(c));
    apply_map(nm.v1, u, out.v[0].col(c));
    apply_map(nm.v2, u, out.v[1].col(c));
    apply_map(nm.v3, u, out.v[2].col(c));
    if (k == N) break;
    const Level2& l2 = law.node_lift(k).l2;
    const double w2 = dW[k][1], w3 = dW[k][2];
    auto hat = out.X2hat.col(c + 1);
    apply_map(nm.step_hat, u, hat);
    hat.noalias() += w2 * (l2.calC[1] * u.segment(oh, n2));
    hat.noalias() += w3 * (l2.calC[2] * u.segment(oh, n2));
    hat += w2 * l2.barsigma[1] + w3 * l2.barsigma[2];
    auto check = out.X2check.col(c + 1);
    apply_map(nm.step_check, u, check);
    check.noalias() += w3 * (l2.calC[2] * u.segment(oc, n2));
    check += w3 * l2.barsigma[2];
  }
  out.x = simulate_state_path(nodes_, g, law.spec().x0, {&out.v[0], &out.v[1], &out.v[2]}, dW);
}

// ------------------------------------------------------------ wrappers

std::vector<Player1Path> respond_player1(const FeedbackLaw& law, const ControlProcess& v2,
                                         const ControlProcess& v3, const NoiseSource& noise,
                                         std::size_t n_paths, unsigned threads) {
  const Player1Responder r(law, v2, v3);
  std::vector<Player1Path> out(n_paths);
  detail::parallel_chunks(n_paths, threads, [&](std::size_t begin, std::size_t end) {
    Increments dW;
    DriverPath Z;
    for (std::size_t i = begin; i < end; ++i) {
      noise.increments(law.grid(), i, dW);
      simulate_driver(law, dW, Z, i);
      r.respond(Z, dW, out[i]);
    }
  });
  return out;
}

std::vector<Player12Path> respond_player12(const FeedbackLaw& law, const ControlProcess& v3,
                                           const NoiseSource& noise, std::size_t n_paths,
                                           unsigned threads) {
  const Player12Responder r(law, v3);
  std::vector<Player12Path> out(n_paths);
  detail::parallel_chunks(n_paths, threads, [&](std::size_t begin, std::size_t end) {
    Increments dW;
    DriverPath Z;
    for (std::size_t i = begin; i < end; ++i) {
      noise.increments(law.grid(), i, dW);
      simulate_driver(law, dW, Z, i);
      r.respond(Z, dW, out[i]);
    }
  });
  return out;
}

}  // namespace stacklq
