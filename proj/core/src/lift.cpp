#include <stacklq/lift.hpp>

namespace stacklq {

Mat block_diag(const Mat& a, const Mat& b) {
  Mat out = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

Mat block2(const Mat& a11, const Mat& a12, const Mat& a21, const Mat& a22) {
  Mat out(a11.rows() + a21.rows(), a11.cols() + a12.cols());
  out << a11, a12, a21, a22;
  return out;
}

Mat vstack(const Mat& top, const Mat& bottom) {
  Mat out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

Mat hstack(const Mat& left, const Mat& right) {
  Mat out(left.rows(), left.cols() + right.cols());
  out << left, right;
  return out;
}

Level1 build_level1(const CoeffSnapshot& c, const Mat& p) {
  const Mat& B1 = c.B[0];
  const Mat& R1inv = c.Rinv[0];
  const Mat S1 = B1 * R1inv * B1.transpose();
  const Vec u1 = B1 * (R1inv * c.nvec[0]);
  Level1 l;
  l.Abar = c.A - S1 * p;
  l.F1bar = -S1;
  l.F2bar = c.B[1].transpose() * p;
  l.F3bar = c.B[2].transpose() * p;
  l.bbar = c.b - u1;
  l.f1bar = p * c.b + c.m[0] - p * u1;
  for (int i = 0; i < 3; ++i) l.f1bar += c.C[i].transpose() * (p * c.sigma[i]);
  return l;
}

Level2 build_level2(const CoeffSnapshot& c, const Level1& l1) {
  const Eigen::Index n = c.A.rows();
  const Mat Z = Mat::Zero(n, n);
  const Vec z = Vec::Zero(n);
  Level2 l;
  l.calA1 = block_diag(c.A, l1.Abar);
  l.calA2 = block_diag(l1.Abar - c.A, Z);
  l.calF1 = block2(Z, l1.F1bar, l1.F1bar, Z);
  l.calB2 = vstack(c.B[1], Z);
  l.calB3 = vstack(c.B[2], Z);
  l.calC[0] = block_diag(c.C[0], Z);
  l.calC[1] = block_diag(c.C[1], Z);
  l.calC[2] = block_diag(c.C[2], c.C[2]);
  l.calQ2 = block_diag(c.Q[1], Z);
  l.calG2 = block_diag(c.G[1], Z);
  l.calQ3 = block_diag(c.Q[2], Z);
  l.calG3 = block_diag(c.G[2], Z);
  l.calF2 = hstack(Z, l1.F2bar);
  l.calF3 = hstack(Z, l1.F3bar);
  l.barb2 = vstack(l1.bbar, z);
  for (int i = 0; i < 3; ++i) l.barsigma[i] = vstack(c.sigma[i], z);
  l.f2bar = vstack(c.m[1], l1.f1bar);
  l.m3bar = vstack(c.m[2], z);

  const Mat& R2inv = c.Rinv[1];
  l.K = l.calB2 * R2inv * l.calB2.transpose();
  l.L = l.calB2 * R2inv * l.calF2;
  l.F2RF2 = l.calF2.transpose() * R2inv * l.calF2;
  return l;
}

Level2ClosedLoop build_level2_closedloop(const CoeffSnapshot& c, const Level2& l2, const Mat& P1,
                                         const Mat& P2) {
  const Mat& R2inv = c.Rinv[1];
  const Vec r2n2 = R2inv * c.nvec[1];
  const Mat P12 = P1 + P2;
  const Mat FK = l2.calF1 - l2.K;
  Level2ClosedLoop cl;
  cl.a1 = l2.calA1;
  cl.a2 = -l2.K * P1;
  cl.a3 = l2.calA2 + l2.calF1 * P12 - l2.K * P2 - l2.L;
  cl.fhat = -l2.K;
  cl.fcheck = l2.calF1;
  cl.h = P1 * l2.K * P1;
  cl.g1 = l2.calA1.transpose();
  cl.ghat = -P1 * l2.K;
  cl.gcheck = l2.calA2.transpose() - l2.L.transpose() + P1 * l2.calF1 + P2 * FK;
  cl.e1 = P1 * l2.calB3;
  cl.echeck = P2 * l2.calB3 + l2.calF3.transpose();
  cl.b = l2.barb2 - l2.calB2 * r2n2;
  cl.f = l2.f2bar + P12 * cl.b + l2.calC[2].transpose() * (P2 * l2.barsigma[2]) -
         l2.calF2.transpose() * r2n2;
  for (int i = 0; i < 3; ++i) cl.f += l2.calC[i].transpose() * (P1 * l2.barsigma[i]);
  return cl;
}

Level3 build_level3(const CoeffSnapshot& c, const Level2& l2, const Level2ClosedLoop& cl) {
  const Eigen::Index n = c.A.rows();
  const Eigen::Index n2 = 2 * n;
  const Mat Z2 = Mat::Zero(n2, n2);
  const Mat Zn = Mat::Zero(n2, n);
  const Vec z2 = Vec::Zero(n2);
  Level3 l;
  l.frakA1 = block_diag(cl.a1, cl.g1.transpose());
  l.frakA2 = block_diag(cl.a2, cl.ghat.transpose());
  l.frakA3 = block_diag(cl.a3, cl.gcheck.transpose());
  l.frakFhat = block2(Z2, cl.fhat, cl.fhat.transpose(), Z2);
  l.frakFcheck = block2(Z2, cl.fcheck, cl.fcheck.transpose(), Z2);
  l.frakB3 = vstack(l2.calB3, Zn);
  for (int i = 0; i < 3; ++i) l.frakC[i] = block_diag(l2.calC[i], l2.calC[i]);
  l.frakQ = block2(l2.calQ3, cl.h.transpose(), cl.h, Z2);
  l.frakQhat = block2(Z2, -cl.h.transpose(), -cl.h, Z2);
  l.frakG = block_diag(l2.calG3, Z2);
  l.frakE = vstack(Zn, cl.e1);
  l.frakEcheck = vstack(Zn, cl.echeck);
  l.frakb = vstack(cl.b, z2);
  for (int i = 0; i < 3; ++i) l.Sigma[i] = vstack(l2.barsigma[i], z2);
  l.frakf = vstack(l2.m3bar, cl.f);
  l.M = l.frakB3 * c.Rinv[2] * l.frakB3.transpose();
  return l;
}

}  // namespace stacklq
