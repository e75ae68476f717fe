#pragma once

#include <stacklq/model.hpp>

namespace stacklq {

/// Follower-reduced coefficients at one instant, given p.
struct Level1 {
  Mat Abar;   // A - B1 R1^-1 B1' p
  Mat F1bar;  // -B1 R1^-1 B1'
  Mat F2bar;  // B2' p
  Mat F3bar;  // B3' p
  Vec bbar;   // b - B1 R1^-1 n1
  Vec f1bar;  // p b + sum Ci' p sigma_i + m1 - p B1 R1^-1 n1
};

/// 2n lift of the Player-2 problem. State blocks are (x, psi2), adjoint
/// blocks (y2, phicheck):
///   dX  = (calA1 X + calA2 Xcheck + calF1 Ycheck + calB2 v2 + calB3 v3 + barb2) dt + ...
///   -dY = (calQ2 X + calA1' Y + calA2' Ycheck + sum_i calC_i' Z_i
///          + calF2' v2check + calF3' v3check + f2bar) dt - ...
/// psi2 is driven by y2check, so it is G1-adapted.
struct Level2 {
  Mat calA1, calA2, calF1;
  Mat calB2, calB3;  // 2n x n
  std::array<Mat, 3> calC;
  Mat calQ2, calG2, calQ3, calG3;
  Mat calF2, calF3;  // n x 2n
  Vec barb2;
  std::array<Vec, 3> barsigma;
  Vec f2bar;
  Vec m3bar;

  // Products used throughout.
  Mat K;       // calB2 R2^-1 calB2'
  Mat L;       // calB2 R2^-1 calF2
  Mat F2RF2;   // calF2' R2^-1 calF2
};

/// Player 3's view of the Player-2 equilibrium, given P1 and P2. With
/// Y = P1 X + P2 Xcheck + Phi the lifted state and the offset satisfy
///   dX   = (a1 X + a2 Xhat + a3 Xcheck + fhat Phihat + fcheck Phicheck + calB3 v3 + b) dt + ...
///   -dPhi = (h (X - Xhat) + g1 Phi + ghat Phihat + gcheck Phicheck
///            + e1 v3 + echeck v3check + f + sum_i calC_i' Lambda_i) dt - sum_i Lambda_i dW_i.
struct Level2ClosedLoop {
  Mat a1, a2, a3;
  Mat fhat, fcheck;
  Mat h;
  Mat g1, ghat, gcheck;
  Mat e1, echeck;  // 2n x n
  Vec b, f;
};

/// 4n lift of the Player-3 problem. State blocks are (X2, Psi3), adjoint
/// blocks (Y3, Phi):
///   dX = (A1 X + A2 Xhat + A3 Xcheck + Fhat Yhat + Fcheck Ycheck + B3 v3 + b) dt
///        + sum_i (C_i X + Sigma_i) dW_i
///   -dY = (Q X + Qhat Xhat + A1' Y + A2' Yhat + A3' Ycheck + sum_i C_i' Z_i
///          + E v3 + Echeck v3check + f) dt - sum_i Z_i dW_i,   Y(T) = G X(T).
struct Level3 {
  Mat frakA1, frakA2, frakA3;
  Mat frakFhat, frakFcheck;
  Mat frakB3;  // 4n x n
  std::array<Mat, 3> frakC;
  Mat frakQ, frakQhat, frakG;
  Mat frakE, frakEcheck;  // 4n x n
  Vec frakb;
  std::array<Vec, 3> Sigma;
  Vec frakf;

  Mat M;  // frakB3 R3^-1 frakB3'
};

Level1 build_level1(const CoeffSnapshot& c, const Mat& p);
Level2 build_level2(const CoeffSnapshot& c, const Level1& l1);
Level2ClosedLoop build_level2_closedloop(const CoeffSnapshot& c, const Level2& l2, const Mat& P1,
                                         const Mat& P2);
Level3 build_level3(const CoeffSnapshot& c, const Level2& l2, const Level2ClosedLoop& cl);

/// Block-diagonal and 2x2 block helpers; off-diagonal blocks are exact zeros.
Mat block_diag(const Mat& a, const Mat& b);
Mat block2(const Mat& a11, const Mat& a12, const Mat& a21, const Mat& a22);
Mat vstack(const Mat& top, const Mat& bottom);
Mat hstack(const Mat& left, const Mat& right);

}  // namespace stacklq
