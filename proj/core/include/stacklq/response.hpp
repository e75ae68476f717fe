#pragma once

#include <stacklq/closedloop.hpp>

namespace stacklq {

/// u -> L u + c on a responder's stacked per-node state.
struct AffineMap {
  Mat L;
  Vec c;
};

/// Player 1's best response to exogenous affine v2, v3.
struct Player1Path {
  Mat x;         // n x (steps+1), state equation under (v1, v2, v3)
  Mat xcheck;    // Player 1's G1 filter of x
  Mat phicheck;  // offset process
  std::array<Mat, 3> v;
};

/// Solves phicheck = M Xcheck + mu, with Xcheck the lifted G1 equilibrium
/// filter, once; then steps any number of paths through the follower's filtered
/// system.
class Player1Responder {
 public:
  /// Throws UnsupportedError unless v2 and v3 are affine.
  Player1Responder(const FeedbackLaw& law, const ControlProcess& v2, const ControlProcess& v3);

  const MatrixTrajectory& M() const { return M_; }    // n x 4n
  const MatrixTrajectory& mu() const { return mu_; }  // n

  void respond(const DriverPath& Z, const Increments& dW, Player1Path& out) const;

 private:
  // Per-node maps on u = (X, Xhat, Xcheck, xcheck); step is absent at the last node.
  struct NodeMaps {
    AffineMap phi, v1, v2, v3, step;
  };

  const FeedbackLaw* law_;
  MatrixTrajectory M_, mu_;
  std::vector<NodeMaps> maps_;
  std::vector<CoeffSnapshot> nodes_;
};

/// Players 1 and 2 responding to an exogenous affine v3.
struct Player12Path {
  Mat x;
  Mat X2hat, X2check;    // 2n x (steps+1)
  Mat Phihat, Phicheck;  // 2n x (steps+1)
  std::array<Mat, 3> v;
};

/// Solves Phihat = Ma Xhat + Mb Xcheck + muhat (so Phicheck = (Ma + Mb) Xcheck
/// + muhat) once, then steps paths through Player 2's two filter systems with
/// Player 1 playing its equilibrium strategy.
class Player12Responder {
 public:
  Player12Responder(const FeedbackLaw& law, const ControlProcess& v3);

  const MatrixTrajectory& Ma() const { return Ma_; }    // 2n x 4n
  const MatrixTrajectory& Mb() const { return Mb_; }    // 2n x 4n
  const MatrixTrajectory& mu() const { return mu_; }    // 2n

  void respond(const DriverPath& Z, const Increments& dW, Player12Path& out) const;

 private:
  // Per-node maps on u = (X, Xhat, Xcheck, X2hat, X2check).
  struct NodeMaps {
    AffineMap phihat, phicheck, v1, v2, v3, step_hat, step_check;
  };

  const FeedbackLaw* law_;
  MatrixTrajectory Ma_, Mb_, mu_;
  std::vector<NodeMaps> maps_;
  std::vector<CoeffSnapshot> nodes_;
};

/// Convenience wrappers: simulate equilibrium drivers for paths
/// [0, n_paths) of `noise` and respond on each.
std::vector<Player1Path> respond_player1(const FeedbackLaw& law, const ControlProcess& v2,
                                         const ControlProcess& v3, const NoiseSource& noise,
                                         std::size_t n_paths, unsigned threads = 1);

std::vector<Player12Path> respond_player12(const FeedbackLaw& law, const ControlProcess& v3,
                                           const NoiseSource& noise, std::size_t n_paths,
                                           unsigned threads = 1);

}  // namespace stacklq
