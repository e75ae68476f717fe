#pragma once

#include <stacklq/noise.hpp>
#include <stacklq/riccati.hpp>

#include <array>
#include <functional>
#include <memory>
#include <vector>

namespace stacklq {

/// Affine control on the lifted equilibrium states (X, Xhat, Xcheck), each 4n:
///   v = K X + Khat Xhat + Kcheck Xcheck + k.
/// Since E[X | G2] = Xhat and E[Xhat | G1] = Xcheck along equilibrium paths, its
/// filters are available in closed form.
struct ControlGain {
  Mat K, Khat, Kcheck;  // n x 4n
  Vec k;

  static ControlGain zero(int n);

  Vec apply(const Vec& X, const Vec& Xh, const Vec& Xc) const;
  Vec filter_g2(const Vec& Xh, const Vec& Xc) const;
  Vec filter_g1(const Vec& Xc) const;

  ControlGain& operator+=(const ControlGain& o);
  ControlGain scaled_feedback(double s) const;  // gains scaled, offset kept
};

ControlGain operator+(ControlGain a, const ControlGain& b);
ControlGain operator*(double s, const ControlGain& g);

using GainFn = std::function<ControlGain(const Instant&)>;

/// A control fed to the state equation or a follower response: either affine
/// in the equilibrium states, or a realized per-path sample with no known filter.
class ControlProcess {
 public:
  static ControlProcess affine(GainFn gain);
  /// One n x (steps+1) matrix of node values per path.
  static ControlProcess sampled(std::vector<Mat> paths);

  bool is_affine() const { return static_cast<bool>(gain_); }
  /// Throws UnsupportedError for sampled controls.
  ControlGain gain(const Instant& at) const;
  const Mat& samples(std::size_t path) const { return samples_.at(path); }
  std::size_t sample_count() const { return samples_.size(); }

 private:
  GainFn gain_;
  std::vector<Mat> samples_;
};

/// Drift and diffusion data of the three filtered equilibrium systems at one
/// instant:
///   dX     = (DX X + DXh Xhat + DXc Xcheck + c) dt + sum_i (C_i X + S_i) dW_i
///   dXhat  = (EXh Xhat + EXc Xcheck + c) dt      + sum_{i=2,3} (C_i Xhat + S_i) dW_i
///   dXcheck = (FXc Xcheck + c) dt                + (C_3 Xcheck + S_3) dW_3
/// with DX + DXh = EXh and EXh + EXc = FXc. The three offsets coincide because
/// Omega is deterministic, so a single vector is kept.
struct ClosedLoopCoeffs {
  Mat DX, DXh, DXc, EXh, EXc, FXc;
  Vec c;
  std::array<Mat, 3> C;
  std::array<Vec, 3> Sigma;
};

ClosedLoopCoeffs closed_loop_coeffs(const LiftStack& s, const Vec& Omega);

/// Equilibrium gain of player 1, 2 or 3.
ControlGain equilibrium_gain(const LiftStack& s, const Vec& Omega, int player);

/// Gains and closed-loop coefficients tabulated on the solver grid, with
/// recomputation at off-node instants for the follower-response ODEs.
class FeedbackLaw {
 public:
  FeedbackLaw(std::shared_ptr<const RiccatiBundle> bundle,
              std::shared_ptr<const OffsetBundle> offsets, double gain_scale = 1.0);

  const TimeGrid& grid() const { return bundle_->grid; }
  const GameSpec& spec() const { return *bundle_->spec; }
  const RiccatiBundle& bundle() const { return *bundle_; }
  const OffsetBundle& offsets() const { return *offsets_; }
  double gain_scale() const { return scale_; }
  int n() const { return bundle_->spec->n; }

  const ControlGain& node_gain(int player, std::size_t k) const { return gains_[player - 1][k]; }
  const ClosedLoopCoeffs& node_coeffs(std::size_t k) const { return coeffs_[k]; }
  const LiftStack& node_lift(std::size_t k) const { return lifts_[k]; }

  ControlGain gain(int player, const Instant& at) const;
  ClosedLoopCoeffs coeffs(const Instant& at) const;
  LiftStack lift(const Instant& at) const;

  /// Gain function sharing this law's data; valid after the law is destroyed.
  GainFn gain_fn(int player) const;

 private:
  std::shared_ptr<const RiccatiBundle> bundle_;
  std::shared_ptr<const OffsetBundle> offsets_;
  double scale_;
  std::vector<LiftStack> lifts_;
  std::vector<ClosedLoopCoeffs> coeffs_;
  std::array<std::vector<ControlGain>, 3> gains_;
};

/// `gain_scale` multiplies every feedback matrix of the realized controls
/// (a test hook for deliberately suboptimal play).
FeedbackLaw build_feedback(const RiccatiBundle& bundle, const OffsetBundle& offsets,
                           double gain_scale = 1.0);

using Increments = std::vector<std::array<double, 3>>;

/// Lifted equilibrium states of one path, one column per node.
struct DriverPath {
  Mat X, Xh, Xc;  // 4n x (steps+1)
};

struct PathRecord {
  DriverPath Z;
  Mat x;                 // n x (steps+1), first block of X
  std::array<Mat, 3> v;  // n x (steps+1)
};

struct PathBundle {
  TimeGrid grid;
  std::uint64_t seed = 0;
  std::size_t first_path = 0;
  std::vector<PathRecord> paths;
};

/// Euler-Maruyama step of the three filtered systems. Xcheck only sees dW3 and
/// Xhat only (dW2, dW3). Throws BlowUpError naming the path and node.
void simulate_driver(const FeedbackLaw& law, const Increments& dW, DriverPath& out,
                     std::size_t path_id = 0);

/// Realized controls of all three players along a driver path.
std::array<Mat, 3> realized_controls(const FeedbackLaw& law, const DriverPath& Z);

PathBundle simulate_equilibrium(const FeedbackLaw& law, const NoiseSource& noise,
                                std::size_t n_paths, unsigned threads = 1,
                                std::size_t first_path = 0);

/// Coefficients at every node, taken from the interval to the node's right.
std::vector<CoeffSnapshot> node_snapshots(const GameSpec& spec, const TimeGrid& grid);

/// Euler-Maruyama for the original state equation under given node values of
/// the three controls (n x (steps+1) each).
Mat simulate_state_path(const std::vector<CoeffSnapshot>& nodes, const TimeGrid& grid,
                        const Vec& x0, const std::array<const Mat*, 3>& v,
                        const Increments& dW);

/// State paths under arbitrary controls. Affine controls need the equilibrium
/// drivers of the same paths.
std::vector<Mat> simulate_state(const GameSpec& spec, const TimeGrid& grid,
                                const std::array<ControlProcess, 3>& controls,
                                const NoiseSource& noise, std::size_t n_paths,
                                const std::vector<DriverPath>* drivers = nullptr);

}  // namespace stacklq
