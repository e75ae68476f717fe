#include <stacklq/trajectory.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stacklq {

MatrixTrajectory::MatrixTrajectory(TimeGrid grid, Eigen::Index rows, Eigen::Index cols)
    : grid_(std::move(grid)), rows_(rows), cols_(cols),
      values_(grid_.nodes().size(), Mat::Zero(rows, cols)) {}

void MatrixTrajectory::set_derivatives(std::size_t k, Mat left, Mat right) {
  if (d_left_.empty()) {
    d_left_.assign(grid_.steps(), Mat());
    d_right_.assign(grid_.steps(), Mat());
  }
  d_left_[k] = std::move(left);
  d_right_[k] = std::move(right);
}

Mat MatrixTrajectory::at(const Instant& when) const {
  const std::size_t k = when.interval;
  const double t0 = grid_.node(k);
  const double t1 = grid_.node(k + 1);
  if (when.t == t0) return values_[k];
  if (when.t == t1) return values_[k + 1];
  const double h = t1 - t0;
  const double s = (when.t - t0) / h;
  if (d_left_.empty()) return (1.0 - s) * values_[k] + s * values_[k + 1];
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * values_[k] + (h10 * h) * d_left_[k] + h01 * values_[k + 1] +
         (h11 * h) * d_right_[k];
}

MatrixTrajectory MatrixTrajectory::block_rows(Eigen::Index r0, Eigen::Index nr) const {
  MatrixTrajectory out(grid_, nr, cols_);
  for (std::size_t k = 0; k < values_.size(); ++k) {
    out.values_[k] = values_[k].middleRows(r0, nr);
  }
  for (std::size_t k = 0; k < d_left_.size(); ++k) {
    out.set_derivatives(k, d_left_[k].middleRows(r0, nr), d_right_[k].middleRows(r0, nr));
  }
  return out;
}

double MatrixTrajectory::max_abs() const {
  double m = 0.0;
  for (const Mat& v : values_) {
    if (v.size() > 0) m = std::max(m, v.cwiseAbs().maxCoeff());
  }
  return m;
}

namespace {

void check_finite(const Mat& M, const std::string& name, std::size_t node, double t) {
  constexpr double kLimit = 1e12;
  for (Eigen::Index i = 0; i < M.size(); ++i) {
    const double v = M.data()[i];
    if (!std::isfinite(v) || std::abs(v) > kLimit) {
      std::ostringstream os;
      os << name << " blew up at node " << node << " (t=" << t << ")";
      throw BlowUpError(os.str(), node, t);
    }
  }
}

}  // namespace

MatrixTrajectory integrate_backward(const RhsFn& rhs, const Mat& terminal, const TimeGrid& grid,
                                    const std::string& name, const StepHook& hook) {
  MatrixTrajectory traj(grid, terminal.rows(), terminal.cols());
  const std::size_t N = grid.steps();
  check_finite(terminal, name, N, grid.horizon());
  traj.value(N) = terminal;
  for (std::size_t step = N; step-- > 0;) {
    const double t1 = grid.node(step + 1);
    const double t0 = grid.node(step);
    const double h = t1 - t0;
    const double tm = t1 - 0.5 * h;
    const Mat& Y = traj.value(step + 1);
    const Mat k1 = rhs(Instant{t1, step}, Y);
    const Mat k2 = rhs(Instant{tm, step}, Y - 0.5 * h * k1);
    const Mat k3 = rhs(Instant{tm, step}, Y - 0.5 * h * k2);
    const Mat k4 = rhs(Instant{t0, step}, Y - h * k3);
    Mat next = Y - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (hook) hook(next);
    check_finite(next, name, step, t0);
    Mat d0 = rhs(Instant{t0, step}, next);
    traj.value(step) = std::move(next);
    traj.set_derivatives(step, std::move(d0), k1);
  }
  return traj;
}

double centered_residual(const MatrixTrajectory& traj, const RhsFn& rhs,
                         const std::vector<double>& skip) {
  const TimeGrid& g = traj.grid();
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
    // A centered difference is second order only with equal neighbouring
    // steps and smooth coefficients on both sides.
    const double hl = g.step(k - 1), hr = g.step(k);
    if (std::abs(hl - hr) > 1e-9 * std::max(hl, hr)) continue;
    if (std::binary_search(skip.begin(), skip.end(), g.node(k))) continue;
    const Mat diff = (traj.value(k + 1) - traj.value(k - 1)) / (g.node(k + 1) - g.node(k - 1));
    const Mat r = diff - rhs(node_instant(g, k), traj.value(k));
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace stacklq
