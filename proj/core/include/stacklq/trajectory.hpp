#pragma once

#include <stacklq/model.hpp>

#include <functional>
#include <string>
#include <vector>

namespace stacklq {

/// Matrix-valued function sampled on a grid.
///
/// Besides node values it keeps the one-sided derivatives at both ends of every
/// interval, so `at` can return cubic Hermite dense output between nodes. This
/// keeps a solve that reads another trajectory at RK stage times at order 4.
class MatrixTrajectory {
 public:
  MatrixTrajectory() = default;
  MatrixTrajectory(TimeGrid grid, Eigen::Index rows, Eigen::Index cols);

  const TimeGrid& grid() const { return grid_; }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }

  const Mat& value(std::size_t k) const { return values_[k]; }
  Mat& value(std::size_t k) { return values_[k]; }
  const Mat& front() const { return values_.front(); }
  const Mat& back() const { return values_.back(); }

  /// Derivative at the left end of interval k.
  const Mat& d_left(std::size_t k) const { return d_left_[k]; }
  /// Derivative at the right end of interval k.
  const Mat& d_right(std::size_t k) const { return d_right_[k]; }
  void set_derivatives(std::size_t k, Mat left, Mat right);
  bool has_derivatives() const { return !d_left_.empty(); }

  /// Value at an arbitrary instant: node values are returned exactly, interior
  /// points use the Hermite interpolant of the instant's interval (linear if no
  /// derivatives are stored).
  Mat at(const Instant& when) const;

  /// Rows [r0, r0+nr) of every node value.
  MatrixTrajectory block_rows(Eigen::Index r0, Eigen::Index nr) const;

  double max_abs() const;

 private:
  TimeGrid grid_;
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<Mat> values_;
  std::vector<Mat> d_left_;
  std::vector<Mat> d_right_;
};

/// Right-hand side of dM/dt = F(t, M). The instant's interval selects the
/// piecewise coefficients.
using RhsFn = std::function<Mat(const Instant&, const Mat&)>;

/// Applied to every accepted step value (used to symmetrize p).
using StepHook = std::function<void(Mat&)>;

/// Classical RK4 run backward from `terminal` at T to 0. The terminal value is
/// stored exactly. Throws BlowUpError when an entry exceeds 1e12 in magnitude or
/// is not finite.
MatrixTrajectory integrate_backward(const RhsFn& rhs, const Mat& terminal, const TimeGrid& grid,
                                    const std::string& name = "trajectory",
                                    const StepHook& hook = nullptr);

/// Max over interior nodes of |(M_{k+1} - M_{k-1}) / (t_{k+1} - t_{k-1}) - F(t_k, M_k)|.
/// Nodes with unequal neighbouring steps and the sorted times in `skip`
/// (coefficient breakpoints) are left out.
double centered_residual(const MatrixTrajectory& traj, const RhsFn& rhs,
                         const std::vector<double>& skip = {});

}  // namespace stacklq
