#pragma once

#include <stacklq/types.hpp>

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace stacklq {

/// Strictly increasing time nodes on [0, T].
///
/// A spec carries a uniform grid; the solvers work on that grid refined with
/// every coefficient breakpoint, so a refined grid may be non-uniform.
class TimeGrid {
 public:
  TimeGrid() = default;

  static TimeGrid uniform(double horizon, std::size_t steps);
  static TimeGrid from_nodes(std::vector<double> nodes);

  /// Copy of this grid with the given times inserted (duplicates and points
  /// outside (0, T) are ignored).
  TimeGrid refined(const std::vector<double>& extra) const;

  double horizon() const { return nodes_.empty() ? 0.0 : nodes_.back(); }
  std::size_t steps() const { return nodes_.empty() ? 0 : nodes_.size() - 1; }
  const std::vector<double>& nodes() const { return nodes_; }
  double node(std::size_t k) const { return nodes_[k]; }
  double step(std::size_t k) const { return nodes_[k + 1] - nodes_[k]; }
  bool uniform_spacing() const;

  /// Index of the interval [t_k, t_{k+1}) containing t; t = T maps to the last interval.
  std::size_t interval_of(double t) const;

  bool operator==(const TimeGrid& other) const { return nodes_ == other.nodes_; }

 private:
  explicit TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {}
  std::vector<double> nodes_;
};

/// A point on a grid together with the interval whose coefficients apply.
///
/// Node t_k is shared by intervals k-1 and k; piecewise coefficients and
/// one-sided derivatives are taken from `interval`.
struct Instant {
  double t = 0.0;
  std::size_t interval = 0;
};

/// Node k seen from the interval to its right (the last node uses the last interval).
Instant node_instant(const TimeGrid& grid, std::size_t k);

/// Matrix-valued function of time that is constant or piecewise constant.
/// Vectors are stored as single-column matrices.
class TimeFunction {
 public:
  TimeFunction() = default;

  static TimeFunction constant(Mat value);
  static TimeFunction piecewise(std::vector<double> breaks, std::vector<Mat> values);

  bool is_constant() const { return breaks_.empty(); }
  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<Mat>& values() const { return values_; }

  /// Right-continuous lookup without a domain check.
  const Mat& at(double t) const;

  Eigen::Index rows() const { return values_.empty() ? 0 : values_.front().rows(); }
  Eigen::Index cols() const { return values_.empty() ? 0 : values_.front().cols(); }

  bool operator==(const TimeFunction& other) const;

 private:
  std::vector<double> breaks_;
  std::vector<Mat> values_;
};

struct CoefficientSet {
  TimeFunction A;
  std::array<TimeFunction, 3> B;
  std::array<TimeFunction, 3> C;
  TimeFunction b;
  std::array<TimeFunction, 3> sigma;
};

struct PlayerCost {
  TimeFunction Q;
  TimeFunction R;
  Mat G;
  TimeFunction m;
  TimeFunction n;
};

struct CostSpec {
  std::array<PlayerCost, 3> player;
};

/// Which Brownian components each player observes: row i is player i+1.
struct InfoStructure {
  std::array<std::array<int, 3>, 3> adjacency{};

  static InfoStructure nested();
  bool is_nested() const;
};

struct GameSpec {
  int n = 1;
  TimeGrid grid;
  CoefficientSet coeffs;
  CostSpec costs;
  InfoStructure info = InfoStructure::nested();
  Vec x0;
  double rho_min = 1e-8;

  /// All declared breakpoints of every coefficient, sorted and de-duplicated.
  std::vector<double> breakpoints() const;

  /// Grid used by the solvers: the spec grid refined with every breakpoint.
  TimeGrid solver_grid() const;
};

/// Zero-valued spec of dimension n (R_i = I so that it is valid).
GameSpec zero_spec(int n, double horizon, std::size_t steps);

enum class CoeffId {
  A, B1, B2, B3, C1, C2, C3, b, sigma1, sigma2, sigma3,
  Q1, Q2, Q3, R1, R2, R3, G1, G2, G3, m1, m2, m3, n1, n2, n3
};

std::string to_string(CoeffId id);

/// Coefficient value at time t (right-continuous; t = T gives the last piece).
/// Throws DomainError for t outside [0, T].
Mat eval_coeff(const GameSpec& spec, CoeffId which, double t);

/// Every coefficient of a spec frozen at one time.
struct CoeffSnapshot {
  Mat A;
  std::array<Mat, 3> B, C;
  Vec b;
  std::array<Vec, 3> sigma;
  std::array<Mat, 3> Q, R, G, Rinv;
  std::array<Vec, 3> m, nvec;
};

/// Coefficients on the interval of `at`. Throws SingularityError if some R_i
/// is not positive definite.
CoeffSnapshot snapshot(const GameSpec& spec, const TimeGrid& grid, const Instant& at);

struct Violation {
  std::string field;
  std::optional<double> time;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_spec(const GameSpec& spec);

/// JSON document -> spec. Throws ParseError on syntax or structure problems;
/// dimension and definiteness problems are left to validate_spec.
GameSpec parse_spec(const std::string& text);
GameSpec load_spec(const std::string& path);

/// Canonical JSON form; parse_spec(serialize_spec(s)) reproduces s bit-exactly.
std::string serialize_spec(const GameSpec& spec);

}  // namespace stacklq
