#include <stacklq/model.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stacklq {

// ---------------------------------------------------------------- TimeGrid

TimeGrid TimeGrid::uniform(double horizon, std::size_t steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw DomainError("time grid: horizon must be positive and finite");
  }
  if (steps < 1) throw DomainError("time grid: at least one step required");
  std::vector<double> nodes(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    nodes[k] = horizon * static_cast<double>(k) / static_cast<double>(steps);
  }
  nodes.back() = horizon;
  return TimeGrid(std::move(nodes));
}

TimeGrid TimeGrid::from_nodes(std::vector<double> nodes) {
  if (nodes.size() < 2) throw DomainError("time grid: need at least two nodes");
  if (nodes.front() != 0.0) throw DomainError("time grid: first node must be 0");
  for (std::size_t k = 1; k < nodes.size(); ++k) {
    if (!(nodes[k] > nodes[k - 1])) {
      throw DomainError("time grid: nodes must be strictly increasing");
    }
  }
  return TimeGrid(std::move(nodes));
}

TimeGrid TimeGrid::refined(const std::vector<double>& extra) const {
  std::vector<double> nodes = nodes_;
  const double T = horizon();
  for (double t : extra) {
    if (t > 0.0 && t < T) nodes.push_back(t);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return TimeGrid(std::move(nodes));
}

bool TimeGrid::uniform_spacing() const {
  if (nodes_.size() < 2) return true;
  const double h = horizon() / static_cast<double>(steps());
  for (std::size_t k = 0; k + 1 < nodes_.size(); ++k) {
    if (std::abs(step(k) - h) > 1e-12 * std::max(1.0, horizon())) return false;
  }
  return true;
}

std::size_t TimeGrid::interval_of(double t) const {
  if (t >= nodes_.back()) return steps() - 1;
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
  if (it == nodes_.begin()) return 0;
  return static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

Instant node_instant(const TimeGrid& grid, std::size_t k) {
  return Instant{grid.node(k), std::min(k, grid.steps() - 1)};
}

// ------------------------------------------------------------ TimeFunction

TimeFunction TimeFunction::constant(Mat value) {
  TimeFunction f;
  f.values_.push_back(std::move(value));
  return f;
}

TimeFunction TimeFunction::piecewise(std::vector<double> breaks, std::vector<Mat> values) {
  if (values.size() != breaks.size() + 1) {
    throw DomainError("piecewise coefficient: need exactly one more value than breaks");
  }
  TimeFunction f;
  f.breaks_ = std::move(breaks);
  f.values_ = std::move(values);
  return f;
}

const Mat& TimeFunction::at(double t) const {
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  return values_[static_cast<std::size_t>(it - breaks_.begin())];
}

bool TimeFunction::operator==(const TimeFunction& other) const {
  if (breaks_ != other.breaks_ || values_.size() != other.values_.size()) return false;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const Mat& a = values_[i];
    const Mat& b = other.values_[i];
    if (a.rows() != b.rows() || a.cols() != b.cols() || a != b) return false;
  }
  return true;
}

// ------------------------------------------------------------------- specs

InfoStructure InfoStructure::nested() {
  InfoStructure s;
  s.adjacency = {{{0, 0, 1}, {0, 1, 1}, {1, 1, 1}}};
  return s;
}

bool InfoStructure::is_nested() const { return adjacency == nested().adjacency; }

std::vector<double> GameSpec::breakpoints() const {
  std::vector<double> out;
  auto add = [&](const TimeFunction& f) {
    out.insert(out.end(), f.breaks().begin(), f.breaks().end());
  };
  add(coeffs.A);
  add(coeffs.b);
  for (int i = 0; i < 3; ++i) {
    add(coeffs.B[i]);
    add(coeffs.C[i]);
    add(coeffs.sigma[i]);
    add(costs.player[i].Q);
    add(costs.player[i].R);
    add(costs.player[i].m);
    add(costs.player[i].n);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

TimeGrid GameSpec::solver_grid() const { return grid.refined(breakpoints()); }

GameSpec zero_spec(int n, double horizon, std::size_t steps) {
  GameSpec s;
  s.n = n;
  s.grid = TimeGrid::uniform(horizon, steps);
  const Mat Z = Mat::Zero(n, n);
  const Mat z = Mat::Zero(n, 1);
  s.coeffs.A = TimeFunction::constant(Z);
  s.coeffs.b = TimeFunction::constant(z);
  for (int i = 0; i < 3; ++i) {
    s.coeffs.B[i] = TimeFunction::constant(Z);
    s.coeffs.C[i] = TimeFunction::constant(Z);
    s.coeffs.sigma[i] = TimeFunction::constant(z);
    PlayerCost& c = s.costs.player[i];
    c.Q = TimeFunction::constant(Z);
    c.R = TimeFunction::constant(Mat::Identity(n, n));
    c.G = Z;
    c.m = TimeFunction::constant(z);
    c.n = TimeFunction::constant(z);
  }
  s.x0 = Vec::Zero(n);
  return s;
}

std::string to_string(CoeffId id) {
  static const char* names[] = {"A",  "B1", "B2", "B3", "C1", "C2", "C3", "b",  "sigma1",
                                "sigma2", "sigma3", "Q1", "Q2", "Q3", "R1", "R2", "R3", "G1",
                                "G2", "G3", "m1", "m2", "m3", "n1", "n2", "n3"};
  return names[static_cast<int>(id)];
}

namespace {

const TimeFunction* lookup(const GameSpec& s, CoeffId id) {
  const auto& c = s.coeffs;
  const auto& p = s.costs.player;
  switch (id) {
    case CoeffId::A: return &c.A;
    case CoeffId::B1: return &c.B[0];
    case CoeffId::B2: return &c.B[1];
    case CoeffId::B3: return &c.B[2];
    case CoeffId::C1: return &c.C[0];
    case CoeffId::C2: return &c.C[1];
    case CoeffId::C3: return &c.C[2];
    case CoeffId::b: return &c.b;
    case CoeffId::sigma1: return &c.sigma[0];
    case CoeffId::sigma2: return &c.sigma[1];
    case CoeffId::sigma3: return &c.sigma[2];
    case CoeffId::Q1: return &p[0].Q;
    case CoeffId::Q2: return &p[1].Q;
    case CoeffId::Q3: return &p[2].Q;
    case CoeffId::R1: return &p[0].R;
    case CoeffId::R2: return &p[1].R;
    case CoeffId::R3: return &p[2].R;
    case CoeffId::m1: return &p[0].m;
    case CoeffId::m2: return &p[1].m;
    case CoeffId::m3: return &p[2].m;
    case CoeffId::n1: return &p[0].n;
    case CoeffId::n2: return &p[1].n;
    case CoeffId::n3: return &p[2].n;
    default: return nullptr;
  }
}

Mat inverse_spd(const Mat& R, const char* name, double t) {
  Eigen::LLT<Mat> llt(R);
  if (llt.info() != Eigen::Success) {
    std::ostringstream os;
    os << name << " is not positive definite at t=" << t;
    throw SingularityError(os.str(), t);
  }
  return llt.solve(Mat::Identity(R.rows(), R.cols()));
}

}  // namespace

Mat eval_coeff(const GameSpec& spec, CoeffId which, double t) {
  const double T = spec.grid.horizon();
  if (!(t >= 0.0 && t <= T)) {
    std::ostringstream os;
    os << "eval_coeff(" << to_string(which) << "): t=" << t << " outside [0," << T << "]";
    throw DomainError(os.str());
  }
  switch (which) {
    case CoeffId::G1: return spec.costs.player[0].G;
    case CoeffId::G2: return spec.costs.player[1].G;
    case CoeffId::G3: return spec.costs.player[2].G;
    default: return lookup(spec, which)->at(t);
  }
}

CoeffSnapshot snapshot(const GameSpec& spec, const TimeGrid& grid, const Instant& at) {
  const std::size_t k = at.interval;
  const double tp = 0.5 * (grid.node(k) + grid.node(k + 1));
  const auto& c = spec.coeffs;
  CoeffSnapshot s;
  s.A = c.A.at(tp);
  s.b = c.b.at(tp);
  static const char* rnames[] = {"R1", "R2", "R3"};
  for (int i = 0; i < 3; ++i) {
    s.B[i] = c.B[i].at(tp);
    s.C[i] = c.C[i].at(tp);
    s.sigma[i] = c.sigma[i].at(tp);
    const PlayerCost& pc = spec.costs.player[i];
    s.Q[i] = pc.Q.at(tp);
    s.R[i] = pc.R.at(tp);
    s.G[i] = pc.G;
    s.m[i] = pc.m.at(tp);
    s.nvec[i] = pc.n.at(tp);
    s.Rinv[i] = inverse_spd(s.R[i], rnames[i], at.t);
  }
  return s;
}

// -------------------------------------------------------------- validation

namespace {

struct Validator {
  const GameSpec& spec;
  ValidationReport report;

  void add(const std::string& field, std::optional<double> t, const std::string& msg) {
    report.violations.push_back(Violation{field, t, msg});
  }

  bool finite(const Mat& m) const { return m.allFinite(); }

  // Shape and finiteness of one coefficient; returns false if unusable.
  bool check_shape(const std::string& field, const TimeFunction& f, Eigen::Index rows,
                   Eigen::Index cols) {
    if (f.values().empty()) {
      add(field, std::nullopt, "missing");
      return false;
    }
    bool good = true;
    const double T = spec.grid.horizon();
    const auto& br = f.breaks();
    for (std::size_t j = 0; j < br.size(); ++j) {
      if (!std::isfinite(br[j]) || br[j] < 0.0 || br[j] > T) {
        add(field, br[j], "breakpoint outside [0,T]");
        good = false;
      }
      if (j > 0 && !(br[j] > br[j - 1])) {
        add(field, br[j], "breakpoints not strictly increasing");
        good = false;
      }
    }
    for (std::size_t j = 0; j < f.values().size(); ++j) {
      const Mat& v = f.values()[j];
      if (v.rows() != rows || v.cols() != cols) {
        std::ostringstream os;
        os << "piece " << j << " has shape " << v.rows() << "x" << v.cols() << ", expected "
           << rows << "x" << cols;
        add(field, std::nullopt, os.str());
        good = false;
      } else if (!finite(v)) {
        add(field, std::nullopt, "non-finite entry in piece " + std::to_string(j));
        good = false;
      }
    }
    return good;
  }

  // Definiteness at every grid node, reported once per offending piece.
  void check_definite(const std::string& field, const TimeFunction& f, double floor,
                      const char* what) {
    const auto& nodes = spec.grid.nodes();
    std::vector<bool> seen(f.values().size(), false);
    for (double t : nodes) {
      auto it = std::upper_bound(f.breaks().begin(), f.breaks().end(), t);
      const std::size_t piece = static_cast<std::size_t>(it - f.breaks().begin());
      if (seen[piece]) continue;
      seen[piece] = true;
      check_matrix(field, f.values()[piece], t, floor, what);
    }
  }

  void check_matrix(const std::string& field, const Mat& M, std::optional<double> t,
                    double floor, const char* what) {
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      add(field, t, "not symmetric");
      return;
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    if (lo < floor) {
      std::ostringstream os;
      os << "not " << what << " (min eigenvalue " << lo << " < " << floor << ")";
      add(field, t, os.str());
    }
  }

  void run() {
    const int n = spec.n;
    if (n < 1) {
      add("n", std::nullopt, "state dimension must be at least 1");
      return;
    }
    if (spec.grid.nodes().size() < 2 || !(spec.grid.horizon() > 0.0)) {
      add("T", std::nullopt, "horizon must be positive");
      return;
    }
    if (spec.grid.steps() < 2) add("steps", std::nullopt, "at least two steps required");
    if (!(spec.rho_min > 0.0)) add("rho_min", std::nullopt, "must be positive");
    if (spec.x0.size() != n) {
      add("x0", std::nullopt, "length differs from n");
    } else if (!spec.x0.allFinite()) {
      add("x0", std::nullopt, "non-finite entry");
    }

    const auto& c = spec.coeffs;
    check_shape("A", c.A, n, n);
    check_shape("b", c.b, n, 1);
    for (int i = 0; i < 3; ++i) {
      const std::string s = std::to_string(i + 1);
      check_shape("B" + s, c.B[i], n, n);
      check_shape("C" + s, c.C[i], n, n);
      check_shape("sigma" + s, c.sigma[i], n, 1);
    }
    for (int i = 0; i < 3; ++i) {
      const std::string s = std::to_string(i + 1);
      const PlayerCost& pc = spec.costs.player[i];
      if (check_shape("Q" + s, pc.Q, n, n)) check_definite("Q" + s, pc.Q, -1e-10, "positive semidefinite");
      if (check_shape("R" + s, pc.R, n, n)) check_definite("R" + s, pc.R, spec.rho_min, "positive definite");
      check_shape("m" + s, pc.m, n, 1);
      check_shape("n" + s, pc.n, n, 1);
      if (pc.G.rows() != n || pc.G.cols() != n) {
        add("G" + s, std::nullopt, "shape differs from n x n");
      } else if (!pc.G.allFinite()) {
        add("G" + s, std::nullopt, "non-finite entry");
      } else {
        check_matrix("G" + s, pc.G, std::nullopt, -1e-10, "positive semidefinite");
      }
    }
    if (!spec.info.is_nested()) {
      add("adjacency", std::nullopt, "information structure must be rows {001, 011, 111}");
    }
  }
};

}  // namespace

ValidationReport validate_spec(const GameSpec& spec) {
  Validator v{spec, {}};
  v.run();
  return std::move(v.report);
}

}  // namespace stacklq
