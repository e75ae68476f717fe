#include <stacklq/closedloop.hpp>

#include "parallel.hpp"

#include <cmath>
#include <sstream>

namespace stacklq {

// ------------------------------------------------------------- ControlGain

ControlGain ControlGain::zero(int n) {
  return ControlGain{Mat::Zero(n, 4 * n), Mat::Zero(n, 4 * n), Mat::Zero(n, 4 * n), Vec::Zero(n)};
}

Vec ControlGain::apply(const Vec& X, const Vec& Xh, const Vec& Xc) const {
  return K * X + Khat * Xh + Kcheck * Xc + k;
}

Vec ControlGain::filter_g2(const Vec& Xh, const Vec& Xc) const {
  return (K + Khat) * Xh + Kcheck * Xc + k;
}

Vec ControlGain::filter_g1(const Vec& Xc) const { return (K + Khat + Kcheck) * Xc + k; }

ControlGain& ControlGain::operator+=(const ControlGain& o) {
  K += o.K;
  Khat += o.Khat;
  Kcheck += o.Kcheck;
  k += o.k;
  return *this;
}

ControlGain ControlGain::scaled_feedback(double s) const {
  return ControlGain{s * K, s * Khat, s * Kcheck, k};
}

ControlGain operator+(ControlGain a, const ControlGain& b) { return a += b; }

ControlGain operator*(double s, const ControlGain& g) {
  return ControlGain{s * g.K, s * g.Khat, s * g.Kcheck, s * g.k};
}

ControlProcess ControlProcess::affine(GainFn gain) {
  ControlProcess p;
  p.gain_ = std::move(gain);
  return p;
}

ControlProcess ControlProcess::sampled(std::vector<Mat> paths) {
  ControlProcess p;
  p.samples_ = std::move(paths);
  return p;
}

ControlGain ControlProcess::gain(const Instant& at) const {
  if (!gain_) {
    throw UnsupportedError(
        "control has no closed-form filter: only affine feedback of the equilibrium states "
        "(or deterministic functions of time) can be fed to a follower response");
  }
  return gain_(at);
}

// -------------------------------------------------------- closed-loop data

ClosedLoopCoeffs closed_loop_coeffs(const LiftStack& s, const Vec& Omega) {
  const Level3& l = s.l3;
  const Mat BR = l.frakB3 * s.c.Rinv[2];
  const Mat S2 = s.Pf1 + s.Pf2;
  const Mat S3 = S2 + s.Pf3;
  ClosedLoopCoeffs c;
  c.DX = l.frakA1 - l.M * s.Pf1 - BR * l.frakE.transpose();
  c.DXh = l.frakA2 + l.frakFhat * S2 - l.M * s.Pf2;
  c.DXc = l.frakA3 + l.frakFhat * s.Pf3 + l.frakFcheck * S3 - l.M * s.Pf3 -
          BR * l.frakEcheck.transpose();
  c.EXh = c.DX + c.DXh;
  c.EXc = c.DXc;
  c.FXc = c.EXh + c.EXc;
  c.c = (l.frakFhat + l.frakFcheck - l.M) * Omega + l.frakb - BR * s.c.nvec[2];
  c.C = l.frakC;
  c.Sigma = l.Sigma;
  return c;
}

ControlGain equilibrium_gain(const LiftStack& s, const Vec& Omega, int player) {
  const Eigen::Index n = s.c.A.rows();
  const Eigen::Index n2 = 2 * n;
  ControlGain g = ControlGain::zero(static_cast<int>(n));
  switch (player) {
    case 3: {
      const Level3& l = s.l3;
      const Mat& Rinv = s.c.Rinv[2];
      const Mat Bt = l.frakB3.transpose();
      g.K = -Rinv * (Bt * s.Pf1 + l.frakE.transpose());
      g.Khat = -Rinv * (Bt * s.Pf2);
      g.Kcheck = -Rinv * (Bt * s.Pf3 + l.frakEcheck.transpose());
      g.k = -Rinv * (Bt * Omega + s.c.nvec[2]);
      break;
    }
    case 2: {
      const Mat& Rinv = s.c.Rinv[1];
      const Mat S2 = s.l2.calB2.transpose();  // n x 2n
      Mat up_hat = Mat::Zero(n, 4 * n);
      up_hat.leftCols(n2) = S2 * s.P1;
      Mat up_check = Mat::Zero(n, 4 * n);
      up_check.leftCols(n2) = S2 * s.P2 + s.l2.calF2;
      const Mat lo_hat = S2 * (s.Pf1 + s.Pf2).bottomRows(n2);
      const Mat lo_check = S2 * s.Pf3.bottomRows(n2);
      g.Khat = -Rinv * (up_hat + lo_hat);
      g.Kcheck = -Rinv * (up_check + lo_check);
      g.k = -Rinv * (S2 * Omega.tail(n2) + s.c.nvec[1]);
      break;
    }
    case 1: {
      const Mat& Rinv = s.c.Rinv[0];
      const Mat B1t = s.c.B[0].transpose();
      Mat S1 = Mat::Zero(n, n2);  // (0  B1')
      S1.rightCols(n) = B1t;
      Mat up = Mat::Zero(n, 4 * n);
      up.leftCols(n) = B1t * s.p;
      up.leftCols(n2) += S1 * (s.P1 + s.P2);
      const Mat lo = S1 * (s.Pf1 + s.Pf2 + s.Pf3).bottomRows(n2);
      g.Kcheck = -Rinv * (up + lo);
      g.k = -Rinv * (S1 * Omega.tail(n2) + s.c.nvec[0]);
      break;
    }
    default:
      throw std::invalid_argument("player must be 1, 2 or 3");
  }
  return g;
}

// ------------------------------------------------------------ FeedbackLaw

FeedbackLaw::FeedbackLaw(std::shared_ptr<const RiccatiBundle> bundle,
                         std::shared_ptr<const OffsetBundle> offsets, double gain_scale)
    : bundle_(std::move(bundle)), offsets_(std::move(offsets)), scale_(gain_scale) {
  const TimeGrid& g = bundle_->grid;
  const std::size_t nodes = g.nodes().size();
  lifts_.reserve(nodes);
  coeffs_.reserve(nodes);
  for (auto& v : gains_) v.reserve(nodes);
  for (std::size_t k = 0; k < nodes; ++k) {
    lifts_.push_back(lift_at(*bundle_, node_instant(g, k)));
    const Vec Omega = offsets_->Omega.value(k);
    coeffs_.push_back(closed_loop_coeffs(lifts_.back(), Omega));
    for (int i = 1; i <= 3; ++i) {
      ControlGain gi = equilibrium_gain(lifts_.back(), Omega, i);
      gains_[i - 1].push_back(scale_ == 1.0 ? gi : gi.scaled_feedback(scale_));
    }
  }
}

namespace {

// Index of the tabulated node matching `at`, if any.
std::optional<std::size_t> tabulated(const TimeGrid& g, const Instant& at) {
  if (at.t == g.node(at.interval)) return at.interval;
  if (at.interval + 1 == g.steps() && at.t == g.horizon()) return g.steps();
  return std::nullopt;
}

}  // namespace

LiftStack FeedbackLaw::lift(const Instant& at) const {
  if (auto k = tabulated(grid(), at)) return lifts_[*k];
  return lift_at(*bundle_, at);
}

ClosedLoopCoeffs FeedbackLaw::coeffs(const Instant& at) const {
  if (auto k = tabulated(grid(), at)) return coeffs_[*k];
  return closed_loop_coeffs(lift_at(*bundle_, at), offsets_->Omega.at(at));
}

ControlGain FeedbackLaw::gain(int player, const Instant& at) const {
  if (auto k = tabulated(grid(), at)) return gains_[player - 1][*k];
  ControlGain g = equilibrium_gain(lift_at(*bundle_, at), offsets_->Omega.at(at), player);
  return scale_ == 1.0 ? g : g.scaled_feedback(scale_);
}

GainFn FeedbackLaw::gain_fn(int player) const {
  auto self = std::make_shared<const FeedbackLaw>(*this);
  return [self, player](const Instant& at) { return self->gain(player, at); };
}

FeedbackLaw build_feedback(const RiccatiBundle& bundle, const OffsetBundle& offsets,
                           double gain_scale) {
  return FeedbackLaw(std::make_shared<const RiccatiBundle>(bundle),
                     std::make_shared<const OffsetBundle>(offsets), gain_scale);
}

// ------------------------------------------------------------- simulation

namespace {

void check_state(const Eigen::Ref<const Vec>& v, std::size_t path, std::size_t node, double t) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || std::abs(v[i]) > 1e12) {
      std::ostringstream os;
      os << "simulation blew up on path " << path << " at node " << node << " (t=" << t << ")";
      throw BlowUpError(os.str(), node, t);
    }
  }
}

}  // namespace

void simulate_driver(const FeedbackLaw& law, const Increments& dW, DriverPath& out,
                     std::size_t path_id) {
  const TimeGrid& g = law.grid();
  const std::size_t N = g.steps();
  const int n = law.n();
  const Eigen::Index d = 4 * n;
  out.X.resize(d, N + 1);
  out.Xh.resize(d, N + 1);
  out.Xc.resize(d, N + 1);
  Vec X0 = Vec::Zero(d);
  X0.head(n) = law.spec().x0;
  out.X.col(0) = X0;
  out.Xh.col(0) = X0;
  out.Xc.col(0) = X0;
  Vec X(d), Xh(d), Xc(d), base(d), diff(d), dh(d), dx(d), nc(d), nh(d), nx(d), t(d);
  // (C x + Sigma) w accumulated into acc.
  auto add_noise = [&t](Vec& acc, const Mat& C, const Vec& x, const Vec& S, double w) {
    t.noalias() = C * x;
    t += S;
    acc += t * w;
  };
  for (std::size_t k = 0; k < N; ++k) {
    const ClosedLoopCoeffs& c = law.node_coeffs(k);
    const double h = g.step(k);
    const double w1 = dW[k][0], w2 = dW[k][1], w3 = dW[k][2];
    X = out.X.col(k);
    Xh = out.Xh.col(k);
    Xc = out.Xc.col(k);
    // Innovation form: the three levels share the Xcheck drift exactly, so
    // without noise they coincide bit for bit.
    base.noalias() = c.FXc * Xc;
    base += c.c;
    diff = Xh - Xc;
    dh.noalias() = c.EXh * diff;
    diff = X - Xh;
    dx.noalias() = c.DX * diff;
    nc.setZero();
    add_noise(nc, c.C[2], Xc, c.Sigma[2], w3);
    nh.setZero();
    add_noise(nh, c.C[1], Xh, c.Sigma[1], w2);
    add_noise(nh, c.C[2], Xh, c.Sigma[2], w3);
    nx.setZero();
    add_noise(nx, c.C[0], X, c.Sigma[0], w1);
    add_noise(nx, c.C[1], X, c.Sigma[1], w2);
    add_noise(nx, c.C[2], X, c.Sigma[2], w3);
    out.Xc.col(k + 1) = Xc + h * base + nc;
    dh += base;
    out.Xh.col(k + 1) = Xh + h * dh + nh;
    dx += dh;
    out.X.col(k + 1) = X + h * dx + nx;
    check_state(out.X.col(k + 1), path_id, k + 1, g.node(k + 1));
  }
}

std::array<Mat, 3> realized_controls(const FeedbackLaw& law, const DriverPath& Z) {
  const std::size_t nodes = law.grid().nodes().size();
  std::array<Mat, 3> v;
  for (int i = 0; i < 3; ++i) {
    v[i].resize(law.n(), static_cast<Eigen::Index>(nodes));
    for (std::size_t k = 0; k < nodes; ++k) {
      const Eigen::Index c = static_cast<Eigen::Index>(k);
      v[i].col(c) = law.node_gain(i + 1, k).apply(Z.X.col(c), Z.Xh.col(c), Z.Xc.col(c));
    }
  }
  return v;
}

PathBundle simulate_equilibrium(const FeedbackLaw& law, const NoiseSource& noise,
                                std::size_t n_paths, unsigned threads, std::size_t first_path) {
  PathBundle b;
  b.grid = law.grid();
  b.seed = noise.seed();
  b.first_path = first_path;
  b.paths.resize(n_paths);
  detail::parallel_chunks(n_paths, threads, [&](std::size_t begin, std::size_t end) {
    Increments dW;
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t id = first_path + i;
      noise.increments(b.grid, id, dW);
      PathRecord& r = b.paths[i];
      simulate_driver(law, dW, r.Z, id);
      r.v = realized_controls(law, r.Z);
      r.x = r.Z.X.topRows(law.n());
    }
  });
  return b;
}

std::vector<CoeffSnapshot> node_snapshots(const GameSpec& spec, const TimeGrid& grid) {
  std::vector<CoeffSnapshot> out;
  out.reserve(grid.nodes().size());
  for (std::size_t k = 0; k < grid.nodes().size(); ++k) {
    out.push_back(snapshot(spec, grid, node_instant(grid, k)));
  }
  return out;
}

Mat simulate_state_path(const std::vector<CoeffSnapshot>& nodes, const TimeGrid& grid,
                        const Vec& x0, const std::array<const Mat*, 3>& v,
                        const Increments& dW) {
  const std::size_t N = grid.steps();
  Mat x(x0.size(), static_cast<Eigen::Index>(N + 1));
  x.col(0) = x0;
  for (std::size_t k = 0; k < N; ++k) {
    const CoeffSnapshot& c = nodes[k];
    const Eigen::Index kk = static_cast<Eigen::Index>(k);
    const double h = grid.step(k);
    const auto xk = x.col(kk);
    auto next = x.col(kk + 1);
    next = xk + h * c.b;
    next.noalias() += h * (c.A * xk);
    for (int i = 0; i < 3; ++i) {
      next.noalias() += h * (c.B[i] * v[i]->col(kk));
      next.noalias() += dW[k][i] * (c.C[i] * xk);
      next += dW[k][i] * c.sigma[i];
    }
    check_state(next, 0, k + 1, grid.node(k + 1));
  }
  return x;
}

std::vector<Mat> simulate_state(const GameSpec& spec, const TimeGrid& grid,
                                const std::array<ControlProcess, 3>& controls,
                                const NoiseSource& noise, std::size_t n_paths,
                                const std::vector<DriverPath>* drivers) {
  const auto nodes = node_snapshots(spec, grid);
  const std::size_t N = grid.steps();
  std::vector<Mat> out(n_paths);
  Increments dW;
  for (std::size_t p = 0; p < n_paths; ++p) {
    std::array<Mat, 3> v;
    for (int i = 0; i < 3; ++i) {
      if (controls[i].is_affine()) {
        if (drivers == nullptr || drivers->size() <= p) {
          throw std::invalid_argument("affine controls need equilibrium driver paths");
        }
        const DriverPath& Z = (*drivers)[p];
        v[i].resize(spec.n, static_cast<Eigen::Index>(N + 1));
        for (std::size_t k = 0; k <= N; ++k) {
          const Eigen::Index c = static_cast<Eigen::Index>(k);
          v[i].col(c) =
              controls[i].gain(node_instant(grid, k)).apply(Z.X.col(c), Z.Xh.col(c), Z.Xc.col(c));
        }
      } else {
        v[i] = controls[i].samples(p);
      }
    }
    noise.increments(grid, p, dW);
    out[p] = simulate_state_path(nodes, grid, spec.x0, {&v[0], &v[1], &v[2]}, dW);
  }
  return out;
}

}  // namespace stacklq
