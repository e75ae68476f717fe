#include <stacklq/montecarlo.hpp>

#include "log.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <memory>
#include <cmath>
#include <numbers>
#include <sstream>

namespace stacklq {

std::pair<double, double> mean_and_stderr(const std::vector<double>& samples) {
  const std::size_t n = samples.size();
  if (n == 0) return {0.0, 0.0};
  // Shifted by the first sample, so identical samples give an exact mean and a
  // zero standard error.
  const double s0 = samples.front();
  double sum = 0.0;
  for (double s : samples) sum += s - s0;
  const double dmean = sum / static_cast<double>(n);
  const double mean = s0 + dmean;
  if (n == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double s : samples) ss += (s - s0 - dmean) * (s - s0 - dmean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return {mean, sd / std::sqrt(static_cast<double>(n))};
}

double path_cost(const std::vector<CoeffSnapshot>& nodes, const TimeGrid& grid, int player,
                 const Mat& x, const Mat& v) {
  const int i = player - 1;
  const std::size_t N = grid.steps();
  double J = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    const CoeffSnapshot& c = nodes[k];
    const Eigen::Index kk = static_cast<Eigen::Index>(k);
    const auto xk = x.col(kk);
    const auto vk = v.col(kk);
    const double run = xk.dot(c.Q[i].lazyProduct(xk)) + vk.dot(c.R[i].lazyProduct(vk)) +
                       2.0 * c.m[i].dot(xk) +
                       2.0 * c.nvec[i].dot(vk);
    J += 0.5 * grid.step(k) * run;
  }
  const auto xT = x.col(static_cast<Eigen::Index>(N));
  J += 0.5 * xT.dot(nodes[N].G[i].lazyProduct(xT));
  return J;
}

CostEstimate estimate_cost(const GameSpec& spec, const TimeGrid& grid, int player,
                           const PathBundle& bundle) {
  if (!(bundle.grid == grid)) {
    throw DomainError("path bundle was simulated on a different grid than the cost grid");
  }
  const auto nodes = node_snapshots(spec, grid);
  std::vector<double> J(bundle.paths.size());
  for (std::size_t p = 0; p < bundle.paths.size(); ++p) {
    const PathRecord& r = bundle.paths[p];
    J[p] = path_cost(nodes, grid, player, r.x, r.v[player - 1]);
  }
  const auto [mean, se] = mean_and_stderr(J);
  return CostEstimate{player, mean, se, J.size(), bundle.seed, grid.steps()};
}

// ------------------------------------------------------------ directions

ControlGain Direction::gain(const TimeGrid& grid, const Instant& at) const {
  const int n = static_cast<int>(u.size());
  ControlGain g = ControlGain::zero(n);
  const double T = grid.horizon();
  switch (kind) {
    case DirectionKind::Constant:
      g.k = u;
      break;
    case DirectionKind::Ramp:
      g.k = (at.t / T) * u;
      break;
    case DirectionKind::Sine:
      g.k = std::sin(2.0 * std::numbers::pi * at.t / T) * u;
      break;
    case DirectionKind::Indicator: {
      const double mid = 0.5 * (grid.node(at.interval) + grid.node(at.interval + 1));
      g.k = (mid < 0.5 * T ? 1.0 : 0.0) * u;
      break;
    }
    case DirectionKind::Feedback:
      g.Kcheck.leftCols(n) = u * u.transpose();
      break;
  }
  return g;
}

std::vector<Direction> standard_directions(int n) {
  const Vec u = Vec::Ones(n) / std::sqrt(static_cast<double>(n));
  return {
      {"constant", DirectionKind::Constant, u},   {"ramp", DirectionKind::Ramp, u},
      {"sine", DirectionKind::Sine, u},           {"indicator", DirectionKind::Indicator, u},
      {"feedback", DirectionKind::Feedback, u},
  };
}

// ------------------------------------------------------- variational test

namespace {

void check_epsilons(const std::vector<double>& eps) {
  std::vector<double> s = eps;
  std::sort(s.begin(), s.end());
  bool zero = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s[i])) throw DomainError("epsilons must be finite");
    if (s[i] == 0.0) zero = true;
    if (s[i] != -s[s.size() - 1 - i]) throw DomainError("epsilons must be symmetric about 0");
  }
  if (!zero) throw DomainError("epsilons must contain 0");
  if (s.size() < 3) throw DomainError("epsilons need at least one nonzero pair");
}

// Values of a path family affine in eps, from eps = 0 and eps = e_max.
Mat interpolate(const Mat& a0, const Mat& a1, double w) { return a0 + w * (a1 - a0); }

ControlProcess perturbed(const FeedbackLaw& law, int player, const Direction& d, double eps) {
  GainFn base = law.gain_fn(player);
  const TimeGrid grid = law.grid();
  return ControlProcess::affine([base, d, eps, grid](const Instant& at) {
    ControlGain g = base(at);
    if (eps != 0.0) g += eps * d.gain(grid, at);
    return g;
  });
}

// Per path: x and the tested player's control at eps = 0 and eps = e_max.
struct PathPair {
  Mat x0, v0, x1, v1;
};

}  // namespace

std::vector<PerturbationReport> variational_test(const FeedbackLaw& law, int player,
                                                 const std::vector<Direction>& directions,
                                                 const std::vector<double>& epsilons,
                                                 const NoiseSource& noise, std::size_t n_paths,
                                                 unsigned threads) {
  if (player < 1 || player > 3) throw DomainError("player must be 1, 2 or 3");
  check_epsilons(epsilons);
  if (n_paths < 2) throw DomainError("variational test needs at least 2 paths");
  const TimeGrid& grid = law.grid();
  const GameSpec& spec = law.spec();
  const int n = spec.n;
  for (const Direction& d : directions) {
    if (d.u.size() != n) throw UnsupportedError("direction " + d.id + " has the wrong dimension");
  }
  double e_max = 0.0, e_min = 0.0;
  for (double e : epsilons) {
    e_max = std::max(e_max, std::abs(e));
    if (e > 0.0 && (e_min == 0.0 || e < e_min)) e_min = e;
  }
  const std::size_t D = directions.size();
  const std::size_t E = epsilons.size();
  const std::size_t N = grid.steps();
  const auto nodes = node_snapshots(spec, grid);

  // Direction gains tabulated at nodes (player 1 applies them directly).
  std::vector<std::vector<ControlGain>> dir_nodes(D);
  for (std::size_t d = 0; d < D; ++d) {
    for (std::size_t k = 0; k <= N; ++k) {
      dir_nodes[d].push_back(directions[d].gain(grid, node_instant(grid, k)));
    }
  }

  // Responders of the lower levels at eps = 0 and at e_max per direction.
  std::vector<std::unique_ptr<Player1Responder>> r1;
  std::vector<std::unique_ptr<Player12Responder>> r12;
  const ControlProcess v3_eq = ControlProcess::affine(law.gain_fn(3));
  if (player == 2) {
    r1.push_back(std::make_unique<Player1Responder>(law, ControlProcess::affine(law.gain_fn(2)),
                                                    v3_eq));
    for (const Direction& d : directions) {
      r1.push_back(std::make_unique<Player1Responder>(law, perturbed(law, 2, d, e_max), v3_eq));
    }
  } else if (player == 3) {
    r12.push_back(std::make_unique<Player12Responder>(law, v3_eq));
    for (const Direction& d : directions) {
      r12.push_back(std::make_unique<Player12Responder>(law, perturbed(law, 3, d, e_max)));
    }
  }

  // costs[d][e][path]
  std::vector<std::vector<std::vector<double>>> costs(
      D, std::vector<std::vector<double>>(E, std::vector<double>(n_paths)));
  std::vector<std::vector<double>> slopes(D, std::vector<double>(n_paths));
  std::size_t i_plus = 0, i_minus = 0;
  for (std::size_t e = 0; e < E; ++e) {
    if (epsilons[e] == e_min) i_plus = e;
    if (epsilons[e] == -e_min) i_minus = e;
  }

  detail::parallel_chunks(n_paths, threads, [&](std::size_t begin, std::size_t end) {
    Increments dW;
    DriverPath Z;
    Player1Path p1;
    Player12Path p12;
    PathPair pp;
    for (std::size_t i = begin; i < end; ++i) {
      noise.increments(grid, i, dW);
      simulate_driver(law, dW, Z, i);
      std::array<Mat, 3> v_eq;
      if (player == 1) {
        v_eq = realized_controls(law, Z);
        pp.x0 = simulate_state_path(nodes, grid, spec.x0, {&v_eq[0], &v_eq[1], &v_eq[2]}, dW);
        pp.v0 = v_eq[0];
      } else if (player == 2) {
        r1[0]->respond(Z, dW, p1);
        pp.x0 = p1.x;
        pp.v0 = p1.v[1];
      } else {
        r12[0]->respond(Z, dW, p12);
        pp.x0 = p12.x;
        pp.v0 = p12.v[2];
      }
      for (std::size_t d = 0; d < D; ++d) {
        if (player == 1) {
          Mat v1 = v_eq[0];
          for (std::size_t k = 0; k <= N; ++k) {
            const Eigen::Index c = static_cast<Eigen::Index>(k);
            v1.col(c) += e_max * dir_nodes[d][k].apply(Z.X.col(c), Z.Xh.col(c), Z.Xc.col(c));
          }
          pp.x1 = simulate_state_path(nodes, grid, spec.x0, {&v1, &v_eq[1], &v_eq[2]}, dW);
          pp.v1 = std::move(v1);
        } else if (player == 2) {
          r1[d + 1]->respond(Z, dW, p1);
          pp.x1 = p1.x;
          pp.v1 = p1.v[1];
        } else {
          r12[d + 1]->respond(Z, dW, p12);
          pp.x1 = p12.x;
          pp.v1 = p12.v[2];
        }
        for (std::size_t e = 0; e < E; ++e) {
          const double w = epsilons[e] / e_max;
          costs[d][e][i] = w == 0.0 ? path_cost(nodes, grid, player, pp.x0, pp.v0)
                                    : path_cost(nodes, grid, player, interpolate(pp.x0, pp.x1, w),
                                                interpolate(pp.v0, pp.v1, w));
        }
        slopes[d][i] = (costs[d][i_plus][i] - costs[d][i_minus][i]) / (2.0 * e_min);
      }
    }
  });

  std::vector<PerturbationReport> out;
  for (std::size_t d = 0; d < D; ++d) {
    PerturbationReport r;
    r.player = player;
    r.direction_id = directions[d].id;
    r.epsilons = epsilons;
    for (std::size_t e = 0; e < E; ++e) {
      const auto [mean, se] = mean_and_stderr(costs[d][e]);
      r.costs.push_back(CostEstimate{player, mean, se, n_paths, noise.seed(), N});
    }
    const auto [slope, slope_se] = mean_and_stderr(slopes[d]);
    r.slope0 = slope;
    r.slope_stderr = slope_se;
    double J0 = 0.0;
    for (std::size_t e = 0; e < E; ++e) {
      if (epsilons[e] == 0.0) J0 = r.costs[e].mean;
    }
    r.curvature_ok = true;
    for (const CostEstimate& c : r.costs) {
      if (c.mean < J0 - 3.0 * c.std_error) r.curvature_ok = false;
    }
    log::debug("variational player {} direction {}: slope0 {:.6g} +- {:.3g}, curvature {}",
               player, r.direction_id, r.slope0, r.slope_stderr, r.curvature_ok);
    out.push_back(std::move(r));
  }
  return out;
}

// --------------------------------------------------------- particle filter

OracleReport particle_filter(const FeedbackLaw& law, const std::vector<std::size_t>& nodes,
                             SigmaField field, std::size_t n_outer, std::size_t n_inner,
                             const NoiseSource& noise, unsigned threads) {
  if (n_inner < 100) {
    throw DomainError("particle oracle needs n_inner >= 100 (got " + std::to_string(n_inner) +
                      ")");
  }
  const TimeGrid& grid = law.grid();
  for (std::size_t k : nodes) {
    if (k > grid.steps()) throw DomainError("oracle node outside the grid");
  }
  const std::size_t K = nodes.size();
  OracleReport report;
  report.field = field;
  report.n_outer = n_outer;
  report.n_inner = n_inner;
  report.samples.resize(n_outer * K);
  const bool g1 = field == SigmaField::G1;

  detail::parallel_chunks(n_outer, threads, [&](std::size_t begin, std::size_t end) {
    Increments dW;
    DriverPath Z;
    for (std::size_t o = begin; o < end; ++o) {
      // xs[node][j] and xhs[node][j]
      std::vector<std::vector<Vec>> xs(K), xhs(K);
      std::vector<Vec> filters(K);
      for (std::size_t j = 0; j < n_inner; ++j) {
        const std::uint64_t inner = static_cast<std::uint64_t>(o * n_inner + j);
        const std::array<std::uint64_t, 3> ids =
            g1 ? std::array<std::uint64_t, 3>{inner, inner, o}
               : std::array<std::uint64_t, 3>{inner, o, o};
        noise.increments(grid, ids, dW);
        simulate_driver(law, dW, Z, inner);
        for (std::size_t q = 0; q < K; ++q) {
          const Eigen::Index c = static_cast<Eigen::Index>(nodes[q]);
          xs[q].push_back(Z.X.col(c));
          if (g1) xhs[q].push_back(Z.Xh.col(c));
          if (j == 0) filters[q] = g1 ? Z.Xc.col(c) : Z.Xh.col(c);
        }
      }
      for (std::size_t q = 0; q < K; ++q) {
        OracleSample& s = report.samples[o * K + q];
        s.node = nodes[q];
        s.t = grid.node(nodes[q]);
        s.outer = o;
        s.filter = filters[q];
        auto moments = [&](const std::vector<Vec>& v, Vec& mean, Vec& se) {
          const Eigen::Index d = v.front().size();
          mean.resize(d);
          se.resize(d);
          std::vector<double> comp(v.size());
          for (Eigen::Index r = 0; r < d; ++r) {
            for (std::size_t j = 0; j < v.size(); ++j) comp[j] = v[j][r];
            const auto [m, e] = mean_and_stderr(comp);
            mean[r] = m;
            se[r] = e;
          }
        };
        moments(xs[q], s.mean_X, s.stderr_X);
        if (g1) moments(xhs[q], s.mean_Xh, s.stderr_Xh);
      }
    }
  });
  return report;
}

// --------------------------------------------------------- ansatz residual

AnsatzResidual ansatz_residual(const FeedbackLaw& law, const NoiseSource& noise,
                               std::size_t n_paths, unsigned threads) {
  const TimeGrid& grid = law.grid();
  const std::size_t N = grid.steps();
  const int n = law.n();
  const Eigen::Index n2 = 2 * n;
  const Eigen::Index d = 4 * n;

  // ytilde = -Lambda Xcheck - ell, Lambda n x 4n.
  std::vector<Mat> Lambda(N + 1);
  std::vector<Vec> ell(N + 1);
  for (std::size_t k = 0; k <= N; ++k) {
    const LiftStack& s = law.node_lift(k);
    Mat L = Mat::Zero(n, d);
    L.leftCols(n) = s.p;
    L.leftCols(n2) += (s.P1 + s.P2).bottomRows(n);
    L += (s.Pf1 + s.Pf2 + s.Pf3).bottomRows(n);
    Lambda[k] = std::move(L);
    ell[k] = law.offsets().Omega.value(k).col(0).tail(n);
  }

  std::vector<std::vector<double>> sq(N, std::vector<double>(n_paths));
  detail::parallel_chunks(n_paths, threads, [&](std::size_t begin, std::size_t end) {
    Increments dW;
    DriverPath Z;
    for (std::size_t i = begin; i < end; ++i) {
      noise.increments(grid, i, dW);
      simulate_driver(law, dW, Z, i);
      for (std::size_t k = 0; k < N; ++k) {
        const LiftStack& s = law.node_lift(k);
        const ClosedLoopCoeffs& cl = law.node_coeffs(k);
        const CoeffSnapshot& c = s.c;
        const double h = grid.step(k);
        const Vec Xc = Z.Xc.col(static_cast<Eigen::Index>(k));
        const Vec xc = Xc.head(n);
        const Vec y = -Lambda[k] * Xc - ell[k];
        Vec Cz = Vec::Zero(n);
        for (int j = 0; j < 2; ++j) Cz -= c.C[j].transpose() * (s.p * (c.C[j] * xc + c.sigma[j]));
        Cz -= c.C[2].transpose() * (Lambda[k] * (cl.C[2] * Xc + cl.Sigma[2]));
        const Vec adjoint = c.A.transpose() * y + Cz - c.Q[0] * xc - c.m[0];
        const Vec along = -((Lambda[k + 1] - Lambda[k]) / h) * Xc -
                          Lambda[k] * (cl.FXc * Xc + cl.c) - (ell[k + 1] - ell[k]) / h;
        sq[k][i] = (along + adjoint).squaredNorm();
      }
    }
  });

  AnsatzResidual out;
  out.rms.resize(N);
  for (std::size_t k = 0; k < N; ++k) {
    double s = 0.0;
    for (double v : sq[k]) s += v;
    out.rms[k] = std::sqrt(s / static_cast<double>(n_paths));
    out.max_rms = std::max(out.max_rms, out.rms[k]);
  }
  return out;
}

}  // namespace stacklq
