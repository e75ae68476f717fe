#include "test_util.hpp"

#include <stacklq/closedloop.hpp>
#include <stacklq/montecarlo.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace stacklq;
using stacklq::test::load;
using stacklq::test::max_abs;
using stacklq::test::scalar;
using stacklq::test::with_steps;

namespace {

std::shared_ptr<const FeedbackLaw> make_law(const GameSpec& s, double scale = 1.0) {
  auto b = std::make_shared<const RiccatiBundle>(solve_riccati(s));
  auto o = std::make_shared<const OffsetBundle>(solve_offsets(*b));
  return std::make_shared<const FeedbackLaw>(b, o, scale);
}

GameSpec without_noise(GameSpec s) {
  const Mat Z = Mat::Zero(s.n, s.n);
  const Mat z = Mat::Zero(s.n, 1);
  for (int i = 0; i < 3; ++i) {
    s.coeffs.C[i] = TimeFunction::constant(Z);
    s.coeffs.sigma[i] = TimeFunction::constant(z);
  }
  return s;
}

}  // namespace

TEST(FeedbackLaw, ZeroSpecHasZeroGains) {
  const auto law = make_law(zero_spec(2, 1.0, 20));
  for (int player = 1; player <= 3; ++player) {
    for (std::size_t k = 0; k <= 20; ++k) {
      const ControlGain& g = law->node_gain(player, k);
      EXPECT_EQ(max_abs(g.K) + max_abs(g.Khat) + max_abs(g.Kcheck) + max_abs(g.k), 0.0);
    }
  }
}

TEST(FeedbackLaw, CoefficientIdentities) {
  const auto law = make_law(load("generic_2d.json"));
  for (std::size_t k = 0; k <= law->grid().steps(); k += 5) {
    const ClosedLoopCoeffs& c = law->node_coeffs(k);
    EXPECT_LT(max_abs(c.DX + c.DXh - c.EXh), 1e-13);
    EXPECT_LT(max_abs(c.EXh + c.EXc - c.FXc), 1e-13);
  }
}

TEST(FeedbackLaw, OffNodeGainMatchesNode) {
  const auto law = make_law(load("generic_scalar.json"));
  const Instant at = node_instant(law->grid(), 17);
  const ControlGain a = law->gain(2, at);
  const ControlGain& b = law->node_gain(2, 17);
  EXPECT_EQ(a.K, b.K);
  EXPECT_EQ(a.Kcheck, b.Kcheck);
  EXPECT_EQ(a.k, b.k);
}

TEST(FeedbackLaw, GainScaleKeepsOffsets) {
  const GameSpec s = load("generic_scalar.json");
  const auto a = make_law(s);
  const auto b = make_law(s, 1.5);
  const ControlGain& ga = a->node_gain(1, 10);
  const ControlGain& gb = b->node_gain(1, 10);
  EXPECT_TRUE(gb.K.isApprox(1.5 * ga.K));
  EXPECT_TRUE(gb.Kcheck.isApprox(1.5 * ga.Kcheck));
  EXPECT_EQ(gb.k, ga.k);
}

TEST(Simulation, NoNoiseMakesFiltersCoincide) {
  const auto law = make_law(without_noise(load("generic_2d.json")));
  Increments dW;
  NoiseSource(1).increments(law->grid(), 0, dW);
  DriverPath Z;
  simulate_driver(*law, dW, Z);
  EXPECT_TRUE((Z.X.array() == Z.Xh.array()).all());
  EXPECT_TRUE((Z.X.array() == Z.Xc.array()).all());
}

TEST(Simulation, ZeroSpecStaysAtZero) {
  const auto law = make_law(zero_spec(2, 1.0, 30));
  const PathBundle b = simulate_equilibrium(*law, NoiseSource(2), 5);
  for (const PathRecord& r : b.paths) {
    EXPECT_EQ(max_abs(r.Z.X) + max_abs(r.Z.Xh) + max_abs(r.Z.Xc), 0.0);
    for (const Mat& v : r.v) EXPECT_EQ(max_abs(v), 0.0);
  }
}

TEST(Simulation, FilterErrorHasZeroMean) {
  // E[X - Xhat] = 0 at every node; checked within 4 standard errors.
  const auto law = make_law(with_steps(load("generic_scalar.json"), 50));
  const std::size_t N = 10000;
  const PathBundle b = simulate_equilibrium(*law, NoiseSource(4), N);
  for (std::size_t k = 10; k <= 50; k += 10) {
    std::vector<double> d(N);
    for (std::size_t i = 0; i < N; ++i) {
      const auto& Z = b.paths[i].Z;
      d[i] = Z.X(0, static_cast<Eigen::Index>(k)) - Z.Xh(0, static_cast<Eigen::Index>(k));
    }
    const auto [mean, se] = mean_and_stderr(d);
    EXPECT_LT(std::abs(mean), 4.0 * se) << "node " << k;
  }
}

TEST(Simulation, ThreadCountDoesNotChangePaths) {
  const auto law = make_law(with_steps(load("generic_2d.json"), 40));
  const PathBundle a = simulate_equilibrium(*law, NoiseSource(6), 37, 1);
  const PathBundle b = simulate_equilibrium(*law, NoiseSource(6), 37, 3);
  for (std::size_t i = 0; i < 37; ++i) {
    EXPECT_TRUE((a.paths[i].Z.X.array() == b.paths[i].Z.X.array()).all());
    EXPECT_TRUE((a.paths[i].v[2].array() == b.paths[i].v[2].array()).all());
  }
}

TEST(Simulation, FirstBlockIsTheStatePath) {
  // Feeding the realized controls through the original state equation
  // reproduces x = first block of X on the same noise.
  const GameSpec s = with_steps(load("generic_scalar.json"), 100);
  const auto law = make_law(s);
  const PathBundle b = simulate_equilibrium(*law, NoiseSource(8), 3);
  const auto nodes = node_snapshots(s, law->grid());
  Increments dW;
  for (std::size_t i = 0; i < 3; ++i) {
    NoiseSource(8).increments(law->grid(), i, dW);
    const PathRecord& r = b.paths[i];
    const Mat x = simulate_state_path(nodes, law->grid(), s.x0, {&r.v[0], &r.v[1], &r.v[2]}, dW);
    EXPECT_LT(max_abs(x - r.x), 1e-10);
  }
}

TEST(StateEquation, DeterministicDrift) {
  GameSpec s = zero_spec(1, 1.0, 10);
  s.coeffs.b = scalar(1.0);
  s.x0 = Vec::Constant(1, 0.25);
  const auto nodes = node_snapshots(s, s.grid);
  const Mat v = Mat::Zero(1, 11);
  Increments dW(10, {0.3, -0.2, 0.1});
  const Mat x = simulate_state_path(nodes, s.grid, s.x0, {&v, &v, &v}, dW);
  for (std::size_t k = 0; k <= 10; ++k) {
    EXPECT_NEAR(x(0, static_cast<Eigen::Index>(k)), 0.25 + s.grid.node(k), 1e-15);
  }
}

TEST(StateEquation, ExponentialGrowthWithinEulerError) {
  GameSpec s = zero_spec(1, 1.0, 1000);
  s.coeffs.A = scalar(0.8);
  s.x0 = Vec::Constant(1, 2.0);
  const auto nodes = node_snapshots(s, s.grid);
  const Mat v = Mat::Zero(1, 1001);
  Increments dW(1000, {0.0, 0.0, 0.0});
  const Mat x = simulate_state_path(nodes, s.grid, s.x0, {&v, &v, &v}, dW);
  const double exact = 2.0 * std::exp(0.8);
  EXPECT_NEAR(x(0, 1000), exact, exact * 0.8 * 0.8 * 1e-3);
}
