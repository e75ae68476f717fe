#include "test_util.hpp"

#include <stacklq/response.hpp>

#include <gtest/gtest.h>

using namespace stacklq;
using stacklq::test::load;
using stacklq::test::max_abs;
using stacklq::test::scalar;
using stacklq::test::with_steps;

namespace {

std::shared_ptr<const FeedbackLaw> make_law(const GameSpec& s) {
  auto b = std::make_shared<const RiccatiBundle>(solve_riccati(s));
  auto o = std::make_shared<const OffsetBundle>(solve_offsets(*b));
  return std::make_shared<const FeedbackLaw>(b, o);
}

ControlProcess zero_control(int n) {
  return ControlProcess::affine([n](const Instant&) { return ControlGain::zero(n); });
}

// Unit open-loop pulse on [0, T/2).
ControlProcess pulse(int n, double T) {
  return ControlProcess::affine([n, T](const Instant& at) {
    ControlGain g = ControlGain::zero(n);
    if (at.t < 0.5 * T) g.k.setOnes();
    return g;
  });
}

}  // namespace

TEST(Player1Response, ZeroSpecPlaysOffsetOnly) {
  GameSpec s = zero_spec(1, 1.0, 20);
  s.x0 = Vec::Constant(1, 0.7);
  s.costs.player[0].n = scalar(0.4);
  s.costs.player[0].R = scalar(2.0);
  const auto law = make_law(s);
  const auto paths = respond_player1(*law, zero_control(1), zero_control(1), NoiseSource(1), 3);
  for (const Player1Path& p : paths) {
    EXPECT_EQ(max_abs(p.x.array() - 0.7), 0.0);
    EXPECT_NEAR(max_abs(p.v[0].array() + 0.2), 0.0, 1e-15);
  }
}

TEST(Player1Response, FilterIntegratesOpenLoopPulse) {
  GameSpec s = zero_spec(1, 2.0, 40);
  s.x0 = Vec::Constant(1, 0.5);
  s.coeffs.B[1] = scalar(0.8);
  const auto law = make_law(s);
  const auto paths = respond_player1(*law, pulse(1, 2.0), zero_control(1), NoiseSource(1), 1);
  // x = x0 + int B2 v2 dt = 0.5 + 0.8 * 1.
  EXPECT_NEAR(paths[0].xcheck(0, 40), 1.3, 1e-14);
  EXPECT_NEAR(paths[0].x(0, 40), 1.3, 1e-14);
  EXPECT_NEAR(paths[0].xcheck(0, 20), 1.3, 1e-14);
  EXPECT_NEAR(paths[0].xcheck(0, 10), 0.9, 1e-14);
}

TEST(Player1Response, EquilibriumIsFixedPoint) {
  const auto law = make_law(with_steps(load("variational_scalar.json"), 100));
  const auto paths = respond_player1(*law, ControlProcess::affine(law->gain_fn(2)),
                                     ControlProcess::affine(law->gain_fn(3)), NoiseSource(5), 20);
  const PathBundle eq = simulate_equilibrium(*law, NoiseSource(5), 20);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_LT(max_abs(paths[i].v[0] - eq.paths[i].v[0]), 1e-8);
    EXPECT_LT(max_abs(paths[i].x - eq.paths[i].x), 1e-8);
  }
}

TEST(Player1Response, SampledControlIsUnsupported) {
  const auto law = make_law(zero_spec(1, 1.0, 10));
  const ControlProcess sampled = ControlProcess::sampled({Mat::Zero(1, 11)});
  EXPECT_THROW(Player1Responder(*law, sampled, zero_control(1)), UnsupportedError);
}

TEST(Player12Response, ZeroSpecPlaysOffsetOnly) {
  GameSpec s = zero_spec(1, 1.0, 20);
  s.costs.player[1].n = scalar(0.3);
  s.costs.player[1].R = scalar(1.5);
  const auto law = make_law(s);
  const auto paths = respond_player12(*law, zero_control(1), NoiseSource(1), 3);
  for (const Player12Path& p : paths) {
    EXPECT_NEAR(max_abs(p.v[1].array() + 0.2), 0.0, 1e-15);
    EXPECT_EQ(max_abs(p.v[0]), 0.0);
  }
}

TEST(Player12Response, FilterIntegratesOpenLoopPulse) {
  GameSpec s = zero_spec(1, 1.0, 50);
  s.x0 = Vec::Constant(1, -0.2);
  s.coeffs.B[2] = scalar(0.6);
  const auto law = make_law(s);
  const auto paths = respond_player12(*law, pulse(1, 1.0), NoiseSource(1), 1);
  EXPECT_NEAR(paths[0].X2check(0, 50), 0.1, 1e-14);
  EXPECT_NEAR(paths[0].X2hat(0, 50), 0.1, 1e-14);
  EXPECT_NEAR(paths[0].x(0, 50), 0.1, 1e-14);
  EXPECT_EQ(paths[0].X2check(1, 50), 0.0);
}

TEST(Player12Response, EquilibriumIsFixedPoint) {
  const auto law = make_law(with_steps(load("variational_scalar.json"), 100));
  const auto paths =
      respond_player12(*law, ControlProcess::affine(law->gain_fn(3)), NoiseSource(9), 20);
  const PathBundle eq = simulate_equilibrium(*law, NoiseSource(9), 20);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_LT(max_abs(paths[i].v[0] - eq.paths[i].v[0]), 1e-8);
    EXPECT_LT(max_abs(paths[i].v[1] - eq.paths[i].v[1]), 1e-8);
    EXPECT_LT(max_abs(paths[i].x - eq.paths[i].x), 1e-8);
  }
}

TEST(Player12Response, EquilibriumFixedPointIn2d) {
  GameSpec s = load("generic_2d.json");
  s.coeffs.C[0] = TimeFunction::constant(Mat::Zero(2, 2));
  s.coeffs.C[1] = TimeFunction::constant(Mat::Zero(2, 2));
  const auto law = make_law(with_steps(s, 100));
  const auto paths =
      respond_player12(*law, ControlProcess::affine(law->gain_fn(3)), NoiseSource(2), 10);
  const PathBundle eq = simulate_equilibrium(*law, NoiseSource(2), 10);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_LT(max_abs(paths[i].v[1] - eq.paths[i].v[1]), 1e-7);
  }
}
