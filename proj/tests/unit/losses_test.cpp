#include <doctest.h>

#include <numbers>
#include <random>

#include "courtsketch/grad_check.hpp"
#include "courtsketch/losses.hpp"
#include "courtsketch/tensor.hpp"

using namespace courtsketch;

namespace {

constexpr double kPi = std::numbers::pi;
const Position kHoop{5.25, 25.0};

/// Everyone parked far from the action; no possession.
PlayTensor parked(Index frames) {
  PlayTensor p(frames);
  for (Index t = 0; t < frames; ++t) {
    for (Index c = 2; c < 22; c += 2) {
      p.values(t, c) = 40.0 + static_cast<double>(c);
      p.values(t, c + 1) = 45.0;
    }
  }
  return p;
}

void put(PlayTensor& p, Index t, Index column, Position at) {
  p.values(t, column) = at.x;
  p.values(t, column + 1) = at.y;
}

/// Random play in feet with small soft features.
PlayTensor soft_play(Index frames, std::mt19937_64& rng, double feature_max = 0.15) {
  std::uniform_real_distribution<double> x(0.0, 47.0);
  std::uniform_real_distribution<double> y(0.0, 50.0);
  std::uniform_real_distribution<double> f(0.0, feature_max);
  PlayTensor p(frames);
  for (Index t = 0; t < frames; ++t) {
    for (Index c = 0; c < 22; c += 2) {
      p.values(t, c) = x(rng);
      p.values(t, c + 1) = y(rng);
    }
    for (Index c = 22; c < 28; ++c) p.values(t, c) = f(rng);
  }
  return p;
}

PlayTensor transformed(const PlayTensor& p, double angle, Position shift) {
  PlayTensor out = p;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  for (Index t = 0; t < p.frames(); ++t) {
    for (Index k = 0; k < 22; k += 2) {
      const double x = p.values(t, k);
      const double y = p.values(t, k + 1);
      out.values(t, k) = c * x - s * y + shift.x;
      out.values(t, k + 1) = s * x + c * y + shift.y;
    }
  }
  return out;
}

/// Finite-difference check of a loss on one play tensor.
GradCheckReport check_tensor_gradient(const std::function<double(const PlayTensor&)>& loss, const PlayTensor& at,
                                      const PlayTensor& analytic) {
  const Vector point = at.values.reshaped();
  const auto f = [&](const Vector& v) { return loss(PlayTensor(Matrix(v.reshaped(at.frames(), 28)))); };
  return grad_check(f, analytic.values.reshaped(), point, 1e-5);
}

}  // namespace

TEST_CASE("critic loss arithmetic") {
  const std::vector<double> same{0.5, -1.0};
  CHECK(critic_loss(same, same, 3.5) == doctest::Approx(3.5));
  const std::vector<double> real{2.0, 2.0};
  const std::vector<double> fake{-1.0, -1.0};
  CHECK(critic_loss(real, fake, 0.0) == doctest::Approx(-3.0));
}

TEST_CASE("generator adversarial loss") {
  CHECK(generator_adv_loss(std::vector<double>{1.0, 1.0}) == -1.0);
  CHECK(generator_adv_loss(std::vector<double>{0.0, 0.0}) == 0.0);
  std::vector<double> s{0.3, -0.2, 1.1};
  const double before = generator_adv_loss(s);
  s[1] += 0.5;
  CHECK(generator_adv_loss(s) < before);
}

TEST_CASE("gradient penalty of linear critics") {
  const Index t = 4;
  std::mt19937_64 rng(1);
  std::vector<ConditionMatrix> y(2, ConditionMatrix(t));
  std::vector<PlayTensor> x{soft_play(t, rng), soft_play(t, rng)};
  std::vector<PlayTensor> g{soft_play(t, rng), soft_play(t, rng)};
  const std::vector<double> eps{0.3, 0.8};

  for (double norm : {1.0, 3.0}) {
    Matrix a = Matrix::Zero(t, 46);
    a.rightCols(28).setConstant(1.0);
    a *= norm / a.norm();
    const CriticGradientFn linear = [a](const Matrix&) { return a; };
    const double expected = norm == 1.0 ? 0.0 : 40.0;
    CHECK(gradient_penalty(linear, y, x, g, 10.0, eps) == doctest::Approx(expected).epsilon(1e-12));
  }

  Matrix cond_only = Matrix::Zero(t, 46);
  cond_only(0, 0) = 5.0;
  const CriticGradientFn blind = [cond_only](const Matrix&) { return cond_only; };
  CHECK(gradient_penalty(blind, y, x, g, 10.0, eps) == doctest::Approx(10.0));
}

TEST_CASE("dribbler loss examples") {
  PlayTensor held = parked(3);
  for (Index t = 0; t < 3; ++t) {
    put(held, t, 0, {20.0 + t, 10.0});
    put(held, t, 2, {20.0 + t, 10.0});
    held.values(t, 22) = 1.0;
  }
  CHECK(dribbler_loss(held) == 0.0);

  PlayTensor one = parked(1);
  put(one, 0, 0, {3.0, 4.0});
  put(one, 0, 2, {0.0, 0.0});
  one.values(0, 22) = 1.0;
  CHECK(dribbler_loss(one) == doctest::Approx(5.0));

  PlayTensor pass = one;
  pass.values(0, 22) = 0.0;
  CHECK(dribbler_loss(pass) == 0.0);
}

TEST_CASE("defender pressure examples") {
  auto frame = [](Position defender) {
    PlayTensor p = parked(1);
    put(p, 0, 0, {10.0, 25.0});
    put(p, 0, 12, defender);
    return p;
  };
  CHECK(defender_pressure(frame({8.0, 25.0}), kHoop) == doctest::Approx(3.0));
  CHECK(defender_pressure(frame({13.0, 25.0}), kHoop) == doctest::Approx((1.0 + kPi) * 4.0));
  CHECK(defender_pressure(frame({10.0, 25.0}), kHoop) == doctest::Approx(1.0));
  CHECK(defender_pressure(frame({10.0, 28.0}), kHoop) == doctest::Approx((1.0 + kPi / 2) * 4.0));
}

TEST_CASE("defender pressure grows with distance at a fixed angle") {
  double previous = 0.0;
  for (double d = 0.5; d < 6.0; d += 0.5) {
    PlayTensor p = parked(1);
    put(p, 0, 0, {20.0, 25.0});
    put(p, 0, 14, {20.0 - d * 0.6, 25.0 + d * 0.8});
    const double v = defender_pressure(p, kHoop);
    CHECK(v >= previous);
    previous = v;
  }
}

TEST_CASE("defender loss compares batch means") {
  auto constant_pressure = [](Index frames, double gap) {
    PlayTensor p = parked(frames);
    for (Index t = 0; t < frames; ++t) {
      put(p, t, 0, {10.0, 25.0});
      put(p, t, 12, {10.0 - gap, 25.0});
    }
    return p;
  };
  const std::vector<PlayTensor> a{constant_pressure(40, 2.0)};
  const std::vector<PlayTensor> b{constant_pressure(40, 1.5)};
  CHECK(defender_pressure(a[0], kHoop) == doctest::Approx(120.0));
  CHECK(defender_pressure(b[0], kHoop) == doctest::Approx(100.0));
  CHECK(defender_loss(a, b, kHoop) == doctest::Approx(20.0));
  CHECK(defender_loss(b, a, kHoop) == doctest::Approx(20.0));
  CHECK(defender_loss(a, a, kHoop) == 0.0);
}

TEST_CASE("ball pass loss examples") {
  PlayTensor straight = parked(5);
  for (Index t = 0; t < 5; ++t) put(straight, t, 0, {10.0 + 2.0 * t, 20.0 + t});
  CHECK(ball_pass_loss(straight) == doctest::Approx(0.0).epsilon(1e-12));

  PlayTensor corner = parked(3);
  put(corner, 0, 0, {10.0, 10.0});
  put(corner, 1, 0, {14.0, 10.0});
  put(corner, 2, 0, {14.0, 13.0});
  CHECK(ball_pass_loss(corner) == doctest::Approx(kPi / 2));

  corner.values(1, 22) = 0.4;
  corner.values(1, 25) = 0.6;
  CHECK(ball_pass_loss(corner) == doctest::Approx(0.0));

  corner.values(1, 25) = 0.9;
  CHECK(ball_pass_loss(corner) == doctest::Approx(0.0));
}

TEST_CASE("acceleration loss examples") {
  PlayTensor steady = parked(6);
  for (Index t = 0; t < 6; ++t) {
    for (Index c = 2; c < 22; c += 2) steady.values(t, c) += 0.7 * t;
  }
  const std::vector<PlayTensor> steady_batch{steady};
  CHECK(mean_player_acceleration(steady_batch, 5.0) == doctest::Approx(0.0).epsilon(1e-12));

  PlayTensor kick = parked(3);
  for (Index c = 2; c < 22; c += 2) kick.values(2, c) += 1.0;
  const std::vector<PlayTensor> kick_batch{kick};
  CHECK(mean_player_acceleration(kick_batch, 5.0) == doctest::Approx(25.0));

  CHECK(acceleration_loss(steady_batch, kick_batch, 5.0) == doctest::Approx(25.0));
  CHECK(acceleration_loss(kick_batch, kick_batch, 5.0) == 0.0);
}

TEST_CASE("composite loss weights heuristics by the mean critic magnitude") {
  const std::vector<double> zeros{0.0, 0.0};
  CHECK(composite_generator_loss(1.5, 1, 1, 1, 1, zeros).value == 1.5);
  const std::vector<double> twos{2.0, -2.0};
  const CompositeLoss c = composite_generator_loss(1.0, 1, 1, 1, 1, twos);
  CHECK(c.value == doctest::Approx(9.0));
  CHECK(c.w == doctest::Approx(2.0));
  const std::vector<double> s{0.5, -3.0, 1.25};
  const std::vector<double> neg{-0.5, 3.0, -1.25};
  CHECK(composite_generator_loss(0, 1, 2, 3, 4, s).w == composite_generator_loss(0, 1, 2, 3, 4, neg).w);
}

TEST_CASE("loss terms are non-negative on random plays") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    const std::vector<PlayTensor> a{soft_play(8, rng, 1.0), soft_play(8, rng, 1.0)};
    const std::vector<PlayTensor> b{soft_play(8, rng, 1.0)};
    CHECK(dribbler_loss(a[0]) >= 0.0);
    CHECK(ball_pass_loss(a[0]) >= 0.0);
    CHECK(defender_loss(a, b, kHoop) >= 0.0);
    CHECK(acceleration_loss(a, b, 5.0) >= 0.0);
    CHECK(defender_loss(a, a, kHoop) == 0.0);
    CHECK(acceleration_loss(a, a, 5.0) == 0.0);
  }
}

TEST_CASE("losses are invariant under rigid motions") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    const PlayTensor p = soft_play(10, rng);
    const PlayTensor moved = transformed(p, 0.0, {3.5, -7.25});
    const PlayTensor turned = transformed(p, 0.9, {-2.0, 4.0});
    CHECK(dribbler_loss(moved) == doctest::Approx(dribbler_loss(p)).epsilon(1e-10));
    const std::vector<PlayTensor> a{p};
    const std::vector<PlayTensor> b{moved};
    CHECK(mean_player_acceleration(b, 5.0) == doctest::Approx(mean_player_acceleration(a, 5.0)).epsilon(1e-10));
    CHECK(ball_pass_loss(turned) == doctest::Approx(ball_pass_loss(p)).epsilon(1e-10));
  }
}

TEST_CASE("loss gradients match finite differences") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 5; ++i) {
    const PlayTensor p = soft_play(7, rng);

    PlayTensor g(Matrix::Zero(7, 28));
    dribbler_loss(p, &g);
    CHECK(check_tensor_gradient([](const PlayTensor& x) { return dribbler_loss(x); }, p, g).max_relative_error < 1e-4);

    g.values.setZero();
    ball_pass_loss(p, &g);
    CHECK(check_tensor_gradient([](const PlayTensor& x) { return ball_pass_loss(x); }, p, g).max_relative_error <
          1e-4);

    g.values.setZero();
    defender_pressure(p, kHoop, &g);
    CHECK(check_tensor_gradient([](const PlayTensor& x) { return defender_pressure(x, kHoop); }, p, g)
              .max_relative_error < 1e-4);

    const std::vector<PlayTensor> real{soft_play(7, rng), soft_play(7, rng)};
    std::vector<PlayTensor> fake{p};
    std::vector<PlayTensor> fake_grad{PlayTensor(Matrix::Zero(7, 28))};
    defender_loss(real, fake, kHoop, fake_grad);
    CHECK(check_tensor_gradient(
              [&](const PlayTensor& x) { return defender_loss(real, std::vector<PlayTensor>{x}, kHoop); }, p,
              fake_grad[0])
              .max_relative_error < 1e-4);

    fake_grad[0].values.setZero();
    acceleration_loss(real, fake, 5.0, fake_grad);
    CHECK(check_tensor_gradient(
              [&](const PlayTensor& x) { return acceleration_loss(real, std::vector<PlayTensor>{x}, 5.0); }, p,
              fake_grad[0])
              .max_relative_error < 1e-4);
  }
}

TEST_CASE("loss report serializes every term") {
  LossReport r;
  r.adversarial = -1.0;
  r.composite = 3.0;
  const Json j = to_json(r);
  for (const char* key : {"adversarial", "dribbler", "defender", "ball_pass", "acceleration", "composite", "w"}) {
    CHECK(j.contains(key));
  }
}
