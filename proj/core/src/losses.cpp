#include "courtsketch/losses.hpp"

#include <cmath>
#include <numeric>

#include "courtsketch/errors.hpp"
#include "courtsketch/geometry.hpp"
#include "courtsketch/kinematics.hpp"

namespace courtsketch {

namespace {

constexpr double kDegenerateLength = 1e-6;

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void add_at(PlayTensor* grad, Index t, Index col, Position g) {
  grad->values(t, col) += g.x;
  grad->values(t, col + 1) += g.y;
}

// Gradients of vector_angle(u, v) with respect to u and v.
struct AngleGradient {
  Position du;
  Position dv;
};

AngleGradient angle_gradient(Position u, Position v) {
  if (norm(u) < kDegenerateLength || norm(v) < kDegenerateLength) return {};
  const double c = u.x * v.y - u.y * v.x;
  const double d = u.x * v.x + u.y * v.y;
  const double denom = c * c + d * d;
  if (denom == 0.0) return {};
  const double s = sign(c);
  const double ac = std::abs(c);
  return {{(d * s * v.y - ac * v.x) / denom, (-d * s * v.x - ac * v.y) / denom},
          {(-d * s * u.y - ac * u.x) / denom, (d * s * u.x - ac * u.y) / denom}};
}

}  // namespace

Json to_json(const LossReport& r) {
  return {{"adversarial", r.adversarial}, {"dribbler", r.dribbler},   {"defender", r.defender},
          {"ball_pass", r.ball_pass},     {"acceleration", r.acceleration}, {"composite", r.composite},
          {"w", r.w}};
}

double gradient_penalty(const CriticGradientFn& critic_gradient, std::span<const ConditionMatrix> y,
                        std::span<const PlayTensor> x, std::span<const PlayTensor> g, double lambda,
                        std::span<const double> epsilon_draws) {
  if (y.size() != x.size() || x.size() != g.size() || g.size() != epsilon_draws.size()) {
    throw ShapeError("gradient_penalty: batch sizes differ");
  }
  if (y.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t b = 0; b < y.size(); ++b) {
    const double e = epsilon_draws[b];
    const PlayTensor mixed(e * x[b].values + (1.0 - e) * g[b].values);
    const Matrix grad = critic_gradient(concat_pair(y[b], mixed));
    const double n = grad.rightCols(layout::kPlayWidth).norm();
    total += (n - 1.0) * (n - 1.0);
  }
  return lambda * total / static_cast<double>(y.size());
}

double critic_loss(std::span<const double> real_scores, std::span<const double> fake_scores, double penalty) {
  if (real_scores.size() != fake_scores.size()) throw ShapeError("critic_loss: batch sizes differ");
  return mean(fake_scores) - mean(real_scores) + penalty;
}

double generator_adv_loss(std::span<const double> fake_scores) {
  if (fake_scores.empty()) throw ShapeError("generator_adv_loss: empty batch");
  return -mean(fake_scores);
}

double dribbler_loss(const PlayTensor& g, PlayTensor* grad, double scale) {
  double total = 0.0;
  for (Index t = 0; t < g.frames(); ++t) {
    const Position ball = g.ball(t);
    for (int i = 1; i <= kTeamSize; ++i) {
      const double f = g.feature(t, i - 1);
      const Position diff = ball - g.offense(t, i);
      const double d = norm(diff);
      total += f * d;
      if (grad) {
        grad->values(t, layout::kPlayFeature + i - 1) += scale * d;
        if (d > 0.0) {
          const Position gb = (scale * f / d) * diff;
          add_at(grad, t, layout::kBall, gb);
          add_at(grad, t, layout::offense_column(i), -1.0 * gb);
        }
      }
    }
  }
  return total;
}

double defender_pressure(const PlayTensor& play, Position hoop, PlayTensor* grad, double scale) {
  double total = 0.0;
  for (Index t = 0; t < play.frames(); ++t) {
    const Position ball = play.ball(t);
    int nearest = 1;
    double best = distance(play.defense(t, 1), ball);
    for (int k = 2; k <= kTeamSize; ++k) {
      const double d = distance(play.defense(t, k), ball);
      if (d < best) {
        best = d;
        nearest = k;
      }
    }
    const Position u = play.defense(t, nearest) - ball;
    const Position h = hoop - ball;
    const double theta = vector_angle(u, h, kDegenerateLength);
    total += (1.0 + theta) * (1.0 + best);
    if (grad) {
      const AngleGradient ag = angle_gradient(u, h);
      Position du = (1.0 + best) * ag.du;
      if (best > 0.0) du = du + ((1.0 + theta) / best) * u;
      const Position dh = (1.0 + best) * ag.dv;
      add_at(grad, t, layout::defense_column(nearest), scale * du);
      add_at(grad, t, layout::kBall, -scale * (du + dh));
    }
  }
  return total;
}

double defender_loss(std::span<const PlayTensor> real, std::span<const PlayTensor> fake, Position hoop,
                     std::span<PlayTensor> fake_grad, double scale) {
  if (real.empty() || fake.empty()) throw ShapeError("defender_loss: empty batch");
  double real_mean = 0.0;
  for (const auto& p : real) real_mean += defender_pressure(p, hoop);
  real_mean /= static_cast<double>(real.size());
  double fake_mean = 0.0;
  for (const auto& p : fake) fake_mean += defender_pressure(p, hoop);
  fake_mean /= static_cast<double>(fake.size());

  if (!fake_grad.empty()) {
    const double coeff = -sign(real_mean - fake_mean) * scale / static_cast<double>(fake.size());
    if (coeff != 0.0) {
      for (std::size_t b = 0; b < fake.size(); ++b) defender_pressure(fake[b], hoop, &fake_grad[b], coeff);
    }
  }
  return std::abs(real_mean - fake_mean);
}

double ball_pass_loss(const PlayTensor& g, PlayTensor* grad, double scale) {
  double total = 0.0;
  for (Index t = 1; t + 1 < g.frames(); ++t) {
    double held = 0.0;
    for (int i = 0; i < kTeamSize; ++i) held += g.feature(t, i);
    const double raw_weight = 1.0 - held;
    const double weight = std::clamp(raw_weight, 0.0, 1.0);
    const Position a = g.ball(t) - g.ball(t - 1);
    const Position c = g.ball(t + 1) - g.ball(t);
    const double phi = vector_angle(a, c, kDegenerateLength);
    total += weight * phi;
    if (grad) {
      if (raw_weight > 0.0 && raw_weight < 1.0) {
        for (int i = 0; i < kTeamSize; ++i) grad->values(t, layout::kPlayFeature + i) -= scale * phi;
      }
      if (weight > 0.0) {
        const AngleGradient ag = angle_gradient(a, c);
        const double k = scale * weight;
        add_at(grad, t - 1, layout::kBall, -k * ag.du);
        add_at(grad, t, layout::kBall, k * (ag.du - ag.dv));
        add_at(grad, t + 1, layout::kBall, k * ag.dv);
      }
    }
  }
  return total;
}

double mean_player_acceleration(std::span<const PlayTensor> batch, double fps, std::span<PlayTensor> grad,
                                double scale) {
  double total = 0.0;
  std::size_t terms = 0;
  for (const auto& p : batch) terms += static_cast<std::size_t>(std::max<Index>(p.frames() - 2, 0)) * 2 * kTeamSize;
  if (terms == 0) return 0.0;
  const double inv = 1.0 / static_cast<double>(terms);
  const double fps2 = fps * fps;

  for (std::size_t b = 0; b < batch.size(); ++b) {
    const PlayTensor& p = batch[b];
    for (Index t = 1; t + 1 < p.frames(); ++t) {
      for (int k = 0; k < 2 * kTeamSize; ++k) {
        const Index col = layout::kOffense + 2 * k;
        const Position prev{p.values(t - 1, col), p.values(t - 1, col + 1)};
        const Position cur{p.values(t, col), p.values(t, col + 1)};
        const Position next{p.values(t + 1, col), p.values(t + 1, col + 1)};
        const double a = frame_acceleration(prev, cur, next, fps);
        total += a;
        if (!grad.empty() && a > 0.0) {
          const Position second{next.x - 2.0 * cur.x + prev.x, next.y - 2.0 * cur.y + prev.y};
          const Position unit = (scale * inv * fps2 * fps2 / a) * second;
          add_at(&grad[b], t - 1, col, unit);
          add_at(&grad[b], t, col, -2.0 * unit);
          add_at(&grad[b], t + 1, col, unit);
        }
      }
    }
  }
  return total * inv;
}

double acceleration_loss(std::span<const PlayTensor> real, std::span<const PlayTensor> fake, double fps,
                         std::span<PlayTensor> fake_grad, double scale) {
  const double mu_real = mean_player_acceleration(real, fps);
  const double mu_fake = mean_player_acceleration(fake, fps);
  if (!fake_grad.empty()) {
    const double coeff = -sign(mu_real - mu_fake) * scale;
    if (coeff != 0.0) mean_player_acceleration(fake, fps, fake_grad, coeff);
  }
  return std::abs(mu_real - mu_fake);
}

CompositeLoss composite_generator_loss(double adv, double dribbler, double ball_pass, double defender,
                                       double acceleration, std::span<const double> critic_scores) {
  double w = 0.0;
  for (double s : critic_scores) w += std::abs(s);
  if (!critic_scores.empty()) w /= static_cast<double>(critic_scores.size());
  return {adv + w * (dribbler + ball_pass + defender + acceleration), w};
}

}  // namespace courtsketch
