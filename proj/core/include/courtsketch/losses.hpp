#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "courtsketch/json_io.hpp"
#include "courtsketch/nn.hpp"
#include "courtsketch/tensor.hpp"

namespace courtsketch {

struct LossReport {
  double adversarial = 0.0;
  double dribbler = 0.0;
  double defender = 0.0;
  double ball_pass = 0.0;
  double acceleration = 0.0;
  double composite = 0.0;
  double w = 0.0;
};

Json to_json(const LossReport& r);

// All distance-based terms below take plays in feet. Gradients, when a target
// is supplied, are accumulated as scale * d(loss)/d(input).

/// Input gradient of a critic at one t x 46 pair.
using CriticGradientFn = std::function<Matrix(const Matrix& pair)>;

/// lambda * mean_b (|grad_xhat C(xhat_b | y_b)|_2 - 1)^2 with xhat = e x + (1 - e) g,
/// one interpolation weight per sample; the condition half of the pair is held fixed.
double gradient_penalty(const CriticGradientFn& critic_gradient, std::span<const ConditionMatrix> y,
                        std::span<const PlayTensor> x, std::span<const PlayTensor> g, double lambda,
                        std::span<const double> epsilon_draws);

/// mean(fake) - mean(real) + penalty.
double critic_loss(std::span<const double> real_scores, std::span<const double> fake_scores, double penalty);

/// -mean(fake): lower is better for the generator.
double generator_adv_loss(std::span<const double> fake_scores);

/// sum_t sum_i f_i |p_b - p_i| over the generated soft possession features.
double dribbler_loss(const PlayTensor& g, PlayTensor* grad = nullptr, double scale = 1.0);

/// D(play) = sum_t (1 + theta_t)(1 + |p_n - p_b|), p_n the defender nearest the
/// ball and theta_t the angle between p_n - p_b and hoop - p_b.
double defender_pressure(const PlayTensor& play, Position hoop, PlayTensor* grad = nullptr, double scale = 1.0);

/// |mean D(real) - mean D(fake)|; gradients flow to the fake batch only.
double defender_loss(std::span<const PlayTensor> real, std::span<const PlayTensor> fake, Position hoop,
                     std::span<PlayTensor> fake_grad = {}, double scale = 1.0);

/// sum_t (1 - sum_i f_i) phi_t with phi the ball's turning angle; the
/// possession weight is clamped to [0, 1].
double ball_pass_loss(const PlayTensor& g, PlayTensor* grad = nullptr, double scale = 1.0);

/// Mean over plays, interior frames and all ten players of the acceleration magnitude.
double mean_player_acceleration(std::span<const PlayTensor> batch, double fps, std::span<PlayTensor> grad = {},
                                double scale = 1.0);

/// |mu(real) - mu(fake)|; gradients flow to the fake batch only.
double acceleration_loss(std::span<const PlayTensor> real, std::span<const PlayTensor> fake, double fps,
                         std::span<PlayTensor> fake_grad = {}, double scale = 1.0);

struct CompositeLoss {
  double value = 0.0;
  double w = 0.0;
};

/// adv + w (L_d + L_b + L_w + L_a) with w = mean |critic score|, treated as a constant.
CompositeLoss composite_generator_loss(double adv, double dribbler, double ball_pass, double defender,
                                       double acceleration, std::span<const double> critic_scores);

// -------------------------------------------------------- network objectives

/// One training batch in network layout (see nn.hpp): normalized conditions
/// and real plays stacked over frames.
struct BatchView {
  const Matrix& condition;  // 18 x B*t
  const Matrix& real;       // 28 x B*t
  Index frames;
};

struct CriticObjective {
  double loss = 0.0;         // mean C(fake) - mean C(real) + penalty
  double wasserstein = 0.0;  // mean C(real) - mean C(fake)
  double penalty = 0.0;
};

/// Gradient penalty through the critic network at interpolates of `real` and
/// `fake`; accumulates its parameter gradient into `grad` when non-null.
double critic_gradient_penalty(const CriticParams& critic, const BatchView& batch, const Matrix& fake, double lambda,
                               std::span<const double> epsilon_draws, CriticParams* grad);

CriticObjective critic_objective(const CriticParams& critic, const BatchView& batch, const Matrix& fake, double lambda,
                                 std::span<const double> epsilon_draws, CriticParams* grad);

struct GeneratorObjectiveOptions {
  CourtSpec court;
  double fps = 5.0;
  /// Fixes w instead of recomputing it from the critic scores (gradient checks).
  std::optional<double> frozen_w;
};

/// Composite generator loss; accumulates generator parameter gradients into
/// `grad` and, when `d_fake` is non-null, stores dL/d(generated batch).
LossReport generator_objective(const GeneratorParams& generator, const CriticParams& critic, const Matrix& noise,
                               const BatchView& batch, const GeneratorObjectiveOptions& options,
                               GeneratorParams* grad, Matrix* d_fake = nullptr);

/// Loss terms of an already generated batch in network layout; `d_fake`
/// receives dL/d(fake) in normalized units.
LossReport composite_on_batch(const CriticParams& critic, const BatchView& batch, const Matrix& fake,
                              const GeneratorObjectiveOptions& options, Matrix* d_fake);

}  // namespace courtsketch
