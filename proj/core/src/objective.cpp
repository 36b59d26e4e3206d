#include <cmath>

#include "courtsketch/errors.hpp"
#include "courtsketch/losses.hpp"

namespace courtsketch {

namespace {

Matrix stack_pairs(const Matrix& condition, const Matrix& play) {
  Matrix pairs(layout::kPairWidth, condition.cols());
  pairs.topRows(layout::kConditionWidth) = condition;
  pairs.bottomRows(layout::kPlayWidth) = play;
  return pairs;
}

std::vector<PlayTensor> to_feet(const Matrix& packed, Index frames, const CourtSpec& court) {
  std::vector<PlayTensor> out;
  for (auto& m : unpack(packed, frames)) out.push_back(denormalize(PlayTensor(std::move(m)), court));
  return out;
}

}  // namespace

double critic_gradient_penalty(const CriticParams& critic, const BatchView& batch, const Matrix& fake, double lambda,
                               std::span<const double> epsilon_draws, CriticParams* grad) {
  const Index frames = batch.frames;
  const Index size = batch.real.cols() / frames;
  if (static_cast<Index>(epsilon_draws.size()) != size || fake.cols() != batch.real.cols()) {
    throw ShapeError("critic_gradient_penalty: batch sizes differ");
  }
  Matrix mixed(layout::kPlayWidth, batch.real.cols());
  for (Index b = 0; b < size; ++b) {
    const double e = epsilon_draws[static_cast<std::size_t>(b)];
    mixed.middleCols(b * frames, frames) =
        e * batch.real.middleCols(b * frames, frames) + (1.0 - e) * fake.middleCols(b * frames, frames);
  }
  CriticTape tape;
  critic_forward_batch(stack_pairs(batch.condition, mixed), frames, critic, &tape);
  const Matrix input_grad = critic_backward_batch(tape, critic, Matrix::Ones(1, size), nullptr);

  double total = 0.0;
  Matrix direction = Matrix::Zero(layout::kPairWidth, batch.real.cols());
  for (Index b = 0; b < size; ++b) {
    const auto g = input_grad.bottomRows(layout::kPlayWidth).middleCols(b * frames, frames);
    const double n = g.norm();
    total += (n - 1.0) * (n - 1.0);
    if (grad && n > 0.0) {
      direction.bottomRows(layout::kPlayWidth).middleCols(b * frames, frames) =
          (2.0 * lambda / static_cast<double>(size) * (n - 1.0) / n) * g;
    }
  }
  if (grad) critic_directional_backward(tape, critic, direction, Matrix::Ones(1, size), *grad);
  return lambda * total / static_cast<double>(size);
}

CriticObjective critic_objective(const CriticParams& critic, const BatchView& batch, const Matrix& fake, double lambda,
                                 std::span<const double> epsilon_draws, CriticParams* grad) {
  const Index frames = batch.frames;
  const Index size = batch.real.cols() / frames;
  Matrix pairs(layout::kPairWidth, 2 * batch.real.cols());
  pairs.leftCols(batch.real.cols()) = stack_pairs(batch.condition, batch.real);
  pairs.rightCols(batch.real.cols()) = stack_pairs(batch.condition, fake);

  CriticTape tape;
  const Matrix scores = critic_forward_batch(pairs, frames, critic, grad ? &tape : nullptr);
  const double real_mean = scores.leftCols(size).mean();
  const double fake_mean = scores.rightCols(size).mean();
  if (grad) {
    Matrix d_scores(1, 2 * size);
    d_scores.leftCols(size).setConstant(-1.0 / static_cast<double>(size));
    d_scores.rightCols(size).setConstant(1.0 / static_cast<double>(size));
    critic_backward_batch(tape, critic, d_scores, grad);
  }
  CriticObjective out;
  out.penalty = critic_gradient_penalty(critic, batch, fake, lambda, epsilon_draws, grad);
  out.wasserstein = real_mean - fake_mean;
  out.loss = fake_mean - real_mean + out.penalty;
  return out;
}

LossReport composite_on_batch(const CriticParams& critic, const BatchView& batch, const Matrix& fake,
                              const GeneratorObjectiveOptions& options, Matrix* d_fake) {
  const Index frames = batch.frames;
  const Index size = fake.cols() / frames;
  const double inv = 1.0 / static_cast<double>(size);

  CriticTape tape;
  const Matrix scores_m = critic_forward_batch(stack_pairs(batch.condition, fake), frames, critic, d_fake ? &tape : nullptr);
  const std::vector<double> scores(scores_m.data(), scores_m.data() + scores_m.size());

  const auto fake_ft = to_feet(fake, frames, options.court);
  const auto real_ft = to_feet(batch.real, frames, options.court);

  LossReport r;
  r.adversarial = generator_adv_loss(scores);
  double w = 0.0;
  for (double s : scores) w += std::abs(s);
  w *= inv;
  if (options.frozen_w) w = *options.frozen_w;

  std::vector<PlayTensor> grads;
  if (d_fake) {
    for (Index b = 0; b < size; ++b) grads.emplace_back(Matrix::Zero(frames, layout::kPlayWidth));
  }
  for (Index b = 0; b < size; ++b) {
    PlayTensor* g = d_fake ? &grads[static_cast<std::size_t>(b)] : nullptr;
    r.dribbler += dribbler_loss(fake_ft[static_cast<std::size_t>(b)], g, w * inv) * inv;
    r.ball_pass += ball_pass_loss(fake_ft[static_cast<std::size_t>(b)], g, w * inv) * inv;
  }
  r.defender = defender_loss(real_ft, fake_ft, options.court.hoop, grads, w);
  r.acceleration = acceleration_loss(real_ft, fake_ft, options.fps, grads, w);

  r.w = w;
  r.composite = r.adversarial + w * (r.dribbler + r.ball_pass + r.defender + r.acceleration);

  if (d_fake) {
    std::vector<Matrix> raw;
    for (auto& g : grads) raw.push_back(std::move(g.values));
    Matrix d = pack(raw);
    const Vector scale = position_scale(layout::kPlayWidth, layout::kPlayPositions, options.court);
    d = scale.asDiagonal() * d;
    const Matrix d_pairs = critic_backward_batch(tape, critic, Matrix::Constant(1, size, -inv), nullptr);
    d += d_pairs.bottomRows(layout::kPlayWidth);
    *d_fake = std::move(d);
  }
  return r;
}

LossReport generator_objective(const GeneratorParams& generator, const CriticParams& critic, const Matrix& noise,
                               const BatchView& batch, const GeneratorObjectiveOptions& options,
                               GeneratorParams* grad, Matrix* d_fake) {
  GeneratorTape tape;
  const Matrix fake = generator_forward_batch(noise, batch.condition, batch.frames, generator, grad ? &tape : nullptr);
  Matrix d;
  const bool need = grad != nullptr || d_fake != nullptr;
  LossReport r = composite_on_batch(critic, batch, fake, options, need ? &d : nullptr);
  if (grad) generator_backward_batch(tape, generator, d, *grad);
  if (d_fake) *d_fake = std::move(d);
  return r;
}

}  // namespace courtsketch
