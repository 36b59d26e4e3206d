#include "courtsketch/nn.hpp"

#include <cmath>

#include <fmt/format.h>

#include "courtsketch/errors.hpp"

namespace courtsketch {

void ModelConfig::validate() const {
  if (channels <= 0 || residual_blocks <= 0 || kernel <= 0 || z_dim <= 0 || t <= 0) {
    throw ConfigError("model config values must be positive");
  }
  if (kernel % 2 == 0) throw ConfigError("kernel must be odd");
}

// ------------------------------------------------------------- convolution

Matrix im2col(const Matrix& x, Index frames, int kernel) {
  if (kernel == 1) return x;
  const Index channels = x.rows();
  const Index batch = x.cols() / frames;
  const Index half = kernel / 2;
  Matrix cols = Matrix::Zero(channels * kernel, x.cols());
  for (int tap = 0; tap < kernel; ++tap) {
    const Index shift = tap - half;
    const Index f0 = std::max<Index>(0, -shift);
    const Index f1 = std::min<Index>(frames, frames - shift);
    if (f1 <= f0) continue;
    for (Index b = 0; b < batch; ++b) {
      cols.block(tap * channels, b * frames + f0, channels, f1 - f0) =
          x.block(0, b * frames + f0 + shift, channels, f1 - f0);
    }
  }
  return cols;
}

Matrix col2im(const Matrix& cols, Index channels, Index frames, int kernel) {
  if (kernel == 1) return cols;
  const Index batch = cols.cols() / frames;
  const Index half = kernel / 2;
  Matrix x = Matrix::Zero(channels, cols.cols());
  for (int tap = 0; tap < kernel; ++tap) {
    const Index shift = tap - half;
    const Index f0 = std::max<Index>(0, -shift);
    const Index f1 = std::min<Index>(frames, frames - shift);
    if (f1 <= f0) continue;
    for (Index b = 0; b < batch; ++b) {
      x.block(0, b * frames + f0 + shift, channels, f1 - f0) +=
          cols.block(tap * channels, b * frames + f0, channels, f1 - f0);
    }
  }
  return x;
}

Matrix conv_forward(const Conv1d& conv, const Matrix& x, Index frames, bool with_bias, Matrix* cols) {
  if (x.rows() != conv.in_channels()) {
    throw ShapeError(fmt::format("conv expects {} input channels, got {}", conv.in_channels(), x.rows()));
  }
  if (frames <= 0 || x.cols() % frames != 0) throw ShapeError("batch columns are not a multiple of frames");
  Matrix y;
  if (conv.kernel == 1) {
    y.noalias() = conv.weight * x;
    if (cols) *cols = x;
  } else {
    Matrix unfolded = im2col(x, frames, conv.kernel);
    y.noalias() = conv.weight * unfolded;
    if (cols) *cols = std::move(unfolded);
  }
  if (with_bias) y.colwise() += conv.bias.col(0);
  return y;
}

Matrix conv_backward(const Conv1d& conv, const Matrix& cols, const Matrix& dy, Index frames, Conv1d* grad,
                     bool bias_grad) {
  if (grad) {
    grad->weight.noalias() += dy * cols.transpose();
    if (bias_grad) grad->bias.col(0) += dy.rowwise().sum();
  }
  Matrix dcols;
  dcols.noalias() = conv.weight.transpose() * dy;
  return col2im(dcols, conv.in_channels(), frames, conv.kernel);
}

// -------------------------------------------------------------- parameters

namespace {

Matrix relu(const Matrix& x) { return x.cwiseMax(0.0); }
Matrix relu_mask(const Matrix& x) { return (x.array() > 0.0).cast<double>().matrix(); }

void append(NamedTensors& out, const std::string& name, Conv1d& c) {
  out.emplace_back(name + ".weight", &c.weight);
  out.emplace_back(name + ".bias", &c.bias);
}
void append(ConstNamedTensors& out, const std::string& name, const Conv1d& c) {
  out.emplace_back(name + ".weight", &c.weight);
  out.emplace_back(name + ".bias", &c.bias);
}

template <class Out, class Params>
Out generator_tensors(Params& p) {
  Out out;
  append(out, "generator.condition_proj", p.condition_proj);
  append(out, "generator.noise_proj", p.noise_proj);
  for (std::size_t i = 0; i < p.blocks.size(); ++i) {
    append(out, fmt::format("generator.block{}.first", i), p.blocks[i].first);
    append(out, fmt::format("generator.block{}.second", i), p.blocks[i].second);
  }
  append(out, "generator.output", p.output);
  return out;
}

template <class Out, class Params>
Out critic_tensors(Params& p) {
  Out out;
  append(out, "critic.input_proj", p.input_proj);
  for (std::size_t i = 0; i < p.blocks.size(); ++i) {
    append(out, fmt::format("critic.block{}.first", i), p.blocks[i].first);
    append(out, fmt::format("critic.block{}.second", i), p.blocks[i].second);
  }
  append(out, "critic.head", p.head);
  return out;
}

Conv1d zeros(const Conv1d& c) {
  Conv1d out = c;
  out.weight.setZero();
  out.bias.setZero();
  return out;
}

std::vector<ResidualBlock> zeros(const std::vector<ResidualBlock>& blocks) {
  std::vector<ResidualBlock> out;
  for (const auto& b : blocks) out.push_back({zeros(b.first), zeros(b.second)});
  return out;
}

std::vector<ResidualBlock> make_blocks(const ModelConfig& c) {
  std::vector<ResidualBlock> blocks;
  for (int i = 0; i < c.residual_blocks; ++i) {
    blocks.push_back({Conv1d(c.channels, c.channels, c.kernel), Conv1d(c.channels, c.channels, c.kernel)});
  }
  return blocks;
}

void xavier_fill(Conv1d& conv, std::mt19937_64& rng) {
  const Index fan_in = conv.in_channels() * conv.kernel;
  const Index fan_out = conv.out_channels() * conv.kernel;
  const double bound = xavier_bound(fan_in, fan_out);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Index j = 0; j < conv.weight.cols(); ++j) {
    for (Index i = 0; i < conv.weight.rows(); ++i) conv.weight(i, j) = dist(rng);
  }
  conv.bias.setZero();
}

}  // namespace

GeneratorParams GeneratorParams::zeros_like() const {
  return {config, zeros(condition_proj), zeros(noise_proj), zeros(blocks), zeros(output)};
}

CriticParams CriticParams::zeros_like() const { return {config, zeros(input_proj), zeros(blocks), zeros(head)}; }

NamedTensors named_tensors(GeneratorParams& p) { return generator_tensors<NamedTensors>(p); }
ConstNamedTensors named_tensors(const GeneratorParams& p) { return generator_tensors<ConstNamedTensors>(p); }
NamedTensors named_tensors(CriticParams& p) { return critic_tensors<NamedTensors>(p); }
ConstNamedTensors named_tensors(const CriticParams& p) { return critic_tensors<ConstNamedTensors>(p); }

GeneratorParams make_generator(const ModelConfig& c) {
  c.validate();
  return {c, Conv1d(layout::kConditionWidth, c.channels, 1), Conv1d(c.z_dim, c.channels, 1), make_blocks(c),
          Conv1d(c.channels, layout::kPlayWidth, c.kernel)};
}

CriticParams make_critic(const ModelConfig& c) {
  c.validate();
  return {c, Conv1d(layout::kPairWidth, c.channels, 1), make_blocks(c), Conv1d(c.channels, 1, 1)};
}

double xavier_bound(Index fan_in, Index fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

ModelParams xavier_init(const ModelConfig& config, std::uint64_t seed) {
  ModelParams out{make_generator(config), make_critic(config)};
  std::seed_seq gseq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 1u};
  std::seed_seq cseq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 2u};
  std::mt19937_64 grng(gseq);
  std::mt19937_64 crng(cseq);

  auto& g = out.generator;
  xavier_fill(g.condition_proj, grng);
  xavier_fill(g.noise_proj, grng);
  for (auto& b : g.blocks) {
    xavier_fill(b.first, grng);
    xavier_fill(b.second, grng);
  }
  xavier_fill(g.output, grng);

  auto& c = out.critic;
  xavier_fill(c.input_proj, crng);
  for (auto& b : c.blocks) {
    xavier_fill(b.first, crng);
    xavier_fill(b.second, crng);
  }
  xavier_fill(c.head, crng);
  return out;
}

LatentNoise sample_noise(int z_dim, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  LatentNoise z{Vector(z_dim)};
  for (int i = 0; i < z_dim; ++i) z.values(i) = dist(rng);
  return z;
}

// ------------------------------------------------------------------ batches

Matrix pack(std::span<const Matrix> samples) {
  if (samples.empty()) return {};
  const Index frames = samples.front().rows();
  const Index width = samples.front().cols();
  Matrix out(width, frames * static_cast<Index>(samples.size()));
  for (std::size_t b = 0; b < samples.size(); ++b) {
    if (samples[b].rows() != frames || samples[b].cols() != width) throw ShapeError("pack: samples differ in shape");
    out.block(0, static_cast<Index>(b) * frames, width, frames) = samples[b].transpose();
  }
  return out;
}

std::vector<Matrix> unpack(const Matrix& packed, Index frames) {
  std::vector<Matrix> out;
  for (Index b = 0; b < packed.cols() / frames; ++b) out.emplace_back(packed.block(0, b * frames, packed.rows(), frames).transpose());
  return out;
}

namespace {

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Residual trunk shared by both networks: h <- h + W2 relu(W1 relu(h)).
template <class Tape>
Matrix residual_trunk(Matrix h, Index frames, const std::vector<ResidualBlock>& blocks, Tape* tape) {
  for (const auto& block : blocks) {
    Matrix first_cols;
    Matrix middle = conv_forward(block.first, relu(h), frames, true, tape ? &first_cols : nullptr);
    Matrix second_cols;
    Matrix branch = conv_forward(block.second, relu(middle), frames, true, tape ? &second_cols : nullptr);
    if (tape) {
      tape->hidden.push_back(h);
      tape->first_cols.push_back(std::move(first_cols));
      tape->middle.push_back(std::move(middle));
      tape->second_cols.push_back(std::move(second_cols));
    }
    h += branch;
  }
  if (tape) tape->hidden.push_back(h);
  return h;
}

template <class Tape>
Matrix residual_trunk_backward(const Tape& tape, const std::vector<ResidualBlock>& blocks, Matrix dh,
                               std::vector<ResidualBlock>* grad) {
  for (std::size_t i = blocks.size(); i-- > 0;) {
    const auto& block = blocks[i];
    Matrix d_act = conv_backward(block.second, tape.second_cols[i], dh, tape.frames, grad ? &(*grad)[i].second : nullptr);
    Matrix d_middle = d_act.cwiseProduct(relu_mask(tape.middle[i]));
    Matrix d_in = conv_backward(block.first, tape.first_cols[i], d_middle, tape.frames, grad ? &(*grad)[i].first : nullptr);
    dh += d_in.cwiseProduct(relu_mask(tape.hidden[i]));
  }
  return dh;
}

}  // namespace

Matrix generator_forward_batch(const Matrix& noise, const Matrix& condition, Index frames,
                               const GeneratorParams& params, GeneratorTape* tape) {
  const auto& cfg = params.config;
  if (condition.rows() != layout::kConditionWidth) {
    throw ShapeError(fmt::format("condition must have {} channels, got {}", layout::kConditionWidth, condition.rows()));
  }
  if (noise.rows() != cfg.z_dim) throw ShapeError(fmt::format("noise must have {} entries, got {}", cfg.z_dim, noise.rows()));
  if (frames <= 0 || condition.cols() != noise.cols() * frames) throw ShapeError("condition/noise batch sizes differ");
  const Index batch = noise.cols();

  Matrix h = conv_forward(params.condition_proj, condition, frames);
  const Matrix projected = conv_forward(params.noise_proj, noise, 1);
  for (Index b = 0; b < batch; ++b) h.middleCols(b * frames, frames).colwise() += projected.col(b);

  if (tape) {
    *tape = GeneratorTape{};
    tape->batch = batch;
    tape->frames = frames;
    tape->noise = noise;
    tape->condition = condition;
  }
  h = residual_trunk(std::move(h), frames, params.blocks, tape);

  Matrix output_cols;
  Matrix out = conv_forward(params.output, relu(h), frames, true, tape ? &output_cols : nullptr);
  out.topRows(layout::kPlayPositions) *= kPositionOffsetGain;
  out.topRows(layout::kConditionPositions) += condition.topRows(layout::kConditionPositions);
  out.middleRows(layout::kDefense, 2 * kTeamSize) += condition.middleRows(layout::kOffense, 2 * kTeamSize);
  out.bottomRows(layout::kFeatureCount).array() +=
      kFeatureSkipGain * (2.0 * condition.bottomRows(layout::kFeatureCount).array() - 1.0);
  out.bottomRows(layout::kFeatureCount) = out.bottomRows(layout::kFeatureCount).unaryExpr(&sigmoid);
  if (tape) {
    tape->output_cols = std::move(output_cols);
    tape->output = out;
  }
  return out;
}

void generator_backward_batch(const GeneratorTape& tape, const GeneratorParams& params, const Matrix& d_output,
                              GeneratorParams& grad) {
  Matrix d_out = d_output;
  const auto s = tape.output.bottomRows(layout::kFeatureCount).array();
  d_out.bottomRows(layout::kFeatureCount) =
      (d_output.bottomRows(layout::kFeatureCount).array() * s * (1.0 - s)).matrix();
  d_out.topRows(layout::kPlayPositions) *= kPositionOffsetGain;

  const Matrix& top = tape.hidden.back();
  Matrix d_act = conv_backward(params.output, tape.output_cols, d_out, tape.frames, &grad.output);
  Matrix dh = d_act.cwiseProduct(relu_mask(top));
  dh = residual_trunk_backward(tape, params.blocks, std::move(dh), &grad.blocks);

  grad.condition_proj.weight.noalias() += dh * tape.condition.transpose();
  grad.condition_proj.bias.col(0) += dh.rowwise().sum();
  Matrix d_projected(dh.rows(), tape.batch);
  for (Index b = 0; b < tape.batch; ++b) d_projected.col(b) = dh.middleCols(b * tape.frames, tape.frames).rowwise().sum();
  grad.noise_proj.weight.noalias() += d_projected * tape.noise.transpose();
  grad.noise_proj.bias.col(0) += d_projected.rowwise().sum();
}

Matrix critic_forward_batch(const Matrix& pairs, Index frames, const CriticParams& params, CriticTape* tape) {
  if (pairs.rows() != layout::kPairWidth) {
    throw ShapeError(fmt::format("critic input must have {} channels, got {}", layout::kPairWidth, pairs.rows()));
  }
  if (frames <= 0 || pairs.cols() % frames != 0) throw ShapeError("critic batch columns are not a multiple of frames");
  const Index batch = pairs.cols() / frames;
  if (tape) {
    *tape = CriticTape{};
    tape->batch = batch;
    tape->frames = frames;
    tape->input = pairs;
  }
  Matrix h = conv_forward(params.input_proj, pairs, frames);
  h = residual_trunk(std::move(h), frames, params.blocks, tape);
  const Matrix act = relu(h);
  Matrix pooled(act.rows(), batch);
  for (Index b = 0; b < batch; ++b) pooled.col(b) = act.middleCols(b * frames, frames).rowwise().mean();
  if (tape) tape->pooled = pooled;
  return conv_forward(params.head, pooled, 1);
}

Matrix critic_backward_batch(const CriticTape& tape, const CriticParams& params, const Matrix& d_scores,
                             CriticParams* grad) {
  Matrix d_pooled = conv_backward(params.head, tape.pooled, d_scores, 1, grad ? &grad->head : nullptr);
  const Matrix mask = relu_mask(tape.hidden.back());
  Matrix dh(mask.rows(), mask.cols());
  const double inv_frames = 1.0 / static_cast<double>(tape.frames);
  for (Index b = 0; b < tape.batch; ++b) {
    dh.middleCols(b * tape.frames, tape.frames) =
        mask.middleCols(b * tape.frames, tape.frames).array().colwise() * (d_pooled.col(b).array() * inv_frames);
  }
  dh = residual_trunk_backward(tape, params.blocks, std::move(dh), grad ? &grad->blocks : nullptr);
  return conv_backward(params.input_proj, tape.input, dh, tape.frames, grad ? &grad->input_proj : nullptr);
}

void critic_directional_backward(const CriticTape& tape, const CriticParams& params, const Matrix& direction,
                                 const Matrix& seed, CriticParams& grad) {
  // Forward: push the input direction through the network linearized at the
  // taped point. ReLU masks are locally constant, so the directional
  // derivative depends on the weights only through this linear pass.
  const Index frames = tape.frames;
  const std::size_t n = params.blocks.size();
  std::vector<Matrix> dir_first_cols(n);
  std::vector<Matrix> dir_second_cols(n);
  Matrix h_dot = conv_forward(params.input_proj, direction, frames, false);
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix a_dot = h_dot.cwiseProduct(relu_mask(tape.hidden[i]));
    const Matrix m_dot = conv_forward(params.blocks[i].first, a_dot, frames, false, &dir_first_cols[i]);
    const Matrix r_dot = m_dot.cwiseProduct(relu_mask(tape.middle[i]));
    h_dot += conv_forward(params.blocks[i].second, r_dot, frames, false, &dir_second_cols[i]);
  }
  const Matrix top_mask = relu_mask(tape.hidden.back());
  const Matrix act_dot = h_dot.cwiseProduct(top_mask);
  Matrix pooled_dot(act_dot.rows(), tape.batch);
  for (Index b = 0; b < tape.batch; ++b) pooled_dot.col(b) = act_dot.middleCols(b * frames, frames).rowwise().mean();

  // Reverse through the linearized network.
  Matrix d_pooled = conv_backward(params.head, pooled_dot, seed, 1, &grad.head, false);
  Matrix dh(top_mask.rows(), top_mask.cols());
  const double inv_frames = 1.0 / static_cast<double>(frames);
  for (Index b = 0; b < tape.batch; ++b) {
    dh.middleCols(b * frames, frames) =
        top_mask.middleCols(b * frames, frames).array().colwise() * (d_pooled.col(b).array() * inv_frames);
  }
  for (std::size_t i = n; i-- > 0;) {
    const auto& block = params.blocks[i];
    Matrix d_r = conv_backward(block.second, dir_second_cols[i], dh, frames, &grad.blocks[i].second, false);
    Matrix d_m = d_r.cwiseProduct(relu_mask(tape.middle[i]));
    Matrix d_a = conv_backward(block.first, dir_first_cols[i], d_m, frames, &grad.blocks[i].first, false);
    dh += d_a.cwiseProduct(relu_mask(tape.hidden[i]));
  }
  grad.input_proj.weight.noalias() += dh * direction.transpose();
}

// ------------------------------------------------------------- single plays

std::vector<PlayTensor> generator_forward(std::span<const LatentNoise> z, std::span<const ConditionMatrix> y,
                                          const GeneratorParams& params) {
  if (z.size() != y.size()) throw ShapeError("generator_forward: noise and condition counts differ");
  if (y.empty()) return {};
  const Index frames = y.front().frames();
  std::vector<Matrix> conds;
  Matrix noise(params.config.z_dim, static_cast<Index>(z.size()));
  for (std::size_t b = 0; b < y.size(); ++b) {
    if (y[b].values.cols() != layout::kConditionWidth || y[b].frames() != frames) {
      throw ShapeError("generator_forward: conditions must be t x 18 with a common t");
    }
    if (z[b].values.size() != params.config.z_dim) throw ShapeError("generator_forward: wrong noise dimension");
    conds.push_back(y[b].values);
    noise.col(static_cast<Index>(b)) = z[b].values;
  }
  const Matrix out = generator_forward_batch(noise, pack(conds), frames, params);
  std::vector<PlayTensor> result;
  for (auto& m : unpack(out, frames)) result.emplace_back(std::move(m));
  return result;
}

PlayTensor generator_forward(const LatentNoise& z, const ConditionMatrix& y, const GeneratorParams& params) {
  return generator_forward(std::span(&z, 1), std::span(&y, 1), params).front();
}

Matrix concat_pair(const ConditionMatrix& y, const PlayTensor& x) {
  if (y.frames() != x.frames() || y.values.cols() != layout::kConditionWidth || x.values.cols() != layout::kPlayWidth) {
    throw ShapeError("critic pair must be t x 18 condition with t x 28 play");
  }
  Matrix out(y.frames(), layout::kPairWidth);
  out << y.values, x.values;
  return out;
}

std::vector<double> critic_forward(std::span<const ConditionMatrix> y, std::span<const PlayTensor> x,
                                   const CriticParams& params) {
  if (y.size() != x.size()) throw ShapeError("critic_forward: condition and play counts differ");
  if (y.empty()) return {};
  std::vector<Matrix> pairs;
  for (std::size_t b = 0; b < y.size(); ++b) {
    pairs.push_back(concat_pair(y[b], x[b]));
    if (pairs.back().rows() != pairs.front().rows()) throw ShapeError("critic_forward: plays differ in length");
  }
  const Matrix scores = critic_forward_batch(pack(pairs), y.front().frames(), params);
  return {scores.data(), scores.data() + scores.size()};
}

double critic_forward(const ConditionMatrix& y, const PlayTensor& x, const CriticParams& params) {
  return critic_forward(std::span(&y, 1), std::span(&x, 1), params).front();
}

}  // namespace courtsketch
