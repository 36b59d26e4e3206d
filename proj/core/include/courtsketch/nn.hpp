#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "courtsketch/tensor.hpp"

namespace courtsketch {

/// Fixed gain on the generator's position outputs, which are offsets from the
/// condition; keeps an Xavier-initialized generator within a few feet of it.
inline constexpr double kPositionOffsetGain = 1.0 / 64.0;

/// Ball-feature logits start at +gain where the condition marks possession and
/// at -gain elsewhere.
inline constexpr double kFeatureSkipGain = 3.0;

struct ModelConfig {
  int channels = 64;
  int residual_blocks = 8;
  int kernel = 5;
  int z_dim = 100;
  int t = 50;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Temporal convolution over a batch laid out as channels x (batch * frames);
/// sample b owns columns [b * frames, (b + 1) * frames). Zero "same" padding.
struct Conv1d {
  Matrix weight;  // out x (kernel * in); column tap * in + channel
  Matrix bias;    // out x 1
  int kernel = 1;

  Conv1d() = default;
  Conv1d(Index in, Index out, int kernel_size)
      : weight(Matrix::Zero(out, in * kernel_size)), bias(Matrix::Zero(out, 1)), kernel(kernel_size) {}

  [[nodiscard]] Index in_channels() const { return weight.cols() / kernel; }
  [[nodiscard]] Index out_channels() const { return weight.rows(); }
};

Matrix im2col(const Matrix& x, Index frames, int kernel);
Matrix col2im(const Matrix& cols, Index channels, Index frames, int kernel);

/// y = W * im2col(x) (+ b). When `cols` is non-null the unfolded input is stored there.
Matrix conv_forward(const Conv1d& conv, const Matrix& x, Index frames, bool with_bias = true, Matrix* cols = nullptr);
/// Accumulates weight (and optionally bias) gradients into `grad`; returns dL/dx.
Matrix conv_backward(const Conv1d& conv, const Matrix& cols, const Matrix& dy, Index frames, Conv1d* grad,
                     bool bias_grad = true);

struct ResidualBlock {
  Conv1d first;
  Conv1d second;
};

struct GeneratorParams {
  ModelConfig config;
  Conv1d condition_proj;  // 18 -> channels, per frame
  Conv1d noise_proj;      // z_dim -> channels, broadcast over frames
  std::vector<ResidualBlock> blocks;
  Conv1d output;  // channels -> 28

  [[nodiscard]] GeneratorParams zeros_like() const;
};

struct CriticParams {
  ModelConfig config;
  Conv1d input_proj;  // 46 -> channels, per frame
  std::vector<ResidualBlock> blocks;
  Conv1d head;  // channels -> 1 after temporal mean pooling

  [[nodiscard]] CriticParams zeros_like() const;
};

using NamedTensors = std::vector<std::pair<std::string, Matrix*>>;
using ConstNamedTensors = std::vector<std::pair<std::string, const Matrix*>>;

NamedTensors named_tensors(GeneratorParams& params);
ConstNamedTensors named_tensors(const GeneratorParams& params);
NamedTensors named_tensors(CriticParams& params);
ConstNamedTensors named_tensors(const CriticParams& params);

GeneratorParams make_generator(const ModelConfig& config);
CriticParams make_critic(const ModelConfig& config);

/// Glorot-uniform bound for a layer.
double xavier_bound(Index fan_in, Index fan_out);

struct ModelParams {
  GeneratorParams generator;
  CriticParams critic;
};

/// Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero. Fan counts
/// include the kernel width. Deterministic for a fixed seed.
ModelParams xavier_init(const ModelConfig& config, std::uint64_t seed);

struct LatentNoise {
  Vector values;
};

LatentNoise sample_noise(int z_dim, std::mt19937_64& rng);

// ------------------------------------------------------------------ batches

/// Stacks per-sample t x w matrices into w x (B * t).
Matrix pack(std::span<const Matrix> samples);
/// Inverse of pack.
std::vector<Matrix> unpack(const Matrix& packed, Index frames);

struct GeneratorTape {
  Index batch = 0;
  Index frames = 0;
  Matrix noise;      // z_dim x B
  Matrix condition;  // 18 x B*t
  std::vector<Matrix> hidden;     // residual stream h_0..h_N
  std::vector<Matrix> first_cols;   // im2col(relu(h_i))
  std::vector<Matrix> middle;       // first conv output, pre-activation
  std::vector<Matrix> second_cols;  // im2col(relu(middle))
  Matrix output_cols;
  Matrix output;  // 28 x B*t
};

/// Normalized condition (18 x B*t) and noise (z_dim x B) to a normalized play
/// batch (28 x B*t). Ball and offense columns are predicted as offsets from the
/// condition; each defender as an offset from the offense in the same slot.
/// Offsets are scaled by kPositionOffsetGain. Ball-feature logits are biased
/// toward the condition's ball feature by kFeatureSkipGain.
Matrix generator_forward_batch(const Matrix& noise, const Matrix& condition, Index frames,
                               const GeneratorParams& params, GeneratorTape* tape = nullptr);
/// Accumulates parameter gradients of <d_output, G(z|y)> into `grad`.
void generator_backward_batch(const GeneratorTape& tape, const GeneratorParams& params, const Matrix& d_output,
                              GeneratorParams& grad);

struct CriticTape {
  Index batch = 0;
  Index frames = 0;
  Matrix input;  // 46 x B*t
  std::vector<Matrix> hidden;
  std::vector<Matrix> first_cols;
  std::vector<Matrix> middle;
  std::vector<Matrix> second_cols;
  Matrix pooled;  // channels x B
};

/// Scores (1 x B) for condition/play pairs stacked as 46 x B*t.
Matrix critic_forward_batch(const Matrix& pairs, Index frames, const CriticParams& params, CriticTape* tape = nullptr);
/// Backward from per-sample score adjoints (1 x B). Accumulates parameter
/// gradients when `grad` is non-null and returns dL/d(pairs).
Matrix critic_backward_batch(const CriticTape& tape, const CriticParams& params, const Matrix& d_scores,
                             CriticParams* grad);

/// Gradient, with respect to the critic parameters, of sum_b seed_b * <dC_b/dx_b, v_b>
/// where v (46 x B*t) is a fixed input direction and the derivative is taken at
/// the taped input. This is the parameter gradient of the gradient penalty.
void critic_directional_backward(const CriticTape& tape, const CriticParams& params, const Matrix& direction,
                                 const Matrix& seed, CriticParams& grad);

// ------------------------------------------------------------- single plays

/// Normalized condition in, normalized play out. Throws ShapeError on size mismatch.
PlayTensor generator_forward(const LatentNoise& z, const ConditionMatrix& y, const GeneratorParams& params);
std::vector<PlayTensor> generator_forward(std::span<const LatentNoise> z, std::span<const ConditionMatrix> y,
                                          const GeneratorParams& params);

Matrix concat_pair(const ConditionMatrix& y, const PlayTensor& x);
double critic_forward(const ConditionMatrix& y, const PlayTensor& x, const CriticParams& params);
std::vector<double> critic_forward(std::span<const ConditionMatrix> y, std::span<const PlayTensor> x,
                                   const CriticParams& params);

}  // namespace courtsketch
