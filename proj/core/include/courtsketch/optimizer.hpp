#pragma once

#include <cstdint>
#include <vector>

#include "courtsketch/nn.hpp"

namespace courtsketch {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double epsilon = 1e-8;
};

struct AdamState {
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::uint64_t step = 0;
  std::uint64_t skipped = 0;  // updates rejected for non-finite gradients
};

AdamState make_adam_state(const ConstNamedTensors& params);

/// Bias-corrected Adam update. Returns false, leaving parameters and moments
/// untouched (and counting the skip), when any gradient entry is non-finite.
bool adam_step(const NamedTensors& params, const ConstNamedTensors& grads, AdamState& state, const AdamConfig& cfg);

}  // namespace courtsketch
