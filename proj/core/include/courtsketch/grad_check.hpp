#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "courtsketch/nn.hpp"

namespace courtsketch {

using ScalarFunction = std::function<double(const Vector&)>;
/// Discrete branch choices of a piecewise-smooth function (ReLU masks, argmins,
/// clamps). Coordinates whose +-h probes change the signature straddle a kink
/// and are reported as skipped rather than compared.
using BranchSignature = std::function<std::vector<std::uint8_t>(const Vector&)>;

struct GradCheckReport {
  double max_relative_error = 0.0;
  Index worst_coordinate = -1;
  std::size_t checked = 0;
  std::size_t skipped = 0;
};

/// |a - n| / max(|a|, |n|, floor) for analytic a and numeric n.
double relative_error(double analytic, double numeric, double floor);

/// Central differences (f(p + h e_i) - f(p - h e_i)) / 2h against `analytic`
/// on the listed coordinates (all when empty).
GradCheckReport grad_check(const ScalarFunction& f, const Vector& analytic, const Vector& point, double h,
                           std::span<const Index> coordinates = {}, const BranchSignature& signature = {},
                           double floor = 1e-6);

/// `count` distinct coordinates out of `size`, sorted.
std::vector<Index> sample_coordinates(Index size, std::size_t count, std::mt19937_64& rng);

Vector flatten(const ConstNamedTensors& tensors);
void unflatten(const Vector& values, const NamedTensors& tensors);

/// ReLU on/off pattern of every hidden unit for the given inputs.
std::vector<std::uint8_t> relu_signature(const GeneratorTape& tape);
std::vector<std::uint8_t> relu_signature(const CriticTape& tape);

}  // namespace courtsketch
