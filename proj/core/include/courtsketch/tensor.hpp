#pragma once

#include <Eigen/Dense>

#include "courtsketch/court.hpp"

namespace courtsketch {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Column layout of the per-frame encodings.
namespace layout {
inline constexpr Index kBall = 0;
inline constexpr Index kOffense = 2;
inline constexpr Index kDefense = 12;
inline constexpr Index kFeatureCount = 6;  // f_1..f_5, f_hoop
inline constexpr Index kHoopFeature = 5;

inline constexpr Index kConditionFeature = 12;
inline constexpr Index kConditionWidth = 18;
inline constexpr Index kConditionPositions = 12;

inline constexpr Index kPlayFeature = 22;
inline constexpr Index kPlayWidth = 28;
inline constexpr Index kPlayPositions = 22;

inline constexpr Index kPairWidth = kConditionWidth + kPlayWidth;

inline constexpr Index offense_column(int player) { return kOffense + 2 * (player - 1); }
inline constexpr Index defense_column(int player) { return kDefense + 2 * (player - 1); }
}  // namespace layout

/// t x 18: ball, five offense positions, then the six ball-status indicators.
struct ConditionMatrix {
  Matrix values;

  ConditionMatrix() = default;
  explicit ConditionMatrix(Index frames) : values(Matrix::Zero(frames, layout::kConditionWidth)) {}
  explicit ConditionMatrix(Matrix m) : values(std::move(m)) {}

  [[nodiscard]] Index frames() const { return values.rows(); }
  [[nodiscard]] Position ball(Index t) const { return {values(t, 0), values(t, 1)}; }
  [[nodiscard]] Position offense(Index t, int player) const {
    auto c = layout::offense_column(player);
    return {values(t, c), values(t, c + 1)};
  }
  [[nodiscard]] double feature(Index t, Index k) const { return values(t, layout::kConditionFeature + k); }
};

/// t x 28: ball, offense, defense, then the six ball-status indicators.
struct PlayTensor {
  Matrix values;

  PlayTensor() = default;
  explicit PlayTensor(Index frames) : values(Matrix::Zero(frames, layout::kPlayWidth)) {}
  explicit PlayTensor(Matrix m) : values(std::move(m)) {}

  [[nodiscard]] Index frames() const { return values.rows(); }
  [[nodiscard]] Position ball(Index t) const { return {values(t, 0), values(t, 1)}; }
  [[nodiscard]] Position offense(Index t, int player) const {
    auto c = layout::offense_column(player);
    return {values(t, c), values(t, c + 1)};
  }
  [[nodiscard]] Position defense(Index t, int player) const {
    auto c = layout::defense_column(player);
    return {values(t, c), values(t, c + 1)};
  }
  [[nodiscard]] double feature(Index t, Index k) const { return values(t, layout::kPlayFeature + k); }
};

/// Throws EncodingError without defense, ValidationError outside the court margin.
PlayTensor play_to_tensor(const Play& play, const CourtSpec& court = {});

/// Possession is the argmax feature when it reaches `threshold`, otherwise in flight.
Play tensor_to_play(const PlayTensor& tensor, const CourtSpec& court = {}, double threshold = 0.5, double fps = 5.0);

/// Condition encoding of a play's ball, offense and possession.
ConditionMatrix play_to_condition(const Play& play, const CourtSpec& court = {});

// Affine scaling of position columns to [0,1] by court size; features untouched.
PlayTensor normalize(const PlayTensor& tensor, const CourtSpec& court);
PlayTensor denormalize(const PlayTensor& tensor, const CourtSpec& court);
ConditionMatrix normalize(const ConditionMatrix& condition, const CourtSpec& court);
ConditionMatrix denormalize(const ConditionMatrix& condition, const CourtSpec& court);

/// Per-column scale that maps normalized units back to feet (1 for feature columns).
Vector position_scale(Index width, Index position_columns, const CourtSpec& court);

/// Violations of the ConditionMatrix invariants (binary features, at most one set per row).
std::vector<std::string> check_condition(const ConditionMatrix& condition);

}  // namespace courtsketch
