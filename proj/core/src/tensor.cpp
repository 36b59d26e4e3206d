#include "courtsketch/tensor.hpp"

#include <fmt/format.h>

#include "courtsketch/errors.hpp"

namespace courtsketch {

namespace {

void put(Matrix& m, Index t, Index col, Position p) {
  m(t, col) = p.x;
  m(t, col + 1) = p.y;
}

Position get(const Matrix& m, Index t, Index col) { return {m(t, col), m(t, col + 1)}; }

void encode_feature(Matrix& m, Index t, Index first, const Possession& poss) {
  switch (poss.kind) {
    case Possession::Kind::Player: m(t, first + poss.player - 1) = 1.0; break;
    case Possession::Kind::Hoop: m(t, first + layout::kHoopFeature) = 1.0; break;
    case Possession::Kind::InFlight: break;
  }
}

void check_bounds(const Play& play, const CourtSpec& court) {
  auto errors = validate_play(play, court);
  if (!errors.empty()) throw ValidationError(errors.front());
}

template <class Tensor>
Tensor rescale(const Tensor& in, Index position_columns, const CourtSpec& court, bool forward) {
  Tensor out = in;
  for (Index c = 0; c < position_columns; ++c) {
    const double scale = (c % 2 == 0) ? court.length_x : court.width_y;
    if (forward) {
      out.values.col(c) /= scale;
    } else {
      out.values.col(c) *= scale;
    }
  }
  return out;
}

}  // namespace

PlayTensor play_to_tensor(const Play& play, const CourtSpec& court) {
  if (!play.has_defense()) throw EncodingError("play_to_tensor requires defensive positions");
  check_bounds(play, court);

  PlayTensor out(static_cast<Index>(play.length()));
  for (Index t = 0; t < out.frames(); ++t) {
    const Frame& f = play.frames[static_cast<std::size_t>(t)];
    put(out.values, t, layout::kBall, f.ball);
    for (int i = 1; i <= kTeamSize; ++i) {
      put(out.values, t, layout::offense_column(i), f.offense[i - 1]);
      put(out.values, t, layout::defense_column(i), (*f.defense)[i - 1]);
    }
    encode_feature(out.values, t, layout::kPlayFeature, f.possession);
  }
  return out;
}

Play tensor_to_play(const PlayTensor& tensor, const CourtSpec& court, double threshold, double fps) {
  (void)court;
  if (tensor.values.cols() != layout::kPlayWidth) {
    throw DecodingError(fmt::format("expected {} columns, got {}", layout::kPlayWidth, tensor.values.cols()));
  }
  if (!tensor.values.allFinite()) throw DecodingError("tensor contains non-finite entries");

  Play play;
  play.fps = fps;
  play.frames.resize(static_cast<std::size_t>(tensor.frames()));
  for (Index t = 0; t < tensor.frames(); ++t) {
    Frame& f = play.frames[static_cast<std::size_t>(t)];
    f.ball = get(tensor.values, t, layout::kBall);
    Lineup defense{};
    for (int i = 1; i <= kTeamSize; ++i) {
      f.offense[i - 1] = get(tensor.values, t, layout::offense_column(i));
      defense[i - 1] = get(tensor.values, t, layout::defense_column(i));
    }
    f.defense = defense;

    Index best = 0;
    const auto features = tensor.values.row(t).segment(layout::kPlayFeature, layout::kFeatureCount);
    features.maxCoeff(&best);
    if (features(best) >= threshold) {
      f.possession = best == layout::kHoopFeature ? Possession::hoop() : Possession::of_player(static_cast<int>(best) + 1);
    } else {
      f.possession = Possession::in_flight();
    }
  }
  return play;
}

ConditionMatrix play_to_condition(const Play& play, const CourtSpec& court) {
  check_bounds(play, court);
  ConditionMatrix out(static_cast<Index>(play.length()));
  for (Index t = 0; t < out.frames(); ++t) {
    const Frame& f = play.frames[static_cast<std::size_t>(t)];
    put(out.values, t, layout::kBall, f.ball);
    for (int i = 1; i <= kTeamSize; ++i) put(out.values, t, layout::offense_column(i), f.offense[i - 1]);
    encode_feature(out.values, t, layout::kConditionFeature, f.possession);
  }
  return out;
}

PlayTensor normalize(const PlayTensor& tensor, const CourtSpec& court) {
  return rescale(tensor, layout::kPlayPositions, court, true);
}
PlayTensor denormalize(const PlayTensor& tensor, const CourtSpec& court) {
  return rescale(tensor, layout::kPlayPositions, court, false);
}
ConditionMatrix normalize(const ConditionMatrix& condition, const CourtSpec& court) {
  return rescale(condition, layout::kConditionPositions, court, true);
}
ConditionMatrix denormalize(const ConditionMatrix& condition, const CourtSpec& court) {
  return rescale(condition, layout::kConditionPositions, court, false);
}

Vector position_scale(Index width, Index position_columns, const CourtSpec& court) {
  Vector scale = Vector::Ones(width);
  for (Index c = 0; c < position_columns; ++c) scale(c) = (c % 2 == 0) ? court.length_x : court.width_y;
  return scale;
}

std::vector<std::string> check_condition(const ConditionMatrix& condition) {
  std::vector<std::string> errors;
  if (condition.values.cols() != layout::kConditionWidth) {
    errors.push_back(fmt::format("condition must have {} columns, got {}", layout::kConditionWidth,
                                 condition.values.cols()));
    return errors;
  }
  for (Index t = 0; t < condition.frames(); ++t) {
    double sum = 0.0;
    for (Index k = 0; k < layout::kFeatureCount; ++k) {
      const double v = condition.feature(t, k);
      if (v != 0.0 && v != 1.0) errors.push_back(fmt::format("row {}: feature {} is {}, not binary", t, k, v));
      sum += v;
    }
    if (sum > 1.0) errors.push_back(fmt::format("row {}: {} features set", t, sum));
  }
  return errors;
}

}  // namespace courtsketch
