#include "courtsketch/sketch_codec.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "courtsketch/errors.hpp"
#include "courtsketch/geometry.hpp"
#include "courtsketch/trajectory.hpp"

namespace courtsketch {

void TimingConfig::validate() const {
  if (!(mean_speed > 0.0) || !(fps > 0.0) || min_segment_frames == 0) {
    throw ConfigError("timing config values must be positive");
  }
  if (epsilon < 0.0) throw ConfigError("timing epsilon must be non-negative");
}

std::size_t segment_duration(const Phase& phase, const TimingConfig& cfg) {
  double longest = 0.0;
  for (const auto& [player, line] : phase.paths) longest = std::max(longest, polyline_length(line));
  const auto frames = static_cast<std::size_t>(std::llround(longest / cfg.mean_speed * cfg.fps));
  return std::max(cfg.min_segment_frames, frames);
}

std::size_t ValidationReport::count(const std::string& rule) const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [&](const Violation& v) { return v.rule == rule; }));
}

ValidationReport validate_sketch(const SketchPlay& sketch, const CourtSpec& court) {
  ValidationReport report;
  auto add = [&](const char* rule, int phase, std::string msg) {
    report.violations.push_back({rule, phase, std::move(msg)});
  };
  auto check_point = [&](Position p, int phase, const std::string& what) {
    if (!court.in_bounds(p)) add("bounds", phase, fmt::format("{} at ({}, {}) is off the court", what, p.x, p.y));
  };

  for (int i = 0; i < kTeamSize; ++i) check_point(sketch.initial_positions[i], -1, fmt::format("player {} start", i + 1));
  if (sketch.initial_dribbler < 1 || sketch.initial_dribbler > kTeamSize) {
    add("carrier-chain", -1, fmt::format("dribbler {} is not a player", sketch.initial_dribbler));
  }
  if (sketch.phases.empty()) add("phase-structure", -1, "sketch has no phases");

  Lineup current = sketch.initial_positions;
  int carrier = sketch.initial_dribbler;
  for (std::size_t k = 0; k < sketch.phases.size(); ++k) {
    const Phase& phase = sketch.phases[k];
    const int pk = static_cast<int>(k);
    const bool last = k + 1 == sketch.phases.size();
    for (const auto& [player, line] : phase.paths) {
      if (player < 1 || player > kTeamSize) {
        add("phase-structure", pk, fmt::format("path for unknown player {}", player));
        continue;
      }
      if (line.size() < 2) {
        add("phase-structure", pk, fmt::format("path for player {} has fewer than 2 points", player));
        continue;
      }
      for (std::size_t j = 0; j < line.size(); ++j) {
        check_point(line[j], pk, fmt::format("player {} path point {}", player, j));
      }
      if (distance(line.front(), current[player - 1]) > kPathStartTolerance) {
        add("phase-structure", pk, fmt::format("path for player {} does not start at the player", player));
      }
      current[player - 1] = line.back();
    }

    const BallAction& end = phase.end;
    switch (end.kind) {
      case BallEventKind::Pass:
        if (end.from != carrier) {
          add("carrier-chain", pk, fmt::format("pass from player {} while player {} carries", end.from, carrier));
        }
        if (end.to < 1 || end.to > kTeamSize || end.to == end.from) {
          add("carrier-chain", pk, fmt::format("invalid pass receiver {}", end.to));
        }
        if (last) add("phase-structure", pk, "last phase must end with a shot or nothing");
        carrier = end.to;
        break;
      case BallEventKind::Shot:
        if (end.from != carrier) {
          add("carrier-chain", pk, fmt::format("shot by player {} while player {} carries", end.from, carrier));
        }
        if (!last) add("phase-structure", pk, "only the last phase may end with a shot");
        break;
      case BallEventKind::None:
        if (!last) add("phase-structure", pk, "only the last phase may end without a ball event");
        break;
    }
  }
  return report;
}

ConditionMatrix encode_condition(const SketchPlay& sketch, const TimingConfig& cfg, const CourtSpec& court,
                                 std::optional<std::span<const std::size_t>> durations) {
  cfg.validate();
  const auto report = validate_sketch(sketch, court);
  for (const auto& v : report.violations) {
    if (v.rule == "bounds") throw ValidationError(v.message);
  }
  if (!report.ok()) throw SketchError(report.violations.front().message);
  if (durations && durations->size() != sketch.phases.size()) {
    throw SketchError("one duration per phase is required");
  }

  std::vector<Lineup> offense;
  std::vector<Possession> possession;
  Lineup current = sketch.initial_positions;
  int carrier = sketch.initial_dribbler;
  std::size_t airborne_until = 0;  // frames before this index are already assigned as in flight

  for (std::size_t k = 0; k < sketch.phases.size(); ++k) {
    const Phase& phase = sketch.phases[k];
    const std::size_t frames = durations ? (*durations)[k] : segment_duration(phase, cfg);
    if (frames == 0) throw SketchError("phase duration must be positive");
    const std::size_t base = offense.size();
    offense.resize(base + frames, current);
    possession.resize(base + frames, Possession::of_player(carrier));
    for (std::size_t f = base; f < std::min(airborne_until, base + frames); ++f) possession[f] = Possession::in_flight();

    for (int i = 0; i < kTeamSize; ++i) {
      const Polyline* path = phase.path_for(i + 1);
      if (path == nullptr) continue;
      const Polyline control = rdp_simplify(*path, cfg.epsilon);
      const Polyline track = phase_track(control, frames, k == 0);
      for (std::size_t j = 0; j < frames; ++j) offense[base + j][i] = track[j];
      current[i] = track.back();
    }

    const std::size_t event_frame = base + frames - 1;
    if (phase.end.kind == BallEventKind::Pass) {
      possession[event_frame] = Possession::in_flight();
      airborne_until = event_frame + cfg.pass_flight_frames;
      carrier = phase.end.to;
    } else if (phase.end.kind == BallEventKind::Shot) {
      possession[event_frame] = Possession::hoop();
    }
  }
  if (sketch.phases.back().end.kind == BallEventKind::Shot) {
    offense.resize(offense.size() + cfg.shot_tail_frames, current);
    possession.resize(possession.size() + cfg.shot_tail_frames, Possession::hoop());
  }

  const Position release = sketch.initial_positions[sketch.initial_dribbler - 1];
  const auto ball = ball_track(offense, possession, court.hoop, cfg.shot_flight_frames, release);

  ConditionMatrix out(static_cast<Index>(offense.size()));
  auto& m = out.values;
  for (std::size_t t = 0; t < offense.size(); ++t) {
    const auto row = static_cast<Index>(t);
    m(row, 0) = ball[t].x;
    m(row, 1) = ball[t].y;
    for (int i = 1; i <= kTeamSize; ++i) {
      m(row, layout::offense_column(i)) = offense[t][i - 1].x;
      m(row, layout::offense_column(i) + 1) = offense[t][i - 1].y;
    }
    if (possession[t].is_player()) m(row, layout::kConditionFeature + possession[t].player - 1) = 1.0;
    if (possession[t].kind == Possession::Kind::Hoop) m(row, layout::kConditionFeature + layout::kHoopFeature) = 1.0;
  }
  return out;
}

Json to_json(const ValidationReport& report) {
  Json list = Json::array();
  for (const auto& v : report.violations) {
    list.push_back({{"rule", v.rule}, {"phase", v.phase}, {"message", v.message}});
  }
  return {{"ok", report.ok()}, {"violations", list}};
}

}  // namespace courtsketch
