#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "courtsketch/court.hpp"
#include "courtsketch/json_io.hpp"
#include "courtsketch/tensor.hpp"

namespace courtsketch {

struct TimingConfig {
  double mean_speed = 5.0;  // ft/s
  double fps = 5.0;
  std::size_t min_segment_frames = 5;
  double epsilon = 1.5;  // RDP tolerance applied to drawn paths, feet
  std::size_t pass_flight_frames = 2;
  std::size_t shot_flight_frames = 2;
  std::size_t shot_tail_frames = 0;  // extra frames after the final phase

  void validate() const;
};

/// max(min_segment_frames, round(L_max / mean_speed * fps)), L_max the longest path in the phase.
std::size_t segment_duration(const Phase& phase, const TimingConfig& cfg = {});

/// Sketch to t x 18 condition (feet). `durations`, when given, overrides the
/// timing rule per phase. Throws SketchError for a broken carrier chain and
/// ValidationError for points outside the court margin.
ConditionMatrix encode_condition(const SketchPlay& sketch, const TimingConfig& cfg = {}, const CourtSpec& court = {},
                                 std::optional<std::span<const std::size_t>> durations = std::nullopt);

struct Violation {
  std::string rule;  // "carrier-chain" | "bounds" | "phase-structure"
  int phase = -1;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  [[nodiscard]] bool ok() const { return violations.empty(); }
  [[nodiscard]] std::size_t count(const std::string& rule) const;
};

/// Paths may start this far from where the player stands when the phase begins.
inline constexpr double kPathStartTolerance = 1.0;

ValidationReport validate_sketch(const SketchPlay& sketch, const CourtSpec& court = {});

Json to_json(const ValidationReport& report);

}  // namespace courtsketch
