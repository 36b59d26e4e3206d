#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "courtsketch/court.hpp"
#include "courtsketch/json_io.hpp"
#include "courtsketch/tensor.hpp"

namespace courtsketch {

// ---------------------------------------------------------------- ingestion

struct IngestConfig {
  double target_fps = 5.0;
  /// Raw tracking covers the full court; this is its length along x.
  double full_court_length = 94.0;
  CourtSpec court;
};

struct IngestResult {
  std::vector<PlayRecord> plays;
  std::size_t skipped = 0;
  std::vector<std::string> warnings;
};

/// Cuts each raw play from the first frame with the ball in the offensive
/// half to its SHOT event, rotates plays attacking the far hoop onto the
/// canonical half, and downsamples by frame striding. Plays without a SHOT
/// event (or that fail validation after cutting) are skipped and counted.
/// Throws IngestError when a play's fps is not a multiple of the target.
IngestResult ingest(const std::vector<PlayRecord>& raw, const IngestConfig& cfg = {});

// ------------------------------------------------------------- segmentation

struct Segment {
  std::size_t first = 0;
  std::size_t last = 0;  // inclusive
  BallAction end;

  [[nodiscard]] std::size_t frames() const { return last - first + 1; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Contiguous ranges covering the play, each closed by a PASS or SHOT frame.
/// Frames after the final event form a trailing segment ending in NONE.
std::vector<Segment> segment_by_ball_events(const Play& play, const EventLog& events);

/// Recovers pass/shot events from per-frame possession flags. A pass is
/// logged at the first in-flight frame, a shot at the first HOOP frame.
EventLog events_from_possession(const Play& play);

// ----------------------------------------------------------- sketch synthesis

struct SketchifyConfig {
  double epsilon = 1.5;  // RDP tolerance, feet
  std::size_t shot_flight_frames = 2;
  CourtSpec court;
};

struct SketchifyResult {
  SketchPlay sketch;
  ConditionMatrix condition;
  std::vector<std::size_t> segment_frames;
};

/// Imitates a coach's sketch of a real play: per segment and per player the
/// track is RDP-simplified and replaced by the uniform-speed Bezier curve
/// through the kept points, resampled to the segment's original length.
SketchifyResult sketchify(const Play& play, const EventLog& events, const SketchifyConfig& cfg = {});

// ------------------------------------------------------------------ ordering

/// offense[k] / defense[k] name the source slot (0-based) that lands in slot k.
struct PlayerOrder {
  std::array<int, kTeamSize> offense{};
  std::array<int, kTeamSize> defense{};
};

/// Offense ascending by mean ball distance; each defender follows the
/// offensive player it is matched to (greedy one-to-one on mean distance).
PlayerOrder canonical_order(const Play& play);
Play apply_order(const Play& play, const PlayerOrder& order);
EventLog apply_order(const EventLog& events, const PlayerOrder& order);
Play order_players(const Play& play);

// --------------------------------------------------------- synthetic plays

struct SynthConfig {
  std::size_t frames = 50;
  double fps = 5.0;
  double player_speed = 5.0;     // ft/s cruising speed
  std::size_t defender_lag = 2;  // frames
  double defender_gap = 3.5;     // ft between defender and assignment, toward the hoop
  double defender_noise = 0.4;   // ft
  double dribble_offset = 1.0;   // ft, < 2
  std::size_t pass_flight_frames = 2;
  std::size_t shot_flight_frames = 2;
  CourtSpec court;
};

inline constexpr std::array<const char*, 4> kSynthTemplates = {"give-and-go", "pick-and-roll", "ball-rotation",
                                                               "random-motion"};

/// Deterministic for a fixed seed; every play draws from its own stream
/// seeded by (seed, index). Throws ConfigError for unknown templates.
std::vector<PlayRecord> synth_plays(const std::string& template_name, std::size_t count, std::uint64_t seed,
                                    const SynthConfig& cfg = {});

/// Plays drawn round-robin from all templates.
std::vector<PlayRecord> synth_mixed(std::size_t count, std::uint64_t seed, const SynthConfig& cfg = {});

}  // namespace courtsketch
