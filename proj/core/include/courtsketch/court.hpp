#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace courtsketch {

inline constexpr int kTeamSize = 5;

/// Court coordinates in feet. Offense always attacks the hoop near x = 0.
struct Position {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

inline Position operator+(Position a, Position b) { return {a.x + b.x, a.y + b.y}; }
inline Position operator-(Position a, Position b) { return {a.x - b.x, a.y - b.y}; }
inline Position operator*(double s, Position p) { return {s * p.x, s * p.y}; }

inline double norm(Position p) { return std::hypot(p.x, p.y); }
inline double distance(Position a, Position b) { return norm(a - b); }
inline Position lerp(Position a, Position b, double s) { return {a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)}; }

using Lineup = std::array<Position, kTeamSize>;
using Polyline = std::vector<Position>;

struct CourtSpec {
  double length_x = 47.0;
  double width_y = 50.0;
  Position hoop{5.25, 25.0};
  /// Tracking noise puts players slightly out of bounds; positions within
  /// this many feet of the lines still validate.
  double margin = 3.0;

  /// Throws ConfigError when the geometry is degenerate.
  void validate() const;
  [[nodiscard]] bool in_bounds(Position p) const;
};

/// Who holds the ball in a frame. Player indices are 1-based (1..5).
struct Possession {
  enum class Kind { Player, Hoop, InFlight };

  Kind kind = Kind::InFlight;
  int player = 0;

  static Possession of_player(int index) { return {Kind::Player, index}; }
  static Possession hoop() { return {Kind::Hoop, 0}; }
  static Possession in_flight() { return {Kind::InFlight, 0}; }

  [[nodiscard]] bool is_player() const { return kind == Kind::Player; }

  friend bool operator==(const Possession&, const Possession&) = default;
};

struct Frame {
  Position ball;
  Lineup offense{};
  std::optional<Lineup> defense;
  Possession possession;

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct Play {
  double fps = 5.0;
  std::vector<Frame> frames;

  [[nodiscard]] std::size_t length() const { return frames.size(); }
  [[nodiscard]] bool has_defense() const;

  friend bool operator==(const Play&, const Play&) = default;
};

/// Returns human-readable invariant violations; empty means valid.
std::vector<std::string> validate_play(const Play& play, const CourtSpec& court = {});

// Ball events shared by event logs and sketch phases.
enum class BallEventKind { Pass, Shot, None };

struct BallAction {
  BallEventKind kind = BallEventKind::None;
  int from = 0;  // passer or shooter, 1-based
  int to = 0;    // receiver for passes

  static BallAction pass(int from, int to) { return {BallEventKind::Pass, from, to}; }
  static BallAction shot(int by) { return {BallEventKind::Shot, by, 0}; }
  static BallAction none() { return {}; }

  friend bool operator==(const BallAction&, const BallAction&) = default;
};

struct BallEvent {
  std::size_t frame = 0;
  BallAction action;

  friend bool operator==(const BallEvent&, const BallEvent&) = default;
};

using EventLog = std::vector<BallEvent>;

struct Phase {
  /// Keyed by 1-based player index. A missing entry means the player holds position.
  std::vector<std::pair<int, Polyline>> paths;
  BallAction end;

  [[nodiscard]] const Polyline* path_for(int player) const;

  friend bool operator==(const Phase&, const Phase&) = default;
};

struct SketchPlay {
  Lineup initial_positions{};
  int initial_dribbler = 1;
  std::vector<Phase> phases;

  friend bool operator==(const SketchPlay&, const SketchPlay&) = default;
};

}  // namespace courtsketch
