#include "courtsketch/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "courtsketch/errors.hpp"
#include "courtsketch/geometry.hpp"
#include "courtsketch/trajectory.hpp"

namespace courtsketch {

// ---------------------------------------------------------------- ingestion

namespace {

Position rotate_half_turn(Position p, double full_length, double width) { return {full_length - p.x, width - p.y}; }

Frame rotate_frame(const Frame& f, double full_length, double width) {
  Frame out = f;
  out.ball = rotate_half_turn(f.ball, full_length, width);
  for (auto& p : out.offense) p = rotate_half_turn(p, full_length, width);
  if (out.defense) {
    for (auto& p : *out.defense) p = rotate_half_turn(p, full_length, width);
  }
  return out;
}

}  // namespace

IngestResult ingest(const std::vector<PlayRecord>& raw, const IngestConfig& cfg) {
  IngestResult result;
  for (std::size_t index = 0; index < raw.size(); ++index) {
    const Play& play = raw[index].play;
    const EventLog& events = raw[index].events;

    const double ratio = play.fps / cfg.target_fps;
    const auto stride = static_cast<std::size_t>(std::llround(ratio));
    if (play.fps < cfg.target_fps || stride == 0 || std::abs(ratio - static_cast<double>(stride)) > 1e-9) {
      throw IngestError(fmt::format("play {}: fps {} is not a multiple of target fps {}", index, play.fps,
                                    cfg.target_fps));
    }

    const auto shot = std::find_if(events.begin(), events.end(),
                                   [](const BallEvent& e) { return e.action.kind == BallEventKind::Shot; });
    if (shot == events.end() || shot->frame >= play.length()) {
      ++result.skipped;
      result.warnings.push_back(fmt::format("play {}: no SHOT event, skipped", index));
      continue;
    }
    const std::size_t shot_frame = shot->frame;

    const bool far_hoop = play.frames[shot_frame].ball.x > cfg.full_court_length / 2.0;
    std::vector<Frame> frames = play.frames;
    if (far_hoop) {
      for (auto& f : frames) f = rotate_frame(f, cfg.full_court_length, cfg.court.width_y);
    }

    std::size_t start = 0;
    while (start < shot_frame && frames[start].ball.x > cfg.court.length_x) ++start;

    PlayRecord out;
    out.play.fps = cfg.target_fps;
    for (std::size_t f = start; f <= shot_frame; f += stride) out.play.frames.push_back(frames[f]);
    const std::size_t last = out.play.frames.size() - 1;

    for (const BallEvent& e : events) {
      if (e.frame < start || e.frame > shot_frame) continue;
      const std::size_t mapped = e.action.kind == BallEventKind::Shot ? last : std::min((e.frame - start) / stride, last);
      if (!out.events.empty() && mapped <= out.events.back().frame) {
        result.warnings.push_back(fmt::format("play {}: event at raw frame {} collapsed by downsampling", index, e.frame));
        continue;
      }
      if (e.action.kind != BallEventKind::Shot && mapped == last) continue;
      out.events.push_back({mapped, e.action});
      if (e.action.kind == BallEventKind::Shot) break;
    }

    auto errors = validate_play(out.play, cfg.court);
    if (!errors.empty()) {
      ++result.skipped;
      result.warnings.push_back(fmt::format("play {}: {}, skipped", index, errors.front()));
      continue;
    }
    result.plays.push_back(std::move(out));
  }
  return result;
}

// ------------------------------------------------------------- segmentation

std::vector<Segment> segment_by_ball_events(const Play& play, const EventLog& events) {
  const std::size_t n = play.length();
  if (n == 0) throw SegmentationError("cannot segment an empty play");
  std::vector<Segment> out;
  std::size_t first = 0;
  bool shot_seen = false;
  for (const BallEvent& e : events) {
    if (shot_seen) throw SegmentationError("ball event after the SHOT");
    if (e.action.kind == BallEventKind::None) throw SegmentationError("event log entries must be PASS or SHOT");
    if (e.frame >= n) throw SegmentationError(fmt::format("event frame {} outside play of {} frames", e.frame, n));
    if (e.frame < first) throw SegmentationError("event frames must be strictly increasing");
    out.push_back({first, e.frame, e.action});
    first = e.frame + 1;
    shot_seen = e.action.kind == BallEventKind::Shot;
  }
  if (first < n) out.push_back({first, n - 1, BallAction::none()});
  return out;
}

EventLog events_from_possession(const Play& play) {
  EventLog out;
  const auto& frames = play.frames;
  int carrier = 0;
  std::size_t t = 0;
  while (t < frames.size()) {
    if (frames[t].possession.is_player()) {
      carrier = frames[t].possession.player;
      ++t;
      continue;
    }
    const std::size_t run_start = t;
    std::size_t first_hoop = frames.size();
    while (t < frames.size() && !frames[t].possession.is_player()) {
      if (frames[t].possession.kind == Possession::Kind::Hoop && first_hoop == frames.size()) first_hoop = t;
      ++t;
    }
    if (carrier == 0) continue;
    if (first_hoop < frames.size()) {
      out.push_back({first_hoop, BallAction::shot(carrier)});
      break;
    }
    if (t < frames.size() && frames[t].possession.player != carrier) {
      out.push_back({run_start, BallAction::pass(carrier, frames[t].possession.player)});
    }
  }
  return out;
}

// ----------------------------------------------------------- sketch synthesis

SketchifyResult sketchify(const Play& play, const EventLog& events, const SketchifyConfig& cfg) {
  const auto segments = segment_by_ball_events(play, events);
  const std::size_t n = play.length();

  SketchifyResult result;
  result.sketch.initial_positions = play.frames.front().offense;
  result.sketch.initial_dribbler = 1;
  for (const Frame& f : play.frames) {
    if (f.possession.is_player()) {
      result.sketch.initial_dribbler = f.possession.player;
      break;
    }
  }

  std::vector<Lineup> sketched(n);
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const Segment& seg = segments[k];
    const bool opening = k == 0;
    const std::size_t src_first = opening ? seg.first : seg.first - 1;
    Phase phase;
    phase.end = seg.end;
    for (int i = 0; i < kTeamSize; ++i) {
      Polyline source;
      for (std::size_t f = src_first; f <= seg.last; ++f) source.push_back(play.frames[f].offense[i]);
      const bool stationary =
          std::all_of(source.begin(), source.end(), [&](Position p) { return p == source.front(); });
      Polyline track;
      if (stationary) {
        track.assign(seg.frames(), source.front());
      } else {
        Polyline control = rdp_simplify(source, cfg.epsilon);
        track = phase_track(control, seg.frames(), opening);
        phase.paths.emplace_back(i + 1, std::move(control));
      }
      for (std::size_t j = 0; j < track.size(); ++j) sketched[seg.first + j][i] = track[j];
    }
    result.sketch.phases.push_back(std::move(phase));
    result.segment_frames.push_back(seg.frames());
  }

  std::vector<Possession> possession(n);
  for (std::size_t t = 0; t < n; ++t) possession[t] = play.frames[t].possession;
  const auto ball = ball_track(sketched, possession, cfg.court.hoop, cfg.shot_flight_frames, play.frames.front().ball);

  result.condition = ConditionMatrix(static_cast<Index>(n));
  auto& m = result.condition.values;
  for (std::size_t t = 0; t < n; ++t) {
    const auto row = static_cast<Index>(t);
    m(row, 0) = ball[t].x;
    m(row, 1) = ball[t].y;
    for (int i = 1; i <= kTeamSize; ++i) {
      m(row, layout::offense_column(i)) = sketched[t][i - 1].x;
      m(row, layout::offense_column(i) + 1) = sketched[t][i - 1].y;
    }
    const Possession& p = possession[t];
    if (p.is_player()) m(row, layout::kConditionFeature + p.player - 1) = 1.0;
    if (p.kind == Possession::Kind::Hoop) m(row, layout::kConditionFeature + layout::kHoopFeature) = 1.0;
  }
  return result;
}

// ------------------------------------------------------------------ ordering

PlayerOrder canonical_order(const Play& play) {
  PlayerOrder order;
  const double frames = static_cast<double>(std::max<std::size_t>(play.length(), 1));

  std::array<double, kTeamSize> ball_mean{};
  for (const Frame& f : play.frames) {
    for (int i = 0; i < kTeamSize; ++i) ball_mean[i] += distance(f.offense[i], f.ball);
  }
  for (auto& v : ball_mean) v /= frames;
  std::iota(order.offense.begin(), order.offense.end(), 0);
  std::stable_sort(order.offense.begin(), order.offense.end(),
                   [&](int a, int b) { return ball_mean[a] < ball_mean[b]; });

  std::iota(order.defense.begin(), order.defense.end(), 0);
  if (!play.has_defense()) return order;

  // mean[d][k]: defender d to the offensive player now in slot k
  std::array<std::array<double, kTeamSize>, kTeamSize> mean{};
  for (const Frame& f : play.frames) {
    for (int d = 0; d < kTeamSize; ++d) {
      for (int k = 0; k < kTeamSize; ++k) mean[d][k] += distance((*f.defense)[d], f.offense[order.offense[k]]);
    }
  }
  struct Pair {
    double dist;
    int slot;
    int defender;
  };
  std::vector<Pair> pairs;
  for (int d = 0; d < kTeamSize; ++d) {
    for (int k = 0; k < kTeamSize; ++k) pairs.push_back({mean[d][k] / frames, k, d});
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.slot != b.slot) return a.slot < b.slot;
    return a.defender < b.defender;
  });
  std::array<bool, kTeamSize> slot_used{};
  std::array<bool, kTeamSize> defender_used{};
  for (const Pair& p : pairs) {
    if (slot_used[p.slot] || defender_used[p.defender]) continue;
    slot_used[p.slot] = defender_used[p.defender] = true;
    order.defense[p.slot] = p.defender;
  }
  return order;
}

namespace {

int new_index(const PlayerOrder& order, int player) {
  for (int k = 0; k < kTeamSize; ++k) {
    if (order.offense[k] == player - 1) return k + 1;
  }
  return player;
}

}  // namespace

Play apply_order(const Play& play, const PlayerOrder& order) {
  Play out = play;
  for (auto& f : out.frames) {
    const Frame src = f;
    for (int k = 0; k < kTeamSize; ++k) {
      f.offense[k] = src.offense[order.offense[k]];
      if (f.defense) (*f.defense)[k] = (*src.defense)[order.defense[k]];
    }
    if (f.possession.is_player()) f.possession.player = new_index(order, f.possession.player);
  }
  return out;
}

EventLog apply_order(const EventLog& events, const PlayerOrder& order) {
  EventLog out = events;
  for (auto& e : out) {
    if (e.action.from > 0) e.action.from = new_index(order, e.action.from);
    if (e.action.to > 0) e.action.to = new_index(order, e.action.to);
  }
  return out;
}

Play order_players(const Play& play) { return apply_order(play, canonical_order(play)); }

}  // namespace courtsketch
