#include "courtsketch/trajectory.hpp"

#include "courtsketch/errors.hpp"
#include "courtsketch/geometry.hpp"

namespace courtsketch {

Polyline phase_track(std::span<const Position> control, std::size_t frames, bool opening) {
  if (frames == 0) return {};
  if (control.empty()) throw ConfigError("phase_track needs a control polygon");
  if (control.size() == 1) return Polyline(frames, control.front());
  if (opening) {
    if (frames == 1) return {control.front()};
    return bezier_resample(control, frames);
  }
  Polyline samples = bezier_resample(control, frames + 1);
  samples.erase(samples.begin());
  return samples;
}

std::vector<Position> ball_track(std::span<const Lineup> offense, std::span<const Possession> possession,
                                 Position hoop, std::size_t shot_flight_frames, Position release_fallback) {
  const std::size_t n = offense.size();
  if (possession.size() != n) throw ShapeError("ball_track: possession and offense lengths differ");
  std::vector<Position> ball(n);
  std::size_t t = 0;
  while (t < n) {
    if (possession[t].is_player()) {
      ball[t] = offense[t][possession[t].player - 1];
      ++t;
      continue;
    }
    const std::size_t run_start = t;
    bool to_hoop = false;
    while (t < n && !possession[t].is_player()) {
      to_hoop = to_hoop || possession[t].kind == Possession::Kind::Hoop;
      ++t;
    }
    const std::size_t run_end = t;  // exclusive

    const Position from = run_start > 0 ? ball[run_start - 1] : release_fallback;
    const double anchor = static_cast<double>(run_start) - 1.0;
    Position to = from;
    double arrival = anchor + 1.0;
    if (to_hoop) {
      to = hoop;
      arrival = static_cast<double>(run_start + shot_flight_frames);
    } else if (run_end < n) {
      to = offense[run_end][possession[run_end].player - 1];
      arrival = static_cast<double>(run_end);
    }
    for (std::size_t f = run_start; f < run_end; ++f) {
      const double s = std::min(1.0, (static_cast<double>(f) - anchor) / (arrival - anchor));
      ball[f] = s >= 1.0 ? to : lerp(from, to, s);
    }
  }
  return ball;
}

}  // namespace courtsketch
