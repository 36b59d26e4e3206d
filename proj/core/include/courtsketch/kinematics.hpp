#pragma once

#include "courtsketch/court.hpp"

namespace courtsketch {

/// Speed in ft/s between consecutive frames.
inline double frame_speed(Position p0, Position p1, double fps) { return distance(p1, p0) * fps; }

/// Acceleration magnitude |p_next - 2 p + p_prev| * fps^2, the integrand of
/// both the acceleration loss and the reported acceleration statistics.
inline double frame_acceleration(Position prev, Position cur, Position next, double fps) {
  return norm(Position{next.x - 2.0 * cur.x + prev.x, next.y - 2.0 * cur.y + prev.y}) * fps * fps;
}

}  // namespace courtsketch
