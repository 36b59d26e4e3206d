#pragma once

#include <span>

#include "courtsketch/court.hpp"

namespace courtsketch {

/// Per-frame positions of one player over a phase of `frames` frames.
/// The opening phase covers the path's first point as its frame 0. Later
/// phases start from the previous frame's position, so the path is resampled
/// to frames + 1 points and the shared first point is dropped.
Polyline phase_track(std::span<const Position> control, std::size_t frames, bool opening);

/// Ball positions implied by possession: glued to the carrier while held,
/// straight-line flight between the release anchor (last held frame) and the
/// catch anchor (next held frame). A run containing HOOP frames flies to the
/// hoop, arriving `shot_flight_frames` frames after the last held frame.
std::vector<Position> ball_track(std::span<const Lineup> offense, std::span<const Possession> possession,
                                 Position hoop, std::size_t shot_flight_frames, Position release_fallback);

}  // namespace courtsketch
