#include "courtsketch/court.hpp"

#include <fmt/format.h>

#include "courtsketch/errors.hpp"

namespace courtsketch {

void CourtSpec::validate() const {
  if (!(length_x > 0.0) || !(width_y > 0.0)) {
    throw ConfigError("court dimensions must be positive");
  }
  if (!(hoop.x > 0.0 && hoop.x < length_x && hoop.y > 0.0 && hoop.y < width_y)) {
    throw ConfigError("hoop must lie strictly inside the court");
  }
  if (!(margin >= 0.0)) throw ConfigError("court margin must be non-negative");
}

bool CourtSpec::in_bounds(Position p) const {
  return std::isfinite(p.x) && std::isfinite(p.y) && p.x >= -margin && p.x <= length_x + margin &&
         p.y >= -margin && p.y <= width_y + margin;
}

bool Play::has_defense() const {
  return !frames.empty() && frames.front().defense.has_value();
}

std::vector<std::string> validate_play(const Play& play, const CourtSpec& court) {
  std::vector<std::string> errors;
  if (!(play.fps > 0.0)) errors.push_back(fmt::format("fps must be positive, got {}", play.fps));
  if (play.frames.size() < 2) errors.push_back(fmt::format("play needs at least 2 frames, got {}", play.frames.size()));

  const bool defended = play.has_defense();
  auto check = [&](Position p, std::size_t t, const char* what, int index) {
    if (!court.in_bounds(p)) {
      errors.push_back(fmt::format("frame {}: {}{} at ({}, {}) outside court margin", t, what,
                                   index > 0 ? fmt::format(" {}", index) : std::string{}, p.x, p.y));
    }
  };
  for (std::size_t t = 0; t < play.frames.size(); ++t) {
    const Frame& f = play.frames[t];
    check(f.ball, t, "ball", 0);
    for (int i = 0; i < kTeamSize; ++i) check(f.offense[i], t, "offense", i + 1);
    if (f.defense.has_value() != defended) {
      errors.push_back(fmt::format("frame {}: defense presence differs from frame 0", t));
    } else if (defended) {
      for (int i = 0; i < kTeamSize; ++i) check((*f.defense)[i], t, "defense", i + 1);
    }
    if (f.possession.is_player() && (f.possession.player < 1 || f.possession.player > kTeamSize)) {
      errors.push_back(fmt::format("frame {}: possession player {} out of range", t, f.possession.player));
    }
  }
  return errors;
}

const Polyline* Phase::path_for(int player) const {
  for (const auto& [index, line] : paths) {
    if (index == player) return &line;
  }
  return nullptr;
}

}  // namespace courtsketch
