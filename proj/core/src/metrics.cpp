#include "courtsketch/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "courtsketch/errors.hpp"
#include "courtsketch/kinematics.hpp"

namespace courtsketch {

Position entity_position(const Frame& frame, Entity entity) {
  switch (entity.kind) {
    case Entity::Kind::Ball: return frame.ball;
    case Entity::Kind::Offense: return frame.offense.at(static_cast<std::size_t>(entity.player - 1));
    case Entity::Kind::Defense:
      if (!frame.defense) throw ValidationError("play has no defense");
      return frame.defense->at(static_cast<std::size_t>(entity.player - 1));
  }
  return {};
}

std::vector<double> speed_series(const Play& play, Entity entity) {
  std::vector<double> out;
  for (std::size_t t = 0; t + 1 < play.frames.size(); ++t) {
    out.push_back(frame_speed(entity_position(play.frames[t], entity), entity_position(play.frames[t + 1], entity),
                              play.fps));
  }
  return out;
}

std::vector<double> accel_series(const Play& play, Entity entity) {
  std::vector<double> out;
  for (std::size_t t = 1; t + 1 < play.frames.size(); ++t) {
    out.push_back(frame_acceleration(entity_position(play.frames[t - 1], entity),
                                     entity_position(play.frames[t], entity),
                                     entity_position(play.frames[t + 1], entity), play.fps));
  }
  return out;
}

void Moments::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void Moments::merge(const Moments& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double n = na + nb;
  const double delta = other.mean_ - mean_;
  mean_ += delta * nb / n;
  m2_ += other.m2_ + delta * delta * na * nb / n;
  n_ += other.n_;
}

double Moments::stddev() const { return n_ == 0 ? 0.0 : std::sqrt(std::max(0.0, m2_ / static_cast<double>(n_))); }

void StatsReport::merge(const StatsReport& other) {
  for (auto [a, b] : {std::pair{&ball, &other.ball}, {&offense, &other.offense}, {&defense, &other.defense}}) {
    a->speed.merge(b->speed);
    a->acceleration.merge(b->acceleration);
  }
  ball_dribbler.merge(other.ball_dribbler);
  ball_defender.merge(other.ball_defender);
}

namespace {

void add_motion(MotionStats& stats, const Play& play, Entity entity) {
  for (double v : speed_series(play, entity)) stats.speed.add(v);
  for (double a : accel_series(play, entity)) stats.acceleration.add(a);
}

}  // namespace

StatsReport play_stats(std::span<const Play> plays) {
  StatsReport report;
  for (const Play& play : plays) {
    add_motion(report.ball, play, Entity::ball());
    for (int k = 1; k <= kTeamSize; ++k) add_motion(report.offense, play, Entity::offense(k));
    if (play.has_defense()) {
      for (int k = 1; k <= kTeamSize; ++k) add_motion(report.defense, play, Entity::defense(k));
    }
    for (const Frame& f : play.frames) {
      if (f.possession.kind == Possession::Kind::Player) {
        report.ball_dribbler.add(distance(f.ball, f.offense.at(static_cast<std::size_t>(f.possession.player - 1))));
      }
      if (f.defense) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const Position& d : *f.defense) nearest = std::min(nearest, distance(f.ball, d));
        report.ball_defender.add(nearest);
      }
    }
  }
  return report;
}

Json to_json(const Moments& m) { return {{"mean", m.mean()}, {"std", m.stddev()}, {"count", m.count()}}; }

Json to_json(const StatsReport& r) {
  auto motion = [](const MotionStats& s) {
    return Json{{"speed", to_json(s.speed)}, {"acceleration", to_json(s.acceleration)}};
  };
  return {{"ball", motion(r.ball)},
          {"offense", motion(r.offense)},
          {"defense", motion(r.defense)},
          {"ball_dribbler_distance", to_json(r.ball_dribbler)},
          {"ball_defender_distance", to_json(r.ball_defender)}};
}

Json metric_definitions() {
  return {{"speed", "|p[t+1] - p[t]| * fps, ft/s"},
          {"acceleration", "|p[t+1] - 2 p[t] + p[t-1]| * fps^2, ft/s^2"},
          {"ball_dribbler_distance", "|ball - carrier| on frames with a player in possession, ft"},
          {"ball_defender_distance", "|ball - nearest defender| on every frame, ft"},
          {"std", "population standard deviation pooled over frames, players and plays"}};
}

std::optional<double> HeatmapGrid::mean_speed(std::size_t ix, std::size_t iy) const {
  const std::size_t i = index(ix, iy);
  if (counts[i] == 0) return std::nullopt;
  return speed_sum[i] / static_cast<double>(counts[i]);
}

std::size_t HeatmapGrid::total_count() const {
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  return total;
}

HeatmapGrid velocity_heatmap(std::span<const Play> plays, double cell_size, const CourtSpec& court) {
  if (!(cell_size > 0)) throw ConfigError("heatmap cell size must be positive");
  HeatmapGrid grid;
  grid.cell_size = cell_size;
  grid.nx = static_cast<std::size_t>(std::ceil(court.length_x / cell_size));
  grid.ny = static_cast<std::size_t>(std::ceil(court.width_y / cell_size));
  grid.counts.assign(grid.nx * grid.ny, 0);
  grid.speed_sum.assign(grid.nx * grid.ny, 0.0);
  auto cell = [&](double v, std::size_t n) {
    const double c = std::floor(v / cell_size);
    return static_cast<std::size_t>(std::clamp(c, 0.0, static_cast<double>(n - 1)));
  };
  for (const Play& play : plays) {
    if (!play.has_defense()) throw ValidationError("velocity heatmap needs plays with defense");
    for (int k = 1; k <= kTeamSize; ++k) {
      const Entity e = Entity::defense(k);
      const std::vector<double> speeds = speed_series(play, e);
      for (std::size_t t = 0; t < speeds.size(); ++t) {
        const Position p = entity_position(play.frames[t], e);
        const std::size_t i = grid.index(cell(p.x, grid.nx), cell(p.y, grid.ny));
        ++grid.counts[i];
        grid.speed_sum[i] += speeds[t];
      }
    }
  }
  return grid;
}

Json to_json(const HeatmapGrid& grid) {
  Json counts = Json::array();
  Json means = Json::array();
  for (std::size_t iy = 0; iy < grid.ny; ++iy) {
    Json crow = Json::array();
    Json mrow = Json::array();
    for (std::size_t ix = 0; ix < grid.nx; ++ix) {
      crow.push_back(grid.count(ix, iy));
      const auto m = grid.mean_speed(ix, iy);
      mrow.push_back(m ? Json(*m) : Json(nullptr));
    }
    counts.push_back(std::move(crow));
    means.push_back(std::move(mrow));
  }
  return {{"cell_size", grid.cell_size}, {"nx", grid.nx},         {"ny", grid.ny},
          {"counts", counts},            {"mean_speed", means}, {"total_count", grid.total_count()}};
}

std::string heatmap_csv(const HeatmapGrid& grid) {
  std::string out;
  for (std::size_t iy = 0; iy < grid.ny; ++iy) {
    for (std::size_t ix = 0; ix < grid.nx; ++ix) {
      if (ix > 0) out += ',';
      if (const auto m = grid.mean_speed(ix, iy)) out += fmt::format("{}", *m);
    }
    out += '\n';
  }
  return out;
}

std::string heatmap_gnuplot(const HeatmapGrid& grid) {
  std::string out = "# x y mean_speed count\n";
  for (std::size_t iy = 0; iy < grid.ny; ++iy) {
    for (std::size_t ix = 0; ix < grid.nx; ++ix) {
      const double x = (static_cast<double>(ix) + 0.5) * grid.cell_size;
      const double y = (static_cast<double>(iy) + 0.5) * grid.cell_size;
      const auto m = grid.mean_speed(ix, iy);
      out += fmt::format("{} {} {} {}\n", x, y, m ? fmt::format("{}", *m) : std::string("NaN"), grid.count(ix, iy));
    }
    out += '\n';
  }
  return out;
}

}  // namespace courtsketch
