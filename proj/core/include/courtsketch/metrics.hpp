#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "courtsketch/court.hpp"
#include "courtsketch/json_io.hpp"

namespace courtsketch {

struct Entity {
  enum class Kind { Ball, Offense, Defense };
  Kind kind = Kind::Ball;
  int player = 0;  // 1-based for players

  static Entity ball() { return {Kind::Ball, 0}; }
  static Entity offense(int player) { return {Kind::Offense, player}; }
  static Entity defense(int player) { return {Kind::Defense, player}; }
};

Position entity_position(const Frame& frame, Entity entity);

/// |p_{t+1} - p_t| * fps, length t - 1.
std::vector<double> speed_series(const Play& play, Entity entity);
/// |p_{t+1} - 2 p_t + p_{t-1}| * fps^2, length t - 2.
std::vector<double> accel_series(const Play& play, Entity entity);

/// Count, mean and population variance, mergeable across batches.
class Moments {
 public:
  void add(double x);
  void merge(const Moments& other);

  [[nodiscard]] std::size_t count() const { return n_; }
  [[nodiscard]] double mean() const { return mean_; }
  [[nodiscard]] double stddev() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct MotionStats {
  Moments speed;         // ft/s
  Moments acceleration;  // ft/s^2
};

struct StatsReport {
  MotionStats ball;
  MotionStats offense;
  MotionStats defense;
  Moments ball_dribbler;  // possessed frames only
  Moments ball_defender;  // nearest defender per frame

  void merge(const StatsReport& other);
};

/// Pooled over every frame, play and player of each group.
StatsReport play_stats(std::span<const Play> plays);

Json to_json(const Moments& m);
Json to_json(const StatsReport& report);
/// Estimator definitions reported alongside the statistics.
Json metric_definitions();

struct HeatmapGrid {
  double cell_size = 1.0;
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<std::size_t> counts;  // row-major, index iy * nx + ix
  std::vector<double> speed_sum;

  [[nodiscard]] std::size_t index(std::size_t ix, std::size_t iy) const { return iy * nx + ix; }
  [[nodiscard]] std::size_t count(std::size_t ix, std::size_t iy) const { return counts[index(ix, iy)]; }
  /// Empty for cells nobody visited.
  [[nodiscard]] std::optional<double> mean_speed(std::size_t ix, std::size_t iy) const;
  [[nodiscard]] std::size_t total_count() const;
};

/// Each defender's speed over a frame step is accumulated in the cell holding
/// its position at the start of the step. Positions beyond the half court fall
/// into the nearest edge cell.
HeatmapGrid velocity_heatmap(std::span<const Play> plays, double cell_size = 1.0, const CourtSpec& court = {});

Json to_json(const HeatmapGrid& grid);
/// Mean speed grid, one line per y row; empty cells are blank.
std::string heatmap_csv(const HeatmapGrid& grid);
/// "x y mean count" blocks per row for gnuplot; empty cells are NaN.
std::string heatmap_gnuplot(const HeatmapGrid& grid);

}  // namespace courtsketch
