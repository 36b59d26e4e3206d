#pragma once

// Independent reference implementations used by the unit and acceptance
// suites. None of them call into the library code they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <utility>
#include <vector>

#include "courtsketch/court.hpp"

namespace oracle {

using courtsketch::Position;

inline double segment_distance(Position p, Position a, Position b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double s = 0.0;
  if (len2 > 0.0) s = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
  return std::hypot(p.x - (a.x + s * dx), p.y - (a.y + s * dy));
}

/// Keep-set by exhaustive tabulation: the farthest interior point of every
/// index pair is precomputed (O(n^3)), then intervals are split from a
/// worklist ordered by decreasing span until each is within epsilon.
inline std::vector<std::size_t> rdp_keep_set(const std::vector<Position>& pts, double epsilon) {
  const std::size_t n = pts.size();
  if (n <= 2) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  std::vector<std::vector<std::size_t>> far(n, std::vector<std::size_t>(n, 0));
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, -1.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      for (std::size_t k = i + 1; k < j; ++k) {
        const double d = segment_distance(pts[k], pts[i], pts[j]);
        if (d > dist[i][j]) {
          dist[i][j] = d;
          far[i][j] = k;
        }
      }
    }
  }
  std::vector<bool> keep(n, false);
  keep.front() = keep.back() = true;
  std::vector<std::pair<std::size_t, std::size_t>> work{{0, n - 1}};
  while (!work.empty()) {
    std::sort(work.begin(), work.end(),
              [](const auto& a, const auto& b) { return a.second - a.first < b.second - b.first; });
    const auto [i, j] = work.back();
    work.pop_back();
    if (j < i + 2 || !(dist[i][j] > epsilon)) continue;
    const std::size_t k = far[i][j];
    keep[k] = true;
    work.emplace_back(i, k);
    work.emplace_back(k, j);
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) out.push_back(i);
  }
  return out;
}

inline Position de_casteljau(std::vector<Position> pts, double u) {
  for (std::size_t level = pts.size(); level-- > 1;) {
    for (std::size_t i = 0; i < level; ++i) {
      pts[i] = {(1.0 - u) * pts[i].x + u * pts[i + 1].x, (1.0 - u) * pts[i].y + u * pts[i + 1].y};
    }
  }
  return pts.front();
}

/// Arc length of a Bezier curve approximated by a dense chord polyline.
class DenseArcLength {
 public:
  explicit DenseArcLength(const std::vector<Position>& control, std::size_t samples = 100000) {
    points_.reserve(samples + 1);
    cumulative_.reserve(samples + 1);
    for (std::size_t i = 0; i <= samples; ++i) {
      points_.push_back(de_casteljau(control, static_cast<double>(i) / static_cast<double>(samples)));
      cumulative_.push_back(i == 0 ? 0.0 : cumulative_.back() + courtsketch::distance(points_[i], points_[i - 1]));
    }
  }

  [[nodiscard]] double total() const { return cumulative_.back(); }

  /// Point at arc length s, interpolated along the dense polyline.
  [[nodiscard]] Position at_length(double s) const {
    const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), s);
    if (it == cumulative_.begin()) return points_.front();
    if (it == cumulative_.end()) return points_.back();
    const std::size_t i = static_cast<std::size_t>(it - cumulative_.begin());
    const double span = cumulative_[i] - cumulative_[i - 1];
    const double w = span > 0 ? (s - cumulative_[i - 1]) / span : 0.0;
    return courtsketch::lerp(points_[i - 1], points_[i], w);
  }

  /// Arc length at the dense sample nearest to p.
  [[nodiscard]] double length_at(Position p) const {
    std::size_t best = 0;
    double best_d = courtsketch::distance(points_[0], p);
    for (std::size_t i = 1; i < points_.size(); ++i) {
      const double d = courtsketch::distance(points_[i], p);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return cumulative_[best];
  }

 private:
  std::vector<Position> points_;
  std::vector<double> cumulative_;
};

/// Two-pass mean and population standard deviation.
struct Moments {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};

inline Moments moments(const std::vector<double>& xs) {
  Moments m;
  m.count = xs.size();
  if (xs.empty()) return m;
  double sum = 0.0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  double sq = 0.0;
  for (double x : xs) sq += (x - m.mean) * (x - m.mean);
  m.stddev = std::sqrt(sq / static_cast<double>(xs.size()));
  return m;
}

inline std::vector<Position> random_polyline(std::mt19937_64& rng, std::size_t max_points) {
  std::uniform_int_distribution<std::size_t> count(2, max_points);
  std::uniform_real_distribution<double> coord(0.0, 20.0);
  std::vector<Position> pts(count(rng));
  for (auto& p : pts) p = {coord(rng), coord(rng)};
  return pts;
}

}  // namespace oracle
