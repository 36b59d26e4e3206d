#pragma once

#include <span>

#include "courtsketch/court.hpp"

namespace courtsketch {

double point_segment_distance(Position p, Position a, Position b);
double polyline_length(std::span<const Position> line);

/// Angle in [0, pi] between two displacement vectors; 0 when either is shorter than `degenerate`.
double vector_angle(Position u, Position v, double degenerate = 1e-6);

/// Ramer-Douglas-Peucker. Keeps both endpoints; every dropped point lies within
/// `epsilon` of the simplified chain (distance measured to segments).
Polyline rdp_simplify(std::span<const Position> line, double epsilon);

/// Indices of the points rdp_simplify keeps.
std::vector<std::size_t> rdp_keep_indices(std::span<const Position> line, double epsilon);

/// Bezier curve with the given control polygon.
class BezierCurve {
 public:
  explicit BezierCurve(Polyline control);

  [[nodiscard]] Position at(double u) const;
  [[nodiscard]] Position derivative(double u) const;
  [[nodiscard]] double speed(double u) const { return norm(derivative(u)); }

  /// Arc length from 0 to u.
  [[nodiscard]] double arc_length(double u = 1.0) const;
  /// Parameter at which the arc length from 0 equals s.
  [[nodiscard]] double parameter_at_length(double s) const;

  [[nodiscard]] const Polyline& control() const { return control_; }

 private:
  [[nodiscard]] double integrate_speed(double a, double b) const;

  Polyline control_;
  Polyline hodograph_;
  std::vector<double> panel_length_;  // cumulative arc length at panel boundaries
};

/// n points on the Bezier curve of `control`, uniformly spaced in arc length.
/// Endpoints are the first and last control points exactly.
Polyline bezier_resample(std::span<const Position> control, std::size_t n);

}  // namespace courtsketch
