#include "courtsketch/geometry.hpp"

#include <algorithm>
#include <array>
#include <numbers>

#include "courtsketch/errors.hpp"

namespace courtsketch {

double point_segment_distance(Position p, Position a, Position b) {
  const Position ab = b - a;
  const double len2 = ab.x * ab.x + ab.y * ab.y;
  if (len2 == 0.0) return distance(p, a);
  const double s = std::clamp(((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2, 0.0, 1.0);
  return distance(p, lerp(a, b, s));
}

double polyline_length(std::span<const Position> line) {
  double total = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) total += distance(line[i - 1], line[i]);
  return total;
}

double vector_angle(Position u, Position v, double degenerate) {
  if (norm(u) < degenerate || norm(v) < degenerate) return 0.0;
  const double cross = u.x * v.y - u.y * v.x;
  const double dot = u.x * v.x + u.y * v.y;
  return std::atan2(std::abs(cross), dot);
}

namespace {

void rdp_recurse(std::span<const Position> line, std::size_t first, std::size_t last, double epsilon,
                 std::vector<char>& keep) {
  if (last <= first + 1) return;
  double worst = -1.0;
  std::size_t index = first;
  for (std::size_t i = first + 1; i < last; ++i) {
    const double d = point_segment_distance(line[i], line[first], line[last]);
    if (d > worst) {
      worst = d;
      index = i;
    }
  }
  if (worst > epsilon) {
    keep[index] = 1;
    rdp_recurse(line, first, index, epsilon, keep);
    rdp_recurse(line, index, last, epsilon, keep);
  }
}

}  // namespace

std::vector<std::size_t> rdp_keep_indices(std::span<const Position> line, double epsilon) {
  if (epsilon < 0.0) throw ConfigError("rdp epsilon must be non-negative");
  std::vector<std::size_t> out;
  if (line.empty()) return out;
  std::vector<char> keep(line.size(), 0);
  keep.front() = keep.back() = 1;
  if (epsilon == 0.0) {
    std::fill(keep.begin(), keep.end(), 1);
  } else {
    rdp_recurse(line, 0, line.size() - 1, epsilon, keep);
  }
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (keep[i]) out.push_back(i);
  }
  return out;
}

Polyline rdp_simplify(std::span<const Position> line, double epsilon) {
  Polyline out;
  for (auto i : rdp_keep_indices(line, epsilon)) out.push_back(line[i]);
  return out;
}

namespace {

constexpr int kPanels = 32;

// 10-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr std::array<double, 5> kGaussNodes = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                                               0.8650633666889845, 0.9739065285171717};
constexpr std::array<double, 5> kGaussWeights = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                                                 0.1494513491505806, 0.0666713443086881};

Position de_casteljau(const Polyline& pts, double u) {
  if (pts.size() == 1) return pts.front();
  Polyline work = pts;
  for (std::size_t level = work.size() - 1; level > 0; --level) {
    for (std::size_t i = 0; i < level; ++i) work[i] = lerp(work[i], work[i + 1], u);
  }
  return work.front();
}

}  // namespace

BezierCurve::BezierCurve(Polyline control) : control_(std::move(control)) {
  if (control_.empty()) throw ConfigError("bezier curve needs at least one control point");
  const double degree = static_cast<double>(control_.size() - 1);
  for (std::size_t i = 0; i + 1 < control_.size(); ++i) hodograph_.push_back(degree * (control_[i + 1] - control_[i]));
  panel_length_.assign(kPanels + 1, 0.0);
  for (int k = 0; k < kPanels; ++k) {
    const double a = static_cast<double>(k) / kPanels;
    const double b = static_cast<double>(k + 1) / kPanels;
    panel_length_[k + 1] = panel_length_[k] + integrate_speed(a, b);
  }
}

Position BezierCurve::at(double u) const { return de_casteljau(control_, u); }

Position BezierCurve::derivative(double u) const {
  if (hodograph_.empty()) return {};
  return de_casteljau(hodograph_, u);
}

double BezierCurve::integrate_speed(double a, double b) const {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < kGaussNodes.size(); ++i) {
    sum += kGaussWeights[i] * (speed(mid - half * kGaussNodes[i]) + speed(mid + half * kGaussNodes[i]));
  }
  return sum * half;
}

double BezierCurve::arc_length(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  const int k = std::min(static_cast<int>(u * kPanels), kPanels - 1);
  const double a = static_cast<double>(k) / kPanels;
  return panel_length_[k] + integrate_speed(a, u);
}

double BezierCurve::parameter_at_length(double s) const {
  const double total = panel_length_.back();
  if (s <= 0.0) return 0.0;
  if (s >= total) return 1.0;
  const auto it = std::upper_bound(panel_length_.begin(), panel_length_.end(), s);
  const int k = static_cast<int>(std::distance(panel_length_.begin(), it)) - 1;
  double lo = static_cast<double>(k) / kPanels;
  double hi = static_cast<double>(k + 1) / kPanels;
  const double base = panel_length_[k];
  const double panel_start = lo;

  // Newton on the monotone arc-length function, falling back to bisection
  // whenever a step leaves the bracket.
  double u = lo + (hi - lo) * (s - base) / std::max(panel_length_[k + 1] - base, 1e-300);
  for (int iter = 0; iter < 100; ++iter) {
    const double f = base + integrate_speed(panel_start, u) - s;
    if (std::abs(f) < 1e-13 * std::max(1.0, total)) break;
    if (f > 0.0) {
      hi = u;
    } else {
      lo = u;
    }
    const double v = speed(u);
    double next = v > 0.0 ? u - f / v : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo < 1e-15) break;
    u = next;
  }
  return u;
}

Polyline bezier_resample(std::span<const Position> control, std::size_t n) {
  if (n < 2) throw ConfigError("bezier_resample needs n >= 2");
  if (control.size() < 2) throw ConfigError("bezier_resample needs at least 2 control points");

  Polyline out(n, control.front());
  const BezierCurve curve(Polyline(control.begin(), control.end()));
  const double total = curve.arc_length();
  if (total > 0.0) {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double s = total * static_cast<double>(i) / static_cast<double>(n - 1);
      out[i] = curve.at(curve.parameter_at_length(s));
    }
  }
  out.back() = total > 0.0 ? control.back() : control.front();
  return out;
}

}  // namespace courtsketch
