#include "courtsketch/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "courtsketch/errors.hpp"

namespace courtsketch {

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(const ScalarFunction& f, const Vector& analytic, const Vector& point, double h,
                           std::span<const Index> coordinates, const BranchSignature& signature, double floor) {
  if (!(h > 0.0)) throw ConfigError("grad_check step must be positive");
  if (analytic.size() != point.size()) throw ShapeError("grad_check: gradient and point sizes differ");

  std::vector<Index> all;
  if (coordinates.empty()) {
    all.resize(static_cast<std::size_t>(point.size()));
    std::iota(all.begin(), all.end(), Index{0});
    coordinates = all;
  }
  const auto base = signature ? signature(point) : std::vector<std::uint8_t>{};

  GradCheckReport report;
  Vector probe = point;
  for (Index i : coordinates) {
    probe(i) = point(i) + h;
    const double up = f(probe);
    const bool up_smooth = !signature || signature(probe) == base;
    probe(i) = point(i) - h;
    const double down = f(probe);
    const bool down_smooth = !signature || signature(probe) == base;
    probe(i) = point(i);
    if (!up_smooth || !down_smooth) {
      ++report.skipped;
      continue;
    }
    const double numeric = (up - down) / (2.0 * h);
    const double err = relative_error(analytic(i), numeric, floor);
    ++report.checked;
    if (report.worst_coordinate < 0 || err > report.max_relative_error) {
      report.max_relative_error = err;
      report.worst_coordinate = i;
    }
  }
  return report;
}

std::vector<Index> sample_coordinates(Index size, std::size_t count, std::mt19937_64& rng) {
  std::vector<Index> all(static_cast<std::size_t>(size));
  std::iota(all.begin(), all.end(), Index{0});
  if (count >= all.size()) return all;
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

Vector flatten(const ConstNamedTensors& tensors) {
  Index total = 0;
  for (const auto& [name, m] : tensors) total += m->size();
  Vector out(total);
  Index offset = 0;
  for (const auto& [name, m] : tensors) {
    out.segment(offset, m->size()) = m->reshaped();
    offset += m->size();
  }
  return out;
}

void unflatten(const Vector& values, const NamedTensors& tensors) {
  Index offset = 0;
  for (const auto& [name, m] : tensors) {
    m->reshaped() = values.segment(offset, m->size());
    offset += m->size();
  }
  if (offset != values.size()) throw ShapeError("unflatten: size mismatch");
}

namespace {

template <class Tape>
std::vector<std::uint8_t> trunk_signature(const Tape& tape) {
  std::vector<std::uint8_t> out;
  auto push = [&](const Matrix& m) {
    for (Index i = 0; i < m.size(); ++i) out.push_back(m.data()[i] > 0.0 ? 1 : 0);
  };
  for (const auto& h : tape.hidden) push(h);
  for (const auto& m : tape.middle) push(m);
  return out;
}

}  // namespace

std::vector<std::uint8_t> relu_signature(const GeneratorTape& tape) { return trunk_signature(tape); }
std::vector<std::uint8_t> relu_signature(const CriticTape& tape) { return trunk_signature(tape); }

}  // namespace courtsketch
