#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "courtsketch/geometry.hpp"

using namespace courtsketch;

namespace {

Polyline wobbly(std::size_t n) {
  std::mt19937_64 rng(n);
  std::normal_distribution<double> jitter(0.0, 0.3);
  Polyline line;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(n);
    line.push_back({40.0 * s + jitter(rng), 25.0 + 10.0 * std::sin(6.0 * s) + jitter(rng)});
  }
  return line;
}

void BM_Rdp(benchmark::State& state) {
  const Polyline line = wobbly(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(rdp_simplify(line, 1.5));
}
BENCHMARK(BM_Rdp)->Arg(12)->Arg(250)->Arg(5000);

void BM_BezierResample(benchmark::State& state) {
  const Polyline control = wobbly(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(bezier_resample(control, 50));
}
BENCHMARK(BM_BezierResample)->Arg(3)->Arg(8);

}  // namespace
