#include <benchmark/benchmark.h>

#include <random>

#include "courtsketch/losses.hpp"
#include "courtsketch/nn.hpp"

using namespace courtsketch;

namespace {

ModelConfig config_for(int channels) {
  ModelConfig c;
  c.channels = channels;
  return c;
}

Matrix uniform(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

void BM_Conv(benchmark::State& state) {
  const Index channels = state.range(0);
  const Index frames = 50 * 32;
  Conv1d conv;
  conv.weight = uniform(channels, 5 * channels, 1);
  conv.bias = Matrix::Zero(channels, 1);
  conv.kernel = 5;
  const Matrix x = uniform(channels, frames, 2);
  for (auto _ : state) benchmark::DoNotOptimize(conv_forward(conv, x, 50));
}
BENCHMARK(BM_Conv)->Arg(16)->Arg(64);

void BM_GeneratorForward(benchmark::State& state) {
  const ModelConfig cfg = config_for(static_cast<int>(state.range(0)));
  const ModelParams params = xavier_init(cfg, 1);
  const Index batch = 32;
  const Matrix noise = uniform(cfg.z_dim, batch, 3);
  const Matrix condition = uniform(18, batch * cfg.t, 4);
  for (auto _ : state) benchmark::DoNotOptimize(generator_forward_batch(noise, condition, cfg.t, params.generator));
}
BENCHMARK(BM_GeneratorForward)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_CriticForward(benchmark::State& state) {
  const ModelConfig cfg = config_for(static_cast<int>(state.range(0)));
  const ModelParams params = xavier_init(cfg, 1);
  const Matrix pairs = uniform(46, 32 * cfg.t, 5);
  for (auto _ : state) benchmark::DoNotOptimize(critic_forward_batch(pairs, cfg.t, params.critic));
}
BENCHMARK(BM_CriticForward)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_CriticObjective(benchmark::State& state) {
  const ModelConfig cfg = config_for(64);
  const ModelParams params = xavier_init(cfg, 1);
  const Matrix condition = uniform(18, 32 * cfg.t, 6);
  const Matrix real = uniform(28, 32 * cfg.t, 7);
  const Matrix fake = uniform(28, 32 * cfg.t, 8);
  const std::vector<double> eps(32, 0.5);
  const BatchView batch{condition, real, cfg.t};
  for (auto _ : state) {
    CriticParams grad = params.critic.zeros_like();
    benchmark::DoNotOptimize(critic_objective(params.critic, batch, fake, 10.0, eps, &grad));
  }
}
BENCHMARK(BM_CriticObjective)->Unit(benchmark::kMillisecond);

}  // namespace
