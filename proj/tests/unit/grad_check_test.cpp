#include <doctest.h>

#include <random>

#include "courtsketch/errors.hpp"
#include "courtsketch/grad_check.hpp"
#include "courtsketch/losses.hpp"
#include "courtsketch/nn.hpp"

using namespace courtsketch;

namespace {

constexpr double kStep = 1e-5;
constexpr double kTolerance = 1e-4;

ModelConfig small_config() {
  ModelConfig c;
  c.channels = 6;
  c.residual_blocks = 2;
  c.kernel = 3;
  c.z_dim = 4;
  c.t = 6;
  return c;
}

struct Fixture {
  ModelConfig config = small_config();
  ModelParams params;
  Index batch = 2;
  Matrix condition;
  Matrix real;
  Matrix noise;
  std::vector<double> eps{0.35, 0.8};

  explicit Fixture(std::uint64_t seed) : params(xavier_init(config, seed)) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    std::normal_distribution<double> n(0.0, 1.0);
    condition.resize(18, batch * config.t);
    real.resize(28, batch * config.t);
    noise.resize(config.z_dim, batch);
    for (Index i = 0; i < condition.size(); ++i) condition.data()[i] = u(rng);
    for (Index i = 0; i < real.size(); ++i) real.data()[i] = u(rng);
    for (Index i = 0; i < noise.size(); ++i) noise.data()[i] = n(rng);
    real.bottomRows(6) *= 0.2;
  }

  [[nodiscard]] BatchView view() const { return {condition, real, config.t}; }

  [[nodiscard]] Matrix pairs(const Matrix& play) const {
    Matrix p(46, play.cols());
    p.topRows(18) = condition;
    p.bottomRows(28) = play;
    return p;
  }

  [[nodiscard]] Matrix mixed(const Matrix& fake) const {
    Matrix m(28, real.cols());
    for (Index b = 0; b < batch; ++b) {
      const double e = eps[static_cast<std::size_t>(b)];
      m.middleCols(b * config.t, config.t) =
          e * real.middleCols(b * config.t, config.t) + (1.0 - e) * fake.middleCols(b * config.t, config.t);
    }
    return m;
  }

  [[nodiscard]] std::vector<std::uint8_t> critic_signature(const CriticParams& critic, const Matrix& play) const {
    CriticTape tape;
    critic_forward_batch(pairs(play), config.t, critic, &tape);
    return relu_signature(tape);
  }
};

template <class Params>
Params with_values(const Params& base, const Vector& v) {
  Params p = base;
  unflatten(v, named_tensors(p));
  return p;
}

}  // namespace

TEST_CASE("relative error") {
  CHECK(relative_error(1.0, 1.0, 1e-6) == 0.0);
  CHECK(relative_error(2.0, 1.0, 1e-6) == doctest::Approx(0.5));
  CHECK(relative_error(1e-9, 0.0, 1e-6) == doctest::Approx(1e-3));
}

TEST_CASE("quadratics are checked exactly") {
  Matrix a(3, 3);
  a << 4, 1, 0, 1, 3, -1, 0, -1, 2;
  const Vector b = Vector::LinSpaced(3, -1.0, 1.0);
  const auto f = [&](const Vector& x) { return 0.5 * x.dot(a * x) + b.dot(x); };
  const Vector x = Vector::LinSpaced(3, 0.2, 1.7);
  const GradCheckReport r = grad_check(f, a * x + b, x, 1e-3);
  CHECK(r.checked == 3);
  CHECK(r.max_relative_error < 1e-10);

  const Vector wrong = a * x + b + Vector::Constant(3, 0.1);
  CHECK(grad_check(f, wrong, x, 1e-3).max_relative_error > 1e-3);
  CHECK_THROWS_AS(grad_check(f, a * x + b, x, 0.0), ConfigError);
}

TEST_CASE("probes that cross a kink are skipped") {
  const auto f = [](const Vector& x) { return std::abs(x(0)) + x(1) * x(1); };
  const auto sig = [](const Vector& x) { return std::vector<std::uint8_t>{static_cast<std::uint8_t>(x(0) > 0.0)}; };
  Vector x(2);
  x << 1e-7, 2.0;
  Vector g(2);
  g << 1.0, 4.0;
  const GradCheckReport r = grad_check(f, g, x, 1e-5, {}, sig);
  CHECK(r.skipped == 1);
  CHECK(r.checked == 1);
  CHECK(r.max_relative_error < 1e-8);
}

TEST_CASE("sample_coordinates draws distinct sorted indices") {
  std::mt19937_64 rng(1);
  const auto c = sample_coordinates(100, 10, rng);
  CHECK(c.size() == 10);
  CHECK(std::is_sorted(c.begin(), c.end()));
  CHECK(std::adjacent_find(c.begin(), c.end()) == c.end());
  CHECK(sample_coordinates(5, 10, rng).size() == 5);
}

TEST_CASE("flatten and unflatten round trip") {
  ModelParams p = xavier_init(small_config(), 3);
  const Vector v = flatten(named_tensors(std::as_const(p.generator)));
  GeneratorParams q = p.generator.zeros_like();
  unflatten(v, named_tensors(q));
  CHECK(flatten(named_tensors(std::as_const(q))) == v);
  CHECK_THROWS_AS(unflatten(Vector::Zero(3), named_tensors(q)), ShapeError);
}

TEST_CASE("generator parameter gradients of the summed output") {
  const Fixture fx(11);
  const GeneratorParams& gen = fx.params.generator;
  GeneratorTape tape;
  const Matrix out = generator_forward_batch(fx.noise, fx.condition, fx.config.t, gen, &tape);
  GeneratorParams grad = gen.zeros_like();
  generator_backward_batch(tape, gen, Matrix::Ones(out.rows(), out.cols()), grad);

  const Vector point = flatten(named_tensors(gen));
  const auto f = [&](const Vector& v) {
    return (generator_forward_batch(fx.noise, fx.condition, fx.config.t, with_values(gen, v)) - out).sum();
  };
  const auto sig = [&](const Vector& v) {
    GeneratorTape t;
    generator_forward_batch(fx.noise, fx.condition, fx.config.t, with_values(gen, v), &t);
    return relu_signature(t);
  };
  const Vector analytic = flatten(named_tensors(std::as_const(grad)));
  const GradCheckReport r = grad_check(f, analytic, point, kStep, {}, sig);
  INFO("worst coordinate ", r.worst_coordinate, " analytic ", analytic(r.worst_coordinate));
  CHECK(r.checked > point.size() / 2);
  CHECK(r.max_relative_error < kTolerance);
}

TEST_CASE("critic parameter gradients of the critic objective") {
  const Fixture fx(12);
  const CriticParams& critic = fx.params.critic;
  const Matrix fake = generator_forward_batch(fx.noise, fx.condition, fx.config.t, fx.params.generator);
  CriticParams grad = critic.zeros_like();
  critic_objective(critic, fx.view(), fake, 10.0, fx.eps, &grad);

  const Vector point = flatten(named_tensors(critic));
  const auto f = [&](const Vector& v) {
    return critic_objective(with_values(critic, v), fx.view(), fake, 10.0, fx.eps, nullptr).loss;
  };
  const auto sig = [&](const Vector& v) {
    const CriticParams c = with_values(critic, v);
    auto s = fx.critic_signature(c, fx.real);
    const auto a = fx.critic_signature(c, fake);
    const auto m = fx.critic_signature(c, fx.mixed(fake));
    s.insert(s.end(), a.begin(), a.end());
    s.insert(s.end(), m.begin(), m.end());
    return s;
  };
  const GradCheckReport r = grad_check(f, flatten(named_tensors(std::as_const(grad))), point, kStep, {}, sig);
  CHECK(r.checked > point.size() / 2);
  CHECK(r.max_relative_error < kTolerance);
}

TEST_CASE("gradient penalty parameter gradient on its own") {
  const Fixture fx(13);
  const CriticParams& critic = fx.params.critic;
  const Matrix fake = generator_forward_batch(fx.noise, fx.condition, fx.config.t, fx.params.generator);
  CriticParams grad = critic.zeros_like();
  const double penalty = critic_gradient_penalty(critic, fx.view(), fake, 10.0, fx.eps, &grad);
  CHECK(penalty >= 0.0);

  const Vector point = flatten(named_tensors(critic));
  const auto f = [&](const Vector& v) {
    return critic_gradient_penalty(with_values(critic, v), fx.view(), fake, 10.0, fx.eps, nullptr);
  };
  const auto sig = [&](const Vector& v) { return fx.critic_signature(with_values(critic, v), fx.mixed(fake)); };
  const GradCheckReport r = grad_check(f, flatten(named_tensors(std::as_const(grad))), point, kStep, {}, sig);
  CHECK(r.max_relative_error < kTolerance);
}

TEST_CASE("composite loss gradient with respect to the generated batch") {
  const Fixture fx(14);
  const CriticParams& critic = fx.params.critic;
  const Matrix fake = generator_forward_batch(fx.noise, fx.condition, fx.config.t, fx.params.generator);
  GeneratorObjectiveOptions opts;
  opts.frozen_w = composite_on_batch(critic, fx.view(), fake, opts, nullptr).w;
  Matrix d_fake;
  composite_on_batch(critic, fx.view(), fake, opts, &d_fake);

  const Vector point = fake.reshaped();
  const auto f = [&](const Vector& v) {
    return composite_on_batch(critic, fx.view(), v.reshaped(28, fake.cols()), opts, nullptr).composite;
  };
  const auto sig = [&](const Vector& v) { return fx.critic_signature(critic, v.reshaped(28, fake.cols())); };
  const GradCheckReport r = grad_check(f, d_fake.reshaped(), point, kStep, {}, sig);
  CHECK(r.checked > point.size() / 2);
  CHECK(r.max_relative_error < kTolerance);
}

TEST_CASE("generator parameter gradients of the composite objective") {
  const Fixture fx(15);
  const GeneratorParams& gen = fx.params.generator;
  const CriticParams& critic = fx.params.critic;
  GeneratorObjectiveOptions opts;
  opts.frozen_w = generator_objective(gen, critic, fx.noise, fx.view(), opts, nullptr).w;
  GeneratorParams grad = gen.zeros_like();
  generator_objective(gen, critic, fx.noise, fx.view(), opts, &grad);

  const Vector point = flatten(named_tensors(gen));
  const auto f = [&](const Vector& v) {
    return generator_objective(with_values(gen, v), critic, fx.noise, fx.view(), opts, nullptr).composite;
  };
  const auto sig = [&](const Vector& v) {
    const GeneratorParams g = with_values(gen, v);
    GeneratorTape t;
    const Matrix out = generator_forward_batch(fx.noise, fx.condition, fx.config.t, g, &t);
    auto s = relu_signature(t);
    const auto c = fx.critic_signature(critic, out);
    s.insert(s.end(), c.begin(), c.end());
    return s;
  };
  std::mt19937_64 rng(15);
  const auto coords = sample_coordinates(point.size(), 300, rng);
  const GradCheckReport r = grad_check(f, flatten(named_tensors(std::as_const(grad))), point, kStep, coords, sig);
  CHECK(r.checked > 150);
  CHECK(r.max_relative_error < kTolerance);
}
