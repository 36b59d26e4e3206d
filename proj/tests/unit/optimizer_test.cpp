#include <doctest.h>

#include <limits>

#include "courtsketch/errors.hpp"
#include "courtsketch/optimizer.hpp"

using namespace courtsketch;

namespace {

struct Scalar {
  Matrix value = Matrix::Zero(1, 1);
  Matrix grad = Matrix::Zero(1, 1);
  [[nodiscard]] NamedTensors params() { return {{"w", &value}}; }
  [[nodiscard]] ConstNamedTensors grads() const { return {{"w", &grad}}; }
};

}  // namespace

TEST_CASE("zero gradients leave parameters unchanged") {
  Scalar s;
  s.value(0, 0) = 1.25;
  AdamState state = make_adam_state({{"w", &s.value}});
  for (int i = 0; i < 5; ++i) CHECK(adam_step(s.params(), s.grads(), state, {}));
  CHECK(s.value(0, 0) == 1.25);
  CHECK(state.step == 5);
}

TEST_CASE("the first bias-corrected step moves by the learning rate") {
  Scalar s;
  s.grad(0, 0) = 1.0;
  AdamState state = make_adam_state({{"w", &s.value}});
  const AdamConfig cfg;
  REQUIRE(adam_step(s.params(), s.grads(), state, cfg));
  CHECK(s.value(0, 0) == doctest::Approx(-cfg.learning_rate * 1.0 / (1.0 + cfg.epsilon)).epsilon(1e-12));
  CHECK(state.first_moment[0](0, 0) == doctest::Approx(0.5));
  CHECK(state.second_moment[0](0, 0) == doctest::Approx(0.1));
}

TEST_CASE("adam matches a hand-rolled update sequence") {
  Scalar s;
  AdamState state = make_adam_state({{"w", &s.value}});
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  double x = 0.0;
  double m = 0.0;
  double v = 0.0;
  for (int t = 1; t <= 20; ++t) {
    const double g = 2.0 * (x - 3.0);
    s.grad(0, 0) = g;
    adam_step(s.params(), s.grads(), state, cfg);
    m = cfg.beta1 * m + (1 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1 - cfg.beta2) * g * g;
    x -= cfg.learning_rate * (m / (1 - std::pow(cfg.beta1, t))) / (std::sqrt(v / (1 - std::pow(cfg.beta2, t))) + cfg.epsilon);
    CHECK(s.value(0, 0) == doctest::Approx(x).epsilon(1e-12));
  }
}

TEST_CASE("identical runs follow identical trajectories") {
  auto run = [] {
    Matrix w = Matrix::Constant(2, 3, 0.5);
    Matrix g(2, 3);
    AdamState state = make_adam_state({{"w", &w}});
    for (int t = 0; t < 30; ++t) {
      g = (w.array() * w.array() - 0.1 * t).matrix();
      adam_step({{"w", &w}}, {{"w", &g}}, state, {});
    }
    return w;
  };
  CHECK(run() == run());
}

TEST_CASE("non-finite gradients skip the step") {
  Scalar s;
  s.value(0, 0) = 2.0;
  s.grad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  AdamState state = make_adam_state({{"w", &s.value}});
  CHECK_FALSE(adam_step(s.params(), s.grads(), state, {}));
  CHECK(s.value(0, 0) == 2.0);
  CHECK(state.step == 0);
  CHECK(state.skipped == 1);
  CHECK(state.first_moment[0](0, 0) == 0.0);
}

TEST_CASE("mismatched shapes raise ShapeError") {
  Matrix w = Matrix::Zero(2, 2);
  Matrix g = Matrix::Zero(2, 3);
  AdamState state = make_adam_state({{"w", &w}});
  CHECK_THROWS_AS(adam_step({{"w", &w}}, {{"w", &g}}, state, {}), ShapeError);
}
