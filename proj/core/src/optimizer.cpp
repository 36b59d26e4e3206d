#include "courtsketch/optimizer.hpp"

#include <cmath>

#include "courtsketch/errors.hpp"

namespace courtsketch {

AdamState make_adam_state(const ConstNamedTensors& params) {
  AdamState s;
  for (const auto& [name, m] : params) {
    s.first_moment.push_back(Matrix::Zero(m->rows(), m->cols()));
    s.second_moment.push_back(Matrix::Zero(m->rows(), m->cols()));
  }
  return s;
}

bool adam_step(const NamedTensors& params, const ConstNamedTensors& grads, AdamState& state, const AdamConfig& cfg) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw ShapeError("adam_step: parameter, gradient and state counts differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].second->rows() != grads[i].second->rows() || params[i].second->cols() != grads[i].second->cols()) {
      throw ShapeError("adam_step: gradient shape mismatch for " + params[i].first);
    }
    if (!grads[i].second->allFinite()) {
      ++state.skipped;
      return false;
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& g = *grads[i].second;
    Matrix& m = state.first_moment[i];
    Matrix& v = state.second_moment[i];
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    params[i].second->array() -=
        cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.epsilon);
  }
  return true;
}

}  // namespace courtsketch
