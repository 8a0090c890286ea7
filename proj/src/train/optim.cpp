// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <string>

#include "spectrarec/errors.hpp"
#include "spectrarec/train.hpp"

namespace spectrarec::train {

void adam_step(OptimizerState& state, std::span<double> weights, std::span<const double> grad,
               double lr, const AdamParams& params) {
  if (state.m.size() != weights.size() || state.v.size() != weights.size() ||
      grad.size() != weights.size()) {
    throw ShapeError("adam: weights, gradient and moments differ in length");
  }
  for (double g : grad) {
    if (!std::isfinite(g)) {
      throw NumericsError("non-finite gradient");
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(params.beta1, t);
  const double c2 = 1.0 - std::pow(params.beta2, t);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double g = grad[i];
    state.m[i] = params.beta1 * state.m[i] + (1.0 - params.beta1) * g;
    state.v[i] = params.beta2 * state.v[i] + (1.0 - params.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    weights[i] -= lr * m_hat / (std::sqrt(v_hat) + params.epsilon);
  }
}

double cosine_lr(std::size_t iteration, std::size_t total_iterations, double lr0, double eta_min) {
  if (total_iterations == 0 || iteration > total_iterations) {
    throw RangeError("cosine_lr: iteration " + std::to_string(iteration) + " outside [0, " +
                     std::to_string(total_iterations) + "]");
  }
  if (iteration == 0) {
    return lr0;
  }
  if (iteration == total_iterations) {
    return eta_min;
  }
  const double phase = std::numbers::pi * static_cast<double>(iteration) /
                       static_cast<double>(total_iterations);
  return eta_min + 0.5 * (lr0 - eta_min) * (1.0 + std::cos(phase));
}

}  // namespace spectrarec::train
