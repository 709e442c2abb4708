//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molgen/optimizer.h"

#include <cmath>
#include <string>

#include "molgen/error.h"

namespace molgen {
void adam_step(std::span<NDArray> params, std::span<const NDArray> grads,
               AdamState &state) {
  if (params.size() != grads.size())
    throw Error(ErrorCode::kShapeMismatch,
                "adam_step: " + std::to_string(params.size())
                    + " parameters but " + std::to_string(grads.size())
                    + " gradients");
  if (state.m.empty()) {
    for (const NDArray &p: params) {
      state.m.emplace_back(p.shape(), 0.0);
      state.v.emplace_back(p.shape(), 0.0);
    }
  }
  if (state.m.size() != params.size() || state.v.size() != params.size())
    throw Error(ErrorCode::kShapeMismatch, "adam_step: moment count mismatch");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!params[k].same_shape(grads[k]) || !params[k].same_shape(state.m[k])
        || !params[k].same_shape(state.v[k]))
      throw Error(ErrorCode::kShapeMismatch,
                  "adam_step: shape mismatch for parameter "
                      + std::to_string(k));
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    NDArray &p = params[k];
    NDArray &m = state.m[k];
    NDArray &v = state.v[k];
    const NDArray &g = grads[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}
}  // namespace molgen
