//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGEN_OPTIMIZER_H_
#define MOLGEN_OPTIMIZER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "molgen/ndarray.h"

namespace molgen {
/// Adaptive-moment (Adam) state. `m` and `v` mirror the parameter shapes and
/// are allocated lazily on the first step.
struct AdamState {
  std::vector<NDArray> m;
  std::vector<NDArray> v;
  std::int64_t step = 0;
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam update in place. Throws kShapeMismatch when the
/// gradient or moment shapes disagree with the parameters.
void adam_step(std::span<NDArray> params, std::span<const NDArray> grads,
               AdamState &state);
}  // namespace molgen

#endif  // MOLGEN_OPTIMIZER_H_
