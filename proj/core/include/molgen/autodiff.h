//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGEN_AUTODIFF_H_
#define MOLGEN_AUTODIFF_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "molgen/ndarray.h"

namespace molgen {
class Tape;

/// Handle to a node recorded on a Tape. Cheap to copy; only valid while the
/// owning tape is alive.
class Var {
public:
  Var() = default;

  const NDArray &value() const;
  Tape *tape() const { return tape_; }
  std::size_t id() const { return id_; }

private:
  friend class Tape;
  Var(Tape *tape, std::size_t id): tape_(tape), id_(id) { }

  Tape *tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Define-by-run reverse-mode tape. Nodes are appended in execution order and
/// backward() visits them in exact reverse. A tape built with
/// `record_gradients == false` evaluates the same arithmetic but keeps no
/// backward closures.
class Tape {
public:
  // Receives the node's own output, the incoming gradient, and one gradient
  // slot per input (nullptr when that input does not need a gradient).
  using BackwardFn = std::function<void(const NDArray &out, const NDArray &grad,
                                        std::span<NDArray *const> input_grads)>;

  explicit Tape(bool record_gradients = true);
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  Var leaf(NDArray value);
  Var constant(NDArray value);

  Var record(NDArray value, std::vector<Var> inputs, BackwardFn backward);

  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }
  const NDArray &value(std::size_t id) const { return nodes_[id].value; }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }

  /// Fills gradients of `loss` (which must hold exactly one element) with
  /// respect to every node; fan-out contributions are summed.
  void backward(Var loss);

  // Gradient of the last backward() target w.r.t. `v`; zeros if unreached.
  NDArray grad(Var v) const;

private:
  struct Node {
    NDArray value;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool needs_grad = false;
  };

  bool record_;
  std::vector<Node> nodes_;
  std::vector<NDArray> grads_;
};

namespace ad {
Var matmul(Var a, Var b);
// Same-shape addition, or `b` a 1 x cols row vector broadcast over rows.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var softmax_rows(Var a);
Var log_softmax_rows(Var a);
Var log(Var a);
Var embedding_gather(Var table, std::span<const int> ids);
Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);
// Exact (erf) GELU.
Var gelu(Var a);
// axis 0 stacks rows, axis 1 stacks columns.
Var concat(std::span<const Var> parts, int axis);
Var transpose(Var a);
// Entries whose mask byte is nonzero are replaced by `value`.
Var masked_fill(Var a, std::span<const std::uint8_t> mask, double value);
Var slice(Var a, std::size_t row_begin, std::size_t row_end,
          std::size_t col_begin, std::size_t col_end);
// out[i] = a(i, cols[i]); a negative column yields 0.
Var pick(Var a, std::span<const int> cols);
// Row-block sums: out row s = sum of rows [offsets[s], offsets[s+1]).
Var segment_sum(Var a, std::span<const std::size_t> offsets);
Var sum(Var a);
Var mean(Var a);
}  // namespace ad
}  // namespace molgen

#endif  // MOLGEN_AUTODIFF_H_
