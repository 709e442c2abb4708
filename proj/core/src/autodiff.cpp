//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molgen/autodiff.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include "molgen/error.h"

namespace molgen {
const NDArray &Var::value() const {
  return tape_->value(id_);
}

Tape::Tape(bool record_gradients): record_(record_gradients) { }

Var Tape::leaf(NDArray value) {
  nodes_.push_back({ std::move(value), {}, {}, record_ });
  return { this, nodes_.size() - 1 };
}

Var Tape::constant(NDArray value) {
  nodes_.push_back({ std::move(value), {}, {}, false });
  return { this, nodes_.size() - 1 };
}

Var Tape::record(NDArray value, std::vector<Var> inputs, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  if (record_) {
    for (const Var &in: inputs) {
      if (in.tape() != this)
        throw std::logic_error("Var from a different tape");
      node.needs_grad = node.needs_grad || nodes_[in.id()].needs_grad;
      node.inputs.push_back(in.id());
    }
    if (node.needs_grad)
      node.backward = std::move(backward);
    else
      node.inputs.clear();
  }
  nodes_.push_back(std::move(node));
  return { this, nodes_.size() - 1 };
}

void Tape::backward(Var loss) {
  if (loss.tape() != this)
    throw std::logic_error("loss from a different tape");
  const NDArray &lv = nodes_[loss.id()].value;
  if (lv.size() != 1)
    throw Error(ErrorCode::kNonScalarLoss,
                "loss has shape " + shape_string(lv.shape()));

  grads_.assign(nodes_.size(), NDArray());
  grads_[loss.id()] = NDArray(lv.shape(), 1.0);

  std::vector<NDArray *> slots;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node &node = nodes_[i];
    if (!node.backward || grads_[i].empty())
      continue;
    slots.clear();
    for (std::size_t in: node.inputs) {
      if (!nodes_[in].needs_grad) {
        slots.push_back(nullptr);
        continue;
      }
      if (grads_[in].empty())
        grads_[in] = NDArray(nodes_[in].value.shape(), 0.0);
      slots.push_back(&grads_[in]);
    }
    node.backward(node.value, grads_[i], slots);
  }
}

NDArray Tape::grad(Var v) const {
  if (v.id() < grads_.size() && !grads_[v.id()].empty())
    return grads_[v.id()];
  return NDArray(nodes_[v.id()].value.shape(), 0.0);
}

namespace ad {
namespace {
[[noreturn]] void shape_error(const char *op, const NDArray &a,
                              const NDArray &b) {
  throw Error(ErrorCode::kShapeMismatch,
              std::string(op) + ": incompatible shapes "
                  + shape_string(a.shape()) + " and "
                  + shape_string(b.shape()));
}

void require_matrix(const char *op, const NDArray &a) {
  if (a.rank() != 2)
    throw Error(ErrorCode::kShapeMismatch,
                std::string(op) + ": expected a matrix, got "
                    + shape_string(a.shape()));
}

// c += a * b for row-major matrices.
void gemm_acc(const NDArray &a, const NDArray &b, NDArray &c) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  for (std::size_t i = 0; i < m; ++i) {
    double *ci = c.row(i);
    const double *ai = a.row(i);
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ai[p];
      const double *bp = b.row(p);
      for (std::size_t j = 0; j < n; ++j)
        ci[j] += av * bp[j];
    }
  }
}
}  // namespace

Var matmul(Var a, Var b) {
  const NDArray &av = a.value(), &bv = b.value();
  require_matrix("matmul", av);
  require_matrix("matmul", bv);
  if (av.cols() != bv.rows())
    shape_error("matmul", av, bv);
  NDArray out({ av.rows(), bv.cols() }, 0.0);
  gemm_acc(av, bv, out);

  Tape *t = a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  return t->record(std::move(out), { a, b },
                   [t, ia, ib](const NDArray &, const NDArray &g,
                               std::span<NDArray *const> grads) {
                     const NDArray &A = t->value(ia), &B = t->value(ib);
                     const std::size_t m = A.rows(), k = A.cols(),
                                       n = B.cols();
                     if (NDArray *ga = grads[0]) {
                       // dA = G * B^T
                       for (std::size_t i = 0; i < m; ++i) {
                         const double *gi = g.row(i);
                         double *gai = ga->row(i);
                         for (std::size_t p = 0; p < k; ++p) {
                           const double *bp = B.row(p);
                           double acc = 0;
                           for (std::size_t j = 0; j < n; ++j)
                             acc += gi[j] * bp[j];
                           gai[p] += acc;
                         }
                       }
                     }
                     if (NDArray *gb = grads[1]) {
                       // dB = A^T * G
                       for (std::size_t i = 0; i < m; ++i) {
                         const double *ai = A.row(i);
                         const double *gi = g.row(i);
                         for (std::size_t p = 0; p < k; ++p) {
                           const double av = ai[p];
                           double *gbp = gb->row(p);
                           for (std::size_t j = 0; j < n; ++j)
                             gbp[j] += av * gi[j];
                         }
                       }
                     }
                   });
}

Var add(Var a, Var b) {
  const NDArray &av = a.value(), &bv = b.value();
  NDArray out = av;
  if (av.same_shape(bv)) {
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] += bv[i];
    return a.tape()->record(std::move(out), { a, b },
                            [](const NDArray &, const NDArray &g,
                               std::span<NDArray *const> grads) {
                              for (NDArray *gx: grads)
                                if (gx)
                                  for (std::size_t i = 0; i < g.size(); ++i)
                                    (*gx)[i] += g[i];
                            });
  }
  require_matrix("add", av);
  if (bv.rank() != 2 || bv.rows() != 1 || bv.cols() != av.cols())
    shape_error("add", av, bv);
  for (std::size_t r = 0; r < av.rows(); ++r) {
    double *o = out.row(r);
    for (std::size_t c = 0; c < av.cols(); ++c)
      o[c] += bv[c];
  }
  return a.tape()->record(std::move(out), { a, b },
                          [](const NDArray &, const NDArray &g,
                             std::span<NDArray *const> grads) {
                            if (NDArray *ga = grads[0])
                              for (std::size_t i = 0; i < g.size(); ++i)
                                (*ga)[i] += g[i];
                            if (NDArray *gb = grads[1])
                              for (std::size_t r = 0; r < g.rows(); ++r)
                                for (std::size_t c = 0; c < g.cols(); ++c)
                                  (*gb)[c] += g(r, c);
                          });
}

Var sub(Var a, Var b) {
  const NDArray &av = a.value(), &bv = b.value();
  if (!av.same_shape(bv))
    shape_error("sub", av, bv);
  NDArray out = av;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] -= bv[i];
  return a.tape()->record(std::move(out), { a, b },
                          [](const NDArray &, const NDArray &g,
                             std::span<NDArray *const> grads) {
                            if (NDArray *ga = grads[0])
                              for (std::size_t i = 0; i < g.size(); ++i)
                                (*ga)[i] += g[i];
                            if (NDArray *gb = grads[1])
                              for (std::size_t i = 0; i < g.size(); ++i)
                                (*gb)[i] -= g[i];
                          });
}

Var mul(Var a, Var b) {
  const NDArray &av = a.value(), &bv = b.value();
  if (!av.same_shape(bv))
    shape_error("mul", av, bv);
  NDArray out = av;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] *= bv[i];
  Tape *t = a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  return t->record(std::move(out), { a, b },
                   [t, ia, ib](const NDArray &, const NDArray &g,
                               std::span<NDArray *const> grads) {
                     const NDArray &A = t->value(ia), &B = t->value(ib);
                     if (NDArray *ga = grads[0])
                       for (std::size_t i = 0; i < g.size(); ++i)
                         (*ga)[i] += g[i] * B[i];
                     if (NDArray *gb = grads[1])
                       for (std::size_t i = 0; i < g.size(); ++i)
                         (*gb)[i] += g[i] * A[i];
                   });
}

Var scale(Var a, double factor) {
  NDArray out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] *= factor;
  return a.tape()->record(std::move(out), { a },
                          [factor](const NDArray &, const NDArray &g,
                                   std::span<NDArray *const> grads) {
                            if (NDArray *ga = grads[0])
                              for (std::size_t i = 0; i < g.size(); ++i)
                                (*ga)[i] += g[i] * factor;
                          });
}

Var softmax_rows(Var a) {
  const NDArray &av = a.value();
  require_matrix("softmax_rows", av);
  NDArray out(av.shape(), 0.0);
  for (std::size_t r = 0; r < av.rows(); ++r) {
    const double *x = av.row(r);
    double *y = out.row(r);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < av.cols(); ++c)
      mx = std::max(mx, x[c]);
    double total = 0;
    for (std::size_t c = 0; c < av.cols(); ++c) {
      y[c] = std::exp(x[c] - mx);
      total += y[c];
    }
    for (std::size_t c = 0; c < av.cols(); ++c)
      y[c] /= total;
  }
  return a.tape()->record(std::move(out), { a },
                          [](const NDArray &y, const NDArray &g,
                             std::span<NDArray *const> grads) {
                            NDArray *ga = grads[0];
                            if (!ga)
                              return;
                            for (std::size_t r = 0; r < y.rows(); ++r) {
                              const double *yr = y.row(r), *gr = g.row(r);
                              double dot = 0;
                              for (std::size_t c = 0; c < y.cols(); ++c)
                                dot += yr[c] * gr[c];
                              double *out = ga->row(r);
                              for (std::size_t c = 0; c < y.cols(); ++c)
                                out[c] += yr[c] * (gr[c] - dot);
                            }
                          });
}

Var log_softmax_rows(Var a) {
  const NDArray &av = a.value();
  require_matrix("log_softmax_rows", av);
  NDArray out(av.shape(), 0.0);
  for (std::size_t r = 0; r < av.rows(); ++r) {
    const double *x = av.row(r);
    double *y = out.row(r);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < av.cols(); ++c)
      mx = std::max(mx, x[c]);
    double total = 0;
    for (std::size_t c = 0; c < av.cols(); ++c)
      total += std::exp(x[c] - mx);
    const double lse = mx + std::log(total);
    for (std::size_t c = 0; c < av.cols(); ++c)
      y[c] = x[c] - lse;
  }
  return a.tape()->record(std::move(out), { a },
                          [](const NDArray &y, const NDArray &g,
                             std::span<NDArray *const> grads) {
                            NDArray *ga = grads[0];
                            if (!ga)
                              return;
                            for (std::size_t r = 0; r < y.rows(); ++r) {
                              const double *yr = y.row(r), *gr = g.row(r);
                              double gsum = 0;
                              for (std::size_t c = 0; c < y.cols(); ++c)
                                gsum += gr[c];
                              double *out = ga->row(r);
                              for (std::size_t c = 0; c < y.cols(); ++c)
                                out[c] += gr[c] - std::exp(yr[c]) * gsum;
                            }
                          });
}

Var log(Var a) {
  NDArray out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::log(out[i]);
  Tape *t = a.tape();
  const std::size_t ia = a.id();
  return t->record(std::move(out), { a },
                   [t, ia](const NDArray &, const NDArray &g,
                           std::span<NDArray *const> grads) {
                     const NDArray &x = t->value(ia);
                     if (NDArray *ga = grads[0])
                       for (std::size_t i = 0; i < g.size(); ++i)
                         (*ga)[i] += g[i] / x[i];
                   });
}

Var embedding_gather(Var table, std::span<const int> ids) {
  const NDArray &tv = table.value();
  require_matrix("embedding_gather", tv);
  const std::size_t d = tv.cols();
  NDArray out({ ids.size(), d }, 0.0);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= tv.rows())
      throw Error(ErrorCode::kShapeMismatch,
                  "embedding_gather: id " + std::to_string(ids[i])
                      + " outside table of " + std::to_string(tv.rows())
                      + " rows");
    std::copy_n(tv.row(ids[i]), d, out.row(i));
  }
  std::vector<int> idx(ids.begin(), ids.end());
  return table.tape()->record(
      std::move(out), { table },
      [idx = std::move(idx)](const NDArray &, const NDArray &g,
                             std::span<NDArray *const> grads) {
        NDArray *gt = grads[0];
        if (!gt)
          return;
        const std::size_t d = g.cols();
        for (std::size_t i = 0; i < idx.size(); ++i) {
          double *dst = gt->row(idx[i]);
          const double *src = g.row(i);
          for (std::size_t c = 0; c < d; ++c)
            dst[c] += src[c];
        }
      });
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
  const NDArray &xv = x.value(), &gv = gamma.value(), &bv = beta.value();
  require_matrix("layer_norm", xv);
  const std::size_t n = xv.rows(), d = xv.cols();
  if (gv.size() != d || bv.size() != d)
    shape_error("layer_norm", xv, gv);

  NDArray out(xv.shape(), 0.0);
  // Cache per-row normalized values and inverse std for backward.
  NDArray xhat(xv.shape(), 0.0);
  std::vector<double> inv_std(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double *xr = xv.row(r);
    double mu = 0;
    for (std::size_t c = 0; c < d; ++c)
      mu += xr[c];
    mu /= static_cast<double>(d);
    double var = 0;
    for (std::size_t c = 0; c < d; ++c)
      var += (xr[c] - mu) * (xr[c] - mu);
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[r] = is;
    double *hr = xhat.row(r), *yr = out.row(r);
    for (std::size_t c = 0; c < d; ++c) {
      hr[c] = (xr[c] - mu) * is;
      yr[c] = hr[c] * gv[c] + bv[c];
    }
  }

  Tape *t = x.tape();
  const std::size_t ig = gamma.id();
  return t->record(
      std::move(out), { x, gamma, beta },
      [t, ig, xhat = std::move(xhat), inv_std = std::move(inv_std)](
          const NDArray &, const NDArray &g, std::span<NDArray *const> grads) {
        const NDArray &gv = t->value(ig);
        const std::size_t n = g.rows(), d = g.cols();
        const double inv_d = 1.0 / static_cast<double>(d);
        std::vector<double> dxhat(d);
        for (std::size_t r = 0; r < n; ++r) {
          const double *gr = g.row(r), *hr = xhat.row(r);
          if (NDArray *gg = grads[1])
            for (std::size_t c = 0; c < d; ++c)
              (*gg)[c] += gr[c] * hr[c];
          if (NDArray *gb = grads[2])
            for (std::size_t c = 0; c < d; ++c)
              (*gb)[c] += gr[c];
          if (NDArray *gx = grads[0]) {
            double mean_dh = 0, mean_dh_h = 0;
            for (std::size_t c = 0; c < d; ++c) {
              dxhat[c] = gr[c] * gv[c];
              mean_dh += dxhat[c];
              mean_dh_h += dxhat[c] * hr[c];
            }
            mean_dh *= inv_d;
            mean_dh_h *= inv_d;
            double *out = gx->row(r);
            for (std::size_t c = 0; c < d; ++c)
              out[c] += inv_std[r] * (dxhat[c] - mean_dh - hr[c] * mean_dh_h);
          }
        }
      });
}

Var gelu(Var a) {
  NDArray out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = out[i];
    out[i] = 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
  }
  Tape *t = a.tape();
  const std::size_t ia = a.id();
  return t->record(
      std::move(out), { a },
      [t, ia](const NDArray &, const NDArray &g,
              std::span<NDArray *const> grads) {
        NDArray *ga = grads[0];
        if (!ga)
          return;
        const NDArray &xv = t->value(ia);
        const double inv_sqrt_2pi = std::numbers::inv_sqrtpi / std::numbers::sqrt2;
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double x = xv[i];
          const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
          const double pdf = inv_sqrt_2pi * std::exp(-0.5 * x * x);
          (*ga)[i] += g[i] * (cdf + x * pdf);
        }
      });
}

Var concat(std::span<const Var> parts, int axis) {
  if (parts.empty())
    throw Error(ErrorCode::kShapeMismatch, "concat: no inputs");
  if (axis != 0 && axis != 1)
    throw Error(ErrorCode::kShapeMismatch, "concat: axis must be 0 or 1");
  const NDArray &first = parts[0].value();
  require_matrix("concat", first);

  std::size_t rows = 0, cols = 0;
  for (const Var &p: parts) {
    const NDArray &v = p.value();
    require_matrix("concat", v);
    if (axis == 0) {
      if (v.cols() != first.cols())
        shape_error("concat", first, v);
      rows += v.rows();
    } else {
      if (v.rows() != first.rows())
        shape_error("concat", first, v);
      cols += v.cols();
    }
  }
  if (axis == 0)
    cols = first.cols();
  else
    rows = first.rows();

  NDArray out({ rows, cols }, 0.0);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const Var &p: parts) {
    const NDArray &v = p.value();
    offsets.push_back(off);
    for (std::size_t r = 0; r < v.rows(); ++r)
      for (std::size_t c = 0; c < v.cols(); ++c) {
        if (axis == 0)
          out(off + r, c) = v(r, c);
        else
          out(r, off + c) = v(r, c);
      }
    off += axis == 0 ? v.rows() : v.cols();
  }

  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].tape()->record(
      std::move(out), std::move(inputs),
      [axis, offsets = std::move(offsets)](const NDArray &, const NDArray &g,
                                           std::span<NDArray *const> grads) {
        for (std::size_t k = 0; k < grads.size(); ++k) {
          NDArray *gp = grads[k];
          if (!gp)
            continue;
          for (std::size_t r = 0; r < gp->rows(); ++r)
            for (std::size_t c = 0; c < gp->cols(); ++c)
              (*gp)(r, c) += axis == 0 ? g(offsets[k] + r, c)
                                       : g(r, offsets[k] + c);
        }
      });
}

Var transpose(Var a) {
  const NDArray &av = a.value();
  require_matrix("transpose", av);
  NDArray out({ av.cols(), av.rows() }, 0.0);
  for (std::size_t r = 0; r < av.rows(); ++r)
    for (std::size_t c = 0; c < av.cols(); ++c)
      out(c, r) = av(r, c);
  return a.tape()->record(std::move(out), { a },
                          [](const NDArray &, const NDArray &g,
                             std::span<NDArray *const> grads) {
                            if (NDArray *ga = grads[0])
                              for (std::size_t r = 0; r < g.rows(); ++r)
                                for (std::size_t c = 0; c < g.cols(); ++c)
                                  (*ga)(c, r) += g(r, c);
                          });
}

Var masked_fill(Var a, std::span<const std::uint8_t> mask, double value) {
  const NDArray &av = a.value();
  if (mask.size() != av.size())
    throw Error(ErrorCode::kShapeMismatch,
                "masked_fill: mask length " + std::to_string(mask.size())
                    + " vs array " + shape_string(av.shape()));
  NDArray out = av;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (mask[i])
      out[i] = value;
  std::vector<std::uint8_t> m(mask.begin(), mask.end());
  return a.tape()->record(std::move(out), { a },
                          [m = std::move(m)](const NDArray &, const NDArray &g,
                                             std::span<NDArray *const> grads) {
                            if (NDArray *ga = grads[0])
                              for (std::size_t i = 0; i < g.size(); ++i)
                                if (!m[i])
                                  (*ga)[i] += g[i];
                          });
}

Var slice(Var a, std::size_t row_begin, std::size_t row_end,
          std::size_t col_begin, std::size_t col_end) {
  const NDArray &av = a.value();
  require_matrix("slice", av);
  if (row_begin > row_end || row_end > av.rows() || col_begin > col_end
      || col_end > av.cols())
    throw Error(ErrorCode::kShapeMismatch,
                "slice out of range for " + shape_string(av.shape()));
  const std::size_t nr = row_end - row_begin, nc = col_end - col_begin;
  NDArray out({ nr, nc }, 0.0);
  for (std::size_t r = 0; r < nr; ++r)
    std::copy_n(av.row(row_begin + r) + col_begin, nc, out.row(r));
  return a.tape()->record(
      std::move(out), { a },
      [row_begin, col_begin](const NDArray &, const NDArray &g,
                             std::span<NDArray *const> grads) {
        NDArray *ga = grads[0];
        if (!ga)
          return;
        for (std::size_t r = 0; r < g.rows(); ++r) {
          double *dst = ga->row(row_begin + r) + col_begin;
          const double *src = g.row(r);
          for (std::size_t c = 0; c < g.cols(); ++c)
            dst[c] += src[c];
        }
      });
}

Var pick(Var a, std::span<const int> cols) {
  const NDArray &av = a.value();
  require_matrix("pick", av);
  if (cols.size() != av.rows())
    throw Error(ErrorCode::kShapeMismatch,
                "pick: " + std::to_string(cols.size()) + " indices for "
                    + std::to_string(av.rows()) + " rows");
  NDArray out({ av.rows(), 1 }, 0.0);
  for (std::size_t r = 0; r < av.rows(); ++r) {
    if (cols[r] < 0)
      continue;
    if (static_cast<std::size_t>(cols[r]) >= av.cols())
      throw Error(ErrorCode::kShapeMismatch,
                  "pick: column " + std::to_string(cols[r]) + " out of range");
    out[r] = av(r, cols[r]);
  }
  std::vector<int> idx(cols.begin(), cols.end());
  return a.tape()->record(std::move(out), { a },
                          [idx = std::move(idx)](const NDArray &,
                                                 const NDArray &g,
                                                 std::span<NDArray *const> grads) {
                            if (NDArray *ga = grads[0])
                              for (std::size_t r = 0; r < idx.size(); ++r)
                                if (idx[r] >= 0)
                                  (*ga)(r, idx[r]) += g[r];
                          });
}

Var segment_sum(Var a, std::span<const std::size_t> offsets) {
  const NDArray &av = a.value();
  require_matrix("segment_sum", av);
  if (offsets.empty() || offsets.back() != av.rows())
    throw Error(ErrorCode::kShapeMismatch,
                "segment_sum: offsets do not cover all rows");
  const std::size_t segments = offsets.size() - 1, d = av.cols();
  NDArray out({ segments, d }, 0.0);
  for (std::size_t s = 0; s < segments; ++s)
    for (std::size_t r = offsets[s]; r < offsets[s + 1]; ++r)
      for (std::size_t c = 0; c < d; ++c)
        out(s, c) += av(r, c);
  std::vector<std::size_t> off(offsets.begin(), offsets.end());
  return a.tape()->record(
      std::move(out), { a },
      [off = std::move(off)](const NDArray &, const NDArray &g,
                             std::span<NDArray *const> grads) {
        NDArray *ga = grads[0];
        if (!ga)
          return;
        for (std::size_t s = 0; s + 1 < off.size(); ++s)
          for (std::size_t r = off[s]; r < off[s + 1]; ++r)
            for (std::size_t c = 0; c < g.cols(); ++c)
              (*ga)(r, c) += g(s, c);
      });
}

Var sum(Var a) {
  double total = 0;
  for (double v: a.value().data())
    total += v;
  return a.tape()->record(NDArray::scalar(total), { a },
                          [](const NDArray &, const NDArray &g,
                             std::span<NDArray *const> grads) {
                            if (NDArray *ga = grads[0])
                              for (std::size_t i = 0; i < ga->size(); ++i)
                                (*ga)[i] += g[0];
                          });
}

Var mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  return scale(sum(a), 1.0 / n);
}
}  // namespace ad
}  // namespace molgen
