//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molgen/ndarray.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "molgen/error.h"

namespace molgen {
namespace {
std::size_t product(const std::vector<std::size_t> &shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t { 1 },
                         std::multiplies<>());
}
}  // namespace

NDArray::NDArray(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(product(shape_), fill) { }

NDArray::NDArray(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (product(shape_) != data_.size())
    throw Error(ErrorCode::kShapeMismatch,
                "data length " + std::to_string(data_.size())
                    + " does not match shape " + shape_string(shape_));
}

NDArray NDArray::matrix(std::size_t rows, std::size_t cols,
                        std::initializer_list<double> values) {
  return NDArray({ rows, cols }, std::vector<double>(values));
}

NDArray NDArray::scalar(double value) {
  return NDArray({ 1, 1 }, std::vector<double> { value });
}

double NDArray::item() const {
  if (data_.size() != 1)
    throw Error(ErrorCode::kShapeMismatch,
                "item() on array of shape " + shape_string(shape_));
  return data_[0];
}

void NDArray::fill(double value) {
  std::fill(data_.begin(), data_.end(), value);
}

bool NDArray::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

std::string shape_string(const std::vector<std::size_t> &shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0)
      out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}
}  // namespace molgen
