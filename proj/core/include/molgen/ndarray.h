//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGEN_NDARRAY_H_
#define MOLGEN_NDARRAY_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace molgen {
/// Dense row-major array of doubles. Most operations treat it as a matrix;
/// rank-3 arrays only appear as padded model outputs.
class NDArray {
public:
  NDArray() = default;
  explicit NDArray(std::vector<std::size_t> shape, double fill = 0.0);
  NDArray(std::vector<std::size_t> shape, std::vector<double> data);

  static NDArray matrix(std::size_t rows, std::size_t cols,
                        std::initializer_list<double> values);
  static NDArray scalar(double value);

  const std::vector<std::size_t> &shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // Matrix view: rank-2 arrays only.
  std::size_t rows() const { return shape_[0]; }
  std::size_t cols() const { return shape_[1]; }

  double &operator()(std::size_t r, std::size_t c) {
    return data_[r * shape_[1] + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * shape_[1] + c];
  }
  double &operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double *row(std::size_t r) { return data_.data() + r * shape_[1]; }
  const double *row(std::size_t r) const { return data_.data() + r * shape_[1]; }

  double item() const;
  void fill(double value);
  bool same_shape(const NDArray &other) const { return shape_ == other.shape_; }
  bool all_finite() const;

  bool operator==(const NDArray &) const = default;

private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

std::string shape_string(const std::vector<std::size_t> &shape);
}  // namespace molgen

#endif  // MOLGEN_NDARRAY_H_
