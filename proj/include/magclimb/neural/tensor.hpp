#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "magclimb/common/errors.hpp"

namespace magclimb::neural {

enum class Mode { Train, Infer };

/// Per-sample shape: time steps x channels. Dense data uses steps == 1.
struct FeatureShape {
  std::size_t steps = 1;
  std::size_t channels = 1;

  bool operator==(const FeatureShape&) const = default;
};

std::string to_string(FeatureShape s);

struct Shape3 {
  std::size_t batch = 0;
  std::size_t steps = 0;
  std::size_t channels = 0;

  std::size_t size() const { return batch * steps * channels; }
  FeatureShape feature() const { return {steps, channels}; }
  bool operator==(const Shape3&) const = default;
};

std::string to_string(Shape3 s);

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;
template <typename T>
using StridedMap = Eigen::Map<RowMatrix<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using ConstStridedMap = Eigen::Map<const RowMatrix<T>, 0, Eigen::OuterStride<>>;

/// Dense batch x steps x channels array, row-major (channels fastest).
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape3 shape, T fill = T(0)) : shape_(shape), values_(shape.size(), fill) {}
  Tensor(Shape3 shape, std::vector<T> values) : shape_(shape), values_(std::move(values)) {
    if (values_.size() != shape_.size()) {
      throw ShapeError("tensor " + to_string(shape_) + " given " + std::to_string(values_.size()) + " values");
    }
  }

  const Shape3& shape() const { return shape_; }
  std::size_t size() const { return values_.size(); }
  T* data() { return values_.data(); }
  const T* data() const { return values_.data(); }
  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }
  std::vector<T>& storage() { return values_; }
  const std::vector<T>& storage() const { return values_; }

  T& at(std::size_t b, std::size_t t, std::size_t c) {
    return values_[(b * shape_.steps + t) * shape_.channels + c];
  }
  T at(std::size_t b, std::size_t t, std::size_t c) const {
    return values_[(b * shape_.steps + t) * shape_.channels + c];
  }

  /// (batch * steps) x channels view.
  MatrixMap<T> matrix() {
    return {values_.data(), static_cast<Eigen::Index>(shape_.batch * shape_.steps),
            static_cast<Eigen::Index>(shape_.channels)};
  }
  ConstMatrixMap<T> matrix() const {
    return {values_.data(), static_cast<Eigen::Index>(shape_.batch * shape_.steps),
            static_cast<Eigen::Index>(shape_.channels)};
  }

  /// Same values under a new shape of equal size.
  Tensor reshaped(Shape3 shape) const {
    if (shape.size() != shape_.size()) throw ShapeError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
    return Tensor(shape, values_);
  }

  bool all_finite() const {
    for (T v : values_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  bool operator==(const Tensor&) const = default;

 private:
  Shape3 shape_;
  std::vector<T> values_;
};

/// In debug builds, raises if a layer produced NaN or Inf.
template <typename T>
void debug_check_finite([[maybe_unused]] const Tensor<T>& t, [[maybe_unused]] const char* where) {
#ifndef NDEBUG
  if (!t.all_finite()) throw Error(std::string("non-finite values after ") + where);
#endif
}

/// A learnable array together with its accumulated gradient.
template <typename T>
struct Param {
  std::string name;
  std::vector<std::size_t> dims;
  std::vector<T> value;
  std::vector<T> grad;

  Param() = default;
  Param(std::string n, std::vector<std::size_t> d) : name(std::move(n)), dims(std::move(d)) {
    std::size_t count = 1;
    for (auto v : dims) count *= v;
    value.assign(count, T(0));
    grad.assign(count, T(0));
  }

  std::size_t size() const { return value.size(); }

  MatrixMap<T> value_matrix(std::size_t rows, std::size_t cols) {
    return {value.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
  }
  ConstMatrixMap<T> value_matrix(std::size_t rows, std::size_t cols) const {
    return {value.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
  }
  MatrixMap<T> grad_matrix(std::size_t rows, std::size_t cols) {
    return {grad.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
  }
};

}  // namespace magclimb::neural
