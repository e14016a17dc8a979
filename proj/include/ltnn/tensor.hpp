// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ltnn/errors.hpp"

namespace ltnn {

// Dense types are row-major so that the flat index of (i, j) in an m x n
// matrix is i * n + j, matching the on-disk tensor layout.
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using RowVector = RowVectorX<double>;
using Index = Eigen::Index;
using Shape = std::vector<Index>;

std::string shape_to_string(const Shape& shape);
Index shape_size(const Shape& shape);

/// Dense n-dimensional array with row-major flat storage.
template <typename Scalar>
class BasicTensor {
 public:
  BasicTensor() = default;
  explicit BasicTensor(Shape shape) : shape_(std::move(shape)), data_(VectorX<Scalar>::Zero(checked_size(shape_))) {}
  BasicTensor(Shape shape, VectorX<Scalar> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (checked_size(shape_) != data_.size()) {
      throw ShapeError("tensor shape " + shape_to_string(shape_) + " does not match " +
                       std::to_string(data_.size()) + " values");
    }
  }

  static BasicTensor from_matrix(const MatrixX<Scalar>& m) {
    return BasicTensor({m.rows(), m.cols()}, Eigen::Map<const VectorX<Scalar>>(m.data(), m.size()));
  }

  const Shape& shape() const { return shape_; }
  Index rank() const { return static_cast<Index>(shape_.size()); }
  Index size() const { return data_.size(); }

  VectorX<Scalar>& data() { return data_; }
  const VectorX<Scalar>& data() const { return data_; }

  /// View as a matrix whose rows are the leading extent and whose columns
  /// flatten the remaining extents.
  Eigen::Map<MatrixX<Scalar>> as_matrix() { return {data_.data(), leading(), trailing()}; }
  Eigen::Map<const MatrixX<Scalar>> as_matrix() const { return {data_.data(), leading(), trailing()}; }

  bool operator==(const BasicTensor& other) const { return shape_ == other.shape_ && data_ == other.data_; }

 private:
  static Index checked_size(const Shape& s) {
    for (Index e : s) {
      if (e <= 0) throw ShapeError("tensor extents must be positive, got " + shape_to_string(s));
    }
    return shape_size(s);
  }
  Index leading() const { return shape_.empty() ? 1 : shape_.front(); }
  Index trailing() const { return shape_.empty() ? 1 : data_.size() / shape_.front(); }

  Shape shape_;
  VectorX<Scalar> data_;
};

using Tensor = BasicTensor<double>;

/// Matrix product with an explicit dimension check.
template <typename A, typename B>
auto matmul(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + shape_to_string({a.rows(), a.cols()}) + " x " +
                     shape_to_string({b.rows(), b.cols()}));
  }
  using Scalar = typename A::Scalar;
  MatrixX<Scalar> out = a * b;
  return out;
}

template <typename Derived>
auto transpose(const Eigen::MatrixBase<Derived>& a) {
  MatrixX<typename Derived::Scalar> out = a.transpose();
  return out;
}

/// Numerically stable softmax (max subtraction).
template <typename Derived>
VectorX<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& v) {
  if (v.size() == 0) throw ShapeError("softmax: empty vector");
  using Scalar = typename Derived::Scalar;
  const Scalar peak = v.maxCoeff();
  VectorX<Scalar> e = (v.reshaped().array() - peak).exp().matrix();
  return e / e.sum();
}

template <typename Derived>
auto relu(const Eigen::MatrixBase<Derived>& t) {
  return t.cwiseMax(typename Derived::Scalar(0)).eval();
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& t) {
  return t.allFinite();
}

}  // namespace ltnn
