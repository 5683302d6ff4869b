// Dense row-major matrix. Deliberately minimal: storage, shape checks and
// element access. All heavy arithmetic goes through kws::kernels.
#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "kws/common/errors.h"

namespace kws {

template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(size_t rows, size_t cols, T fill = T(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix zeros(size_t rows, size_t cols) { return Matrix(rows, cols); }

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  T* row(size_t r) { return data_.data() + r * cols_; }
  const T* row(size_t r) const { return data_.data() + r * cols_; }

  T& at(size_t r, size_t c) { return data_[r * cols_ + c]; }
  const T& at(size_t r, size_t c) const { return data_[r * cols_ + c]; }
  T& operator()(size_t r, size_t c) { return at(r, c); }
  const T& operator()(size_t r, size_t c) const { return at(r, c); }

  void fill(T v) { data_.assign(data_.size(), v); }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool all_finite() const {
    for (T v : data_)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  template <typename U>
  Matrix<U> cast() const {
    Matrix<U> out(rows_, cols_);
    for (size_t i = 0; i < data_.size(); ++i) out.data()[i] = static_cast<U>(data_[i]);
    return out;
  }

  bool operator==(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
  }

  std::string shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

 private:
  size_t rows_ = 0;
  size_t cols_ = 0;
  std::vector<T> data_;
};

using MatF = Matrix<float>;
using MatD = Matrix<double>;

template <typename T>
inline void require_shape(const Matrix<T>& m, size_t rows, size_t cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols)
    throw ShapeMismatchError(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                             std::to_string(cols) + ", got " + m.shape_str());
}

}  // namespace kws
