#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace guifix {

/// Small dense row-major matrix.  GUI graphs have a few dozen nodes, so
/// plain loops are fast enough and keep the numerics easy to audit.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  void fill(double v);
  Matrix& operator+=(const Matrix& o);
  Matrix& operator*=(double s);

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix multiply(const Matrix& a, const Matrix& b);
/// aᵀ · b without materializing the transpose.
Matrix multiply_at_b(const Matrix& a, const Matrix& b);
/// a · bᵀ without materializing the transpose.
Matrix multiply_a_bt(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

}  // namespace guifix
