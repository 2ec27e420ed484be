#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace iidgan {

/// Dense row-major matrix of doubles. A batch of vectors is stored one
/// example per row.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  /// Extract column c as a vector.
  std::vector<double> column(std::size_t c) const;

  /// Rows [begin, end) as a new matrix.
  Matrix slice_rows(std::size_t begin, std::size_t end) const;

  Matrix transposed() const;
  void fill(double v);
  bool all_finite() const;

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// a · b through the active kernel table.
Matrix matmul(const Matrix& a, const Matrix& b);

/// a · bᵀ through the active kernel table.
Matrix matmul_bt(const Matrix& a, const Matrix& b);

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

/// Frobenius norm.
double frobenius_norm(const Matrix& a);

/// Largest absolute entry.
double max_abs(const Matrix& a);

/// Throws NonFiniteError naming `what` unless every entry is finite.
void require_finite(const Matrix& m, const char* what);

}  // namespace iidgan
