#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gsindy {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::vector<double> column(std::size_t c) const;

  /// Copy keeping only the listed columns, in that order.
  Matrix select_columns(std::span<const std::size_t> columns) const;

  std::vector<double> multiply(std::span<const double> x) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct LeastSquaresSolution {
  std::vector<double> x;
  std::size_t rank = 0;
  bool rank_deficient = false;
};

/// Minimises ||A x - y||^2 + ridge * ||x||^2 with Householder QR and column
/// pivoting. When A (ridge = 0) is rank deficient, returns the minimum-norm
/// solution via a complete orthogonal decomposition. Columns whose pivot falls
/// below `rank_tol * |R(0,0)|` count as dependent.
LeastSquaresSolution solve_least_squares(const Matrix& a, std::span<const double> y,
                                         double ridge = 0.0, double rank_tol = 1e-12);

}  // namespace gsindy
