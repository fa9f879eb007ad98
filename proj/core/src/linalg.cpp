#include "gsindy/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gsindy/errors.hpp"

namespace gsindy {

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

Matrix Matrix::select_columns(std::span<const std::size_t> columns) const {
  Matrix out(rows_, columns.size());
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t j = 0; j < columns.size(); ++j) out(r, j) = (*this)(r, columns[j]);
  return out;
}

std::vector<double> Matrix::multiply(std::span<const double> x) const {
  if (x.size() != cols_) throw InvalidArgument("matrix-vector size mismatch");
  std::vector<double> out(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    const auto row_values = row(r);
    out[r] = std::inner_product(row_values.begin(), row_values.end(), x.begin(), 0.0);
  }
  return out;
}

namespace {

// Column-major working storage.
struct ColMajor {
  std::size_t rows, cols;
  std::vector<double> v;
  double& at(std::size_t r, std::size_t c) { return v[c * rows + r]; }
  double at(std::size_t r, std::size_t c) const { return v[c * rows + r]; }
  double* col(std::size_t c) { return v.data() + c * rows; }
};

struct Reflector {
  std::vector<double> v;  // acts on rows [k, rows)
  double beta = 0.0;      // H = I - beta v v^T
};

// Builds the reflector that zeroes x[1:] and returns the resulting leading value.
double make_reflector(const double* x, std::size_t n, Reflector& h) {
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) norm = std::hypot(norm, x[i]);
  h.v.assign(x, x + n);
  if (norm == 0.0) {
    h.beta = 0.0;
    return 0.0;
  }
  const double alpha = x[0] > 0.0 ? -norm : norm;
  h.v[0] -= alpha;
  double vtv = 0.0;
  for (double e : h.v) vtv += e * e;
  h.beta = vtv > 0.0 ? 2.0 / vtv : 0.0;
  return alpha;
}

void apply_reflector(const Reflector& h, double* x) {
  if (h.beta == 0.0) return;
  double dot = 0.0;
  for (std::size_t i = 0; i < h.v.size(); ++i) dot += h.v[i] * x[i];
  dot *= h.beta;
  for (std::size_t i = 0; i < h.v.size(); ++i) x[i] -= dot * h.v[i];
}

}  // namespace

LeastSquaresSolution solve_least_squares(const Matrix& a, std::span<const double> y, double ridge,
                                         double rank_tol) {
  if (y.size() != a.rows()) throw InvalidArgument("least squares: rows and targets differ in length");
  if (ridge < 0.0) throw InvalidArgument("least squares: ridge must be non-negative");
  const std::size_t n = a.cols();
  LeastSquaresSolution out;
  out.x.assign(n, 0.0);
  if (n == 0) return out;

  const std::size_t extra = ridge > 0.0 ? n : 0;
  const std::size_t m = a.rows() + extra;
  ColMajor r{m, n, std::vector<double>(m * n, 0.0)};
  std::vector<double> rhs(m, 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < n; ++j) r.at(i, j) = a(i, j);
    rhs[i] = y[i];
  }
  if (extra > 0) {
    const double root = std::sqrt(ridge);
    for (std::size_t j = 0; j < n; ++j) r.at(a.rows() + j, j) = root;
  }

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  const std::size_t steps = std::min(m, n);
  Reflector h;
  for (std::size_t k = 0; k < steps; ++k) {
    std::size_t pivot = k;
    double best = -1.0;
    for (std::size_t j = k; j < n; ++j) {
      double sq = 0.0;
      for (std::size_t i = k; i < m; ++i) sq += r.at(i, j) * r.at(i, j);
      if (sq > best) {
        best = sq;
        pivot = j;
      }
    }
    if (pivot != k) {
      std::swap_ranges(r.col(k), r.col(k) + m, r.col(pivot));
      std::swap(perm[k], perm[pivot]);
    }
    const double lead = make_reflector(r.col(k) + k, m - k, h);
    for (std::size_t j = k + 1; j < n; ++j) apply_reflector(h, r.col(j) + k);
    apply_reflector(h, rhs.data() + k);
    r.at(k, k) = lead;
    for (std::size_t i = k + 1; i < m; ++i) r.at(i, k) = 0.0;
  }

  const double scale = std::abs(r.at(0, 0));
  std::size_t rank = 0;
  while (rank < steps && std::abs(r.at(rank, rank)) > rank_tol * scale && scale > 0.0) ++rank;
  out.rank = rank;
  out.rank_deficient = rank < n;

  std::vector<double> z(n, 0.0);
  if (rank == n) {
    for (std::size_t k = n; k-- > 0;) {
      double sum = rhs[k];
      for (std::size_t j = k + 1; j < n; ++j) sum -= r.at(k, j) * z[j];
      z[k] = sum / r.at(k, k);
    }
  } else if (rank > 0) {
    // Minimum-norm solution of the leading r x n trapezoid W z = c: factor
    // W^T = Z T, solve T^T u = c, then z = Z [u; 0].
    ColMajor wt{n, rank, std::vector<double>(n * rank, 0.0)};
    for (std::size_t i = 0; i < rank; ++i)
      for (std::size_t j = i; j < n; ++j) wt.at(j, i) = r.at(i, j);
    std::vector<Reflector> reflectors(rank);
    for (std::size_t k = 0; k < rank; ++k) {
      const double lead = make_reflector(wt.col(k) + k, n - k, reflectors[k]);
      for (std::size_t j = k + 1; j < rank; ++j) apply_reflector(reflectors[k], wt.col(j) + k);
      wt.at(k, k) = lead;
    }
    std::vector<double> u(n, 0.0);
    for (std::size_t i = 0; i < rank; ++i) {
      double sum = rhs[i];
      for (std::size_t j = 0; j < i; ++j) sum -= wt.at(j, i) * u[j];
      u[i] = sum / wt.at(i, i);
    }
    for (std::size_t k = rank; k-- > 0;) apply_reflector(reflectors[k], u.data() + k);
    z = std::move(u);
  }
  for (std::size_t j = 0; j < n; ++j) out.x[perm[j]] = z[j];
  return out;
}

}  // namespace gsindy
