#pragma once

#include <chrono>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "gsindy/linalg.hpp"
#include "gsindy/timeseries.hpp"

namespace gsindy::test {

inline Timestamp at(int y, unsigned m, unsigned d, int hour = 0, int minute = 0, int second = 0) {
  using namespace std::chrono;
  return sys_days{year{y} / month{m} / day{d}} + hours{hour} + minutes{minute} + seconds{second};
}

inline Date date(int y, unsigned m, unsigned d) {
  return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

inline std::vector<double> to_vector(const UniformSeries& s) { return {s.values().begin(), s.values().end()}; }

inline UniformSeries series(std::vector<double> v, Timestamp start = at(2027, 5, 13)) {
  return UniformSeries(start, kDefaultStep, std::move(v));
}

// Solves (A^T A + ridge I) x = A^T y by Gauss-Jordan elimination with partial pivoting.
inline std::vector<double> normal_equations(const Matrix& a, std::span<const double> y, double ridge = 0.0) {
  const std::size_t n = a.cols();
  std::vector<std::vector<double>> m(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t r = 0; r < a.rows(); ++r) m[i][j] += a(r, i) * a(r, j);
    m[i][i] += ridge;
    for (std::size_t r = 0; r < a.rows(); ++r) m[i][n] += a(r, i) * y[r];
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m[r][c]) > std::abs(m[p][c])) p = r;
    std::swap(m[c], m[p]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = m[r][c] / m[c][c];
      for (std::size_t k = c; k <= n; ++k) m[r][k] -= f * m[c][k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = m[i][n] / m[i][i];
  return x;
}

}  // namespace gsindy::test
