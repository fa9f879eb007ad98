#include "gsindy/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gsindy/errors.hpp"

namespace gsindy {

MetricsRecord compute_metrics(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size())
    throw InvalidArgument("metrics: predicted and actual differ in length");
  const std::size_t n = predicted.size();
  if (n < 2) throw InvalidArgument("metrics: need at least 2 points");

  MetricsRecord m;
  m.n = n;
  double abs_sum = 0.0, sq_sum = 0.0, p_mean = 0.0, a_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = predicted[i] - actual[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
    p_mean += predicted[i];
    a_mean += actual[i];
  }
  const double nn = static_cast<double>(n);
  m.mae = abs_sum / nn;
  m.rmse = std::sqrt(sq_sum / nn);
  p_mean /= nn;
  a_mean /= nn;

  double spp = 0.0, saa = 0.0, spa = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dp = predicted[i] - p_mean;
    const double da = actual[i] - a_mean;
    spp += dp * dp;
    saa += da * da;
    spa += dp * da;
  }
  if (spp > 0.0 && saa > 0.0) m.r2 = std::clamp(spa * spa / (spp * saa), 0.0, 1.0);
  return m;
}

double mean_absolute_error(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size() || predicted.empty())
    throw InvalidArgument("mae: series must be non-empty and of equal length");
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) sum += std::abs(predicted[i] - actual[i]);
  return sum / static_cast<double>(predicted.size());
}

double median_error(std::span<const double> errors) {
  if (errors.empty()) throw InvalidArgument("median of an empty list");
  std::vector<double> v(errors.begin(), errors.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lower + upper);
}

}  // namespace gsindy
