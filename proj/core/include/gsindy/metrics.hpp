#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace gsindy {

struct MetricsRecord {
  double mae = 0.0;   // mg/dL
  double rmse = 0.0;  // mg/dL
  /// Squared Pearson correlation; empty when either series has zero variance.
  std::optional<double> r2;
  std::size_t n = 0;
};

/// Throws InvalidArgument on length mismatch or fewer than 2 points.
MetricsRecord compute_metrics(std::span<const double> predicted, std::span<const double> actual);

/// Mean absolute error alone; used for ranking where R² is not needed.
double mean_absolute_error(std::span<const double> predicted, std::span<const double> actual);

/// Median; the mean of the two central values for even counts. Throws on empty input.
double median_error(std::span<const double> errors);

}  // namespace gsindy
