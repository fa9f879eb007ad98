#pragma once

#include <vector>

#include "gsindy/timeseries.hpp"

namespace gsindy {

enum class T50Form {
  product,  ///< T50 = a * D * b (as commonly printed)
  affine,   ///< T50 = a * D + b
};

/// Berger absorption model parameters. `decay_rate` is per model time unit.
struct BergerParams {
  double s = 1.6;
  double a = 5.2;
  double b = 41.0;
  T50Form t50_form = T50Form::product;
  double decay_rate = 1.0;
};

/// Dose-dependent half-absorption time, in minutes.
double t50(double dose, const BergerParams& p);

/// Absorption rate (dose units per minute) `minutes` after a dose:
///   s * t^s * T50^s * D / (t * (T50^s + t^s)^2),
/// the derivative of `cumulative_absorption`. Zero for t <= 0.
double absorption_rate(double dose, double minutes, const BergerParams& p);

/// Amount absorbed by `minutes` after the dose: D * t^s / (T50^s + t^s).
double cumulative_absorption(double dose, double minutes, const BergerParams& p);

struct Bergerized {
  UniformSeries series;
  /// Events that start before the grid or after its end; they only act inside the span.
  std::vector<Timestamp> outside_span;
};

/// Plasma level A on `grid` from
///   dA/dt = sum_j absorption_rate(D_j, t - t_j) - k * A,  A(start) = 0,
/// integrated with fixed-step RK4, `substeps` per grid interval.
Bergerized bergerize(const EventList& events, const BergerParams& p, const Grid& grid,
                     const TimeUnit& unit = {}, int substeps = 4);

/// Per-channel absorption settings; meals default to the bolus parameters.
struct AbsorptionConfig {
  BergerParams bolus;
  BergerParams meal;
  int substeps = 4;
};

/// Fills `bolus_abs`/`carbs_abs` of a day (unshifted).
DaySegment absorb_day(DaySegment day, const AbsorptionConfig& config, const TimeUnit& unit = {});

}  // namespace gsindy
