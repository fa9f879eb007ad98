#pragma once

#include <optional>

#include "gsindy/sindy.hpp"
#include "gsindy/timeseries.hpp"

namespace gsindy {

struct SimulationOptions {
  int substeps = 4;       ///< RK4 steps per grid interval; an odd count has its middle step split at the input switch
  double g_min = 0.0;     ///< guard band, mg/dL
  double g_max = 1000.0;
  TimeUnit unit{};
};

struct SimulationResult {
  UniformSeries trajectory;
  bool diverged = false;
  /// First grid index outside the guard band; every value from here on is clamped.
  std::optional<std::size_t> divergence_index;
  Provenance provenance;
};

/// Right-hand side dG/dt of `model` at one point.
double evaluate_rhs(const SparseModel& model, double glucose, double carbs, double bolus, double basal);

/// Integrates the model over the input grid from `g0` with RK4. Inputs are held
/// piecewise constant: within each grid interval the left sample applies up to
/// the midpoint, the right sample after it. Leaving the guard band clamps the
/// rest of the trajectory and sets `diverged`.
SimulationResult simulate_day(const SparseModel& model, double g0, const DayInputs& inputs,
                              const SimulationOptions& options = {});

/// Baseline: `g0` repeated over the grid.
UniformSeries constant_model(double g0, const Grid& grid);

/// The ten-term glucose model with literature coefficients p0..p9:
/// 1, b, C, G, B·b, b², C·b, G·b, C·G, G².
SparseModel reference_model();

}  // namespace gsindy
