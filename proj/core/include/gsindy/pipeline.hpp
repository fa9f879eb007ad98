#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gsindy/absorption.hpp"
#include "gsindy/metrics.hpp"
#include "gsindy/simulate.hpp"
#include "gsindy/sindy.hpp"
#include "gsindy/timeseries.hpp"

namespace gsindy {

/// Which records of the retained models enter a shift's score.
enum class ShiftScoring {
  own_shift,   ///< only simulations run under the candidate shift itself
  all_shifts,  ///< every simulation of the retained models
};

struct PipelineOptions {
  SindyHyper hyper{};
  AbsorptionConfig absorption{};
  SimulationOptions simulation{};  // also carries the model time unit
  std::vector<ShiftConfig> shift_grid;
  /// Share of models kept per shift when scoring shifts (rounded up, at least one).
  double top_fraction = 0.10;
  ShiftScoring scoring = ShiftScoring::own_shift;
  std::size_t jobs = 1;
};

/// Default grid: bolus and carb shifts of 1..6 steps.
std::vector<ShiftConfig> default_shift_grid();

/// One cell of the shift search: a model fitted on `train_day` under
/// `train_shifts`, simulated on `eval_day` under `eval_shifts`.
struct GridSearchRecord {
  Date train_day;
  ShiftConfig train_shifts;
  Date eval_day;
  ShiftConfig eval_shifts;
  double mae = 0.0;       // +inf when the fit failed
  bool diverged = false;
  bool failed = false;    // the model could not be fitted
};

struct ShiftSummary {
  ShiftConfig shifts;
  double score = 0.0;  ///< mean MAE over the scored records of the retained models
  std::vector<Date> retained;  ///< training days of the retained models, best first
};

struct ShiftSelection {
  ShiftConfig chosen;
  std::vector<ShiftSummary> summary;  // one per grid shift, in grid order
  std::vector<GridSearchRecord> records;  // canonical order
};

struct FittedCell {
  Date day;
  ShiftConfig shifts;
  std::optional<SparseModel> model;  // empty when the fit failed
  std::string error;
};

struct GridSearchResult {
  ShiftSelection selection;
  std::vector<FittedCell> models;  // ordered by (day, shifts)
  std::vector<std::string> warnings;

  const FittedCell* find(const Date& day, const ShiftConfig& shifts) const;
};

/// Runs absorption on days that have not been preprocessed yet.
std::vector<DaySegment> prepare_days(std::vector<DaySegment> days, const PipelineOptions& options);

/// Step 1: fit one model per (train day, shift), score every model on every
/// other day under every shift, rank models per training shift by median MAE,
/// keep the best `top_fraction`, and pick the shift whose retained records have
/// the lowest mean MAE (ties: smallest (bolus, carb)). With own_shift scoring
/// only the retained models' simulations under the candidate shift count.
GridSearchResult grid_search_shifts(std::span<const DaySegment> train_days, const PipelineOptions& options);

struct ModelSelection {
  SparseModel model;
  Date day;
  std::vector<std::pair<Date, double>> scores;  // mean validation MAE per training day
};

/// Step 2: among the models fitted under `chosen`, pick the one with the lowest
/// mean MAE over all other training days and all grid shifts (ties: earlier
/// date). Reuses fits and records from `cache` when given.
ModelSelection select_best_model(std::span<const DaySegment> train_days, const ShiftConfig& chosen,
                                 const PipelineOptions& options, const GridSearchResult* cache = nullptr);

struct TestDayResult {
  Date date;
  MetricsRecord sindy;
  MetricsRecord constant;
  bool diverged = false;
  bool constant_unbeatable = false;  ///< the constant model is exact on this day
  UniformSeries predicted;
  UniformSeries actual;
};

struct TestReport {
  std::vector<TestDayResult> days;
  double rmse_sindy = 0.0, rmse_constant = 0.0;
  double mae_sindy = 0.0, mae_constant = 0.0;
  std::optional<double> r2_sindy;  ///< mean over days where R² is defined
};

/// Step 3: simulate each test day from its first glucose value and compare
/// with the constant baseline. Throws PipelineError if a test day was used to
/// train the model (by provenance or by `train_dates`).
TestReport evaluate_test(const SparseModel& model, const ShiftConfig& shifts,
                         std::span<const DaySegment> test_days, const PipelineOptions& options,
                         std::span<const Date> train_dates = {});

// --- artifacts -----------------------------------------------------------------

/// train_day,train_bolus_shift,train_carb_shift,eval_day,eval_bolus_shift,eval_carb_shift,mae,diverged,failed
void write_records_csv(std::span<const GridSearchRecord> records, std::ostream& out);
std::vector<GridSearchRecord> read_records_csv(std::istream& in);

std::string shift_selection_to_json(const ShiftSelection& selection);
/// Reads `chosen` and the summary; records are not part of the JSON.
ShiftSelection shift_selection_from_json(std::string_view text);

/// day,rmse_sindy,rmse_cm,mae_sindy,mae_cm,r2_sindy with a final Average row.
void write_report_csv(const TestReport& report, std::ostream& out);

/// timestamp,predicted,actual
void write_trajectory_csv(const TestDayResult& day, std::ostream& out);

struct TrajectoryRows {
  std::vector<Timestamp> time;
  std::vector<double> predicted;
  std::vector<double> actual;
};
TrajectoryRows read_trajectory_csv(std::istream& in);

}  // namespace gsindy
