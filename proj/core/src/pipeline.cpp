#include "gsindy/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gsindy/errors.hpp"
#include "gsindy/parallel.hpp"

namespace gsindy {

namespace {

constexpr double kFailedError = std::numeric_limits<double>::infinity();

bool date_less(const DaySegment& a, const DaySegment& b) {
  return std::chrono::sys_days{a.date} < std::chrono::sys_days{b.date};
}

std::vector<ShiftConfig> canonical_shifts(std::span<const ShiftConfig> grid) {
  std::vector<ShiftConfig> out(grid.begin(), grid.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw InvalidArgument("shift grid is empty");
  return out;
}

// Training days in date order with absorbed channels, plus every shifted input set.
struct Workspace {
  std::vector<DaySegment> days;
  std::vector<ShiftConfig> shifts;
  std::vector<DayInputs> inputs;  // [day * shifts + shift]

  Workspace(std::span<const DaySegment> train_days, const PipelineOptions& options)
      : days(prepare_days({train_days.begin(), train_days.end()}, options)),
        shifts(canonical_shifts(options.shift_grid)) {
    std::sort(days.begin(), days.end(), date_less);
    for (std::size_t i = 1; i < days.size(); ++i)
      if (days[i].date == days[i - 1].date)
        throw InvalidArgument("duplicate training day " + format_date(days[i].date));
    inputs.reserve(days.size() * shifts.size());
    for (const DaySegment& d : days)
      for (const ShiftConfig& s : shifts) inputs.push_back(shifted_inputs(d, s));
  }

  std::size_t n_days() const { return days.size(); }
  std::size_t n_shifts() const { return shifts.size(); }
  const DayInputs& at(std::size_t day, std::size_t shift) const { return inputs[day * shifts.size() + shift]; }
};

FittedCell fit_cell(const DaySegment& day, const ShiftConfig& shifts, const PipelineOptions& options) {
  FittedCell cell{day.date, shifts, std::nullopt, {}};
  try {
    cell.model = fit_day(day, shifts, options.hyper, options.simulation.unit);
  } catch (const Error& e) {
    cell.error = e.what();
  }
  return cell;
}

// Scores one model on every other day under every shift, in canonical order.
void score_cell(const FittedCell& cell, std::size_t train_index, const Workspace& ws,
                const PipelineOptions& options, GridSearchRecord* out) {
  for (std::size_t e = 0; e < ws.n_days(); ++e) {
    if (e == train_index) continue;
    const DaySegment& eval = ws.days[e];
    for (std::size_t s = 0; s < ws.n_shifts(); ++s) {
      GridSearchRecord& r = *out++;
      r = {cell.day, cell.shifts, eval.date, ws.shifts[s], kFailedError, false, !cell.model};
      if (!cell.model) continue;
      const SimulationResult sim = simulate_day(*cell.model, eval.glucose[0], ws.at(e, s), options.simulation);
      r.mae = mean_absolute_error(sim.trajectory.values(), eval.glucose.values());
      r.diverged = sim.diverged;
    }
  }
}

double mean_of(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

}  // namespace

std::vector<ShiftConfig> default_shift_grid() {
  const int steps[] = {1, 2, 3, 4, 5, 6};
  return shift_grid(steps);
}

const FittedCell* GridSearchResult::find(const Date& day, const ShiftConfig& shifts) const {
  for (const FittedCell& c : models)
    if (c.day == day && c.shifts == shifts) return &c;
  return nullptr;
}

std::vector<DaySegment> prepare_days(std::vector<DaySegment> days, const PipelineOptions& options) {
  for (DaySegment& d : days)
    if (!d.preprocessed()) d = absorb_day(std::move(d), options.absorption, options.simulation.unit);
  return days;
}

GridSearchResult grid_search_shifts(std::span<const DaySegment> train_days, const PipelineOptions& options) {
  if (train_days.size() < 2) throw InvalidArgument("shift grid search needs at least 2 training days");
  const Workspace ws(train_days, options);
  const std::size_t D = ws.n_days();
  const std::size_t S = ws.n_shifts();

  GridSearchResult result;
  result.models.resize(D * S);
  parallel_for(D * S, options.jobs, [&](std::size_t i) {
    result.models[i] = fit_cell(ws.days[i / S], ws.shifts[i % S], options);
  });
  std::size_t failures = 0;
  for (const FittedCell& c : result.models)
    if (!c.model) {
      ++failures;
      result.warnings.push_back(c.error);
    }
  if (failures == result.models.size()) throw PipelineError("every grid-search fit failed");

  const std::size_t per_model = (D - 1) * S;
  std::vector<GridSearchRecord>& records = result.selection.records;
  records.resize(D * S * per_model);
  parallel_for(D * S, options.jobs, [&](std::size_t i) {
    score_cell(result.models[i], i / S, ws, options, records.data() + i * per_model);
  });

  std::vector<double> medians(D * S);
  for (std::size_t i = 0; i < D * S; ++i) {
    std::vector<double> errs(per_model);
    for (std::size_t k = 0; k < per_model; ++k) errs[k] = records[i * per_model + k].mae;
    medians[i] = median_error(errs);
  }

  const std::size_t keep = std::max<std::size_t>(
      1, std::min<std::size_t>(D, static_cast<std::size_t>(std::ceil(options.top_fraction * static_cast<double>(D) - 1e-9))));
  std::optional<std::size_t> best;
  for (std::size_t s = 0; s < S; ++s) {
    std::vector<std::size_t> order(D);
    std::iota(order.begin(), order.end(), 0);
    // Days are in date order, so a stable sort breaks ties by earlier date.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return medians[a * S + s] < medians[b * S + s]; });
    ShiftSummary summary{ws.shifts[s], 0.0, {}};
    std::vector<double> retained_errors;
    for (std::size_t k = 0; k < keep; ++k) {
      const std::size_t cell = order[k] * S + s;
      summary.retained.push_back(ws.days[order[k]].date);
      for (std::size_t r = 0; r < per_model; ++r)
        if (options.scoring == ShiftScoring::all_shifts || r % S == s)
          retained_errors.push_back(records[cell * per_model + r].mae);
    }
    summary.score = mean_of(retained_errors);
    if (!best || summary.score < result.selection.summary[*best].score) best = s;
    result.selection.summary.push_back(std::move(summary));
  }
  result.selection.chosen = ws.shifts[*best];
  return result;
}

ModelSelection select_best_model(std::span<const DaySegment> train_days, const ShiftConfig& chosen,
                                 const PipelineOptions& options, const GridSearchResult* cache) {
  if (train_days.size() < 2) throw InvalidArgument("model selection needs at least 2 training days");
  const Workspace ws(train_days, options);
  const std::size_t D = ws.n_days();
  const std::size_t per_model = (D - 1) * ws.n_shifts();

  std::vector<FittedCell> cells(D);
  std::vector<double> scores(D, kFailedError);
  parallel_for(D, options.jobs, [&](std::size_t d) {
    const FittedCell* cached = cache ? cache->find(ws.days[d].date, chosen) : nullptr;
    cells[d] = cached ? *cached : fit_cell(ws.days[d], chosen, options);
    if (!cells[d].model) return;

    std::vector<double> errs;
    if (cached) {
      for (const GridSearchRecord& r : cache->selection.records)
        if (r.train_day == ws.days[d].date && r.train_shifts == chosen) errs.push_back(r.mae);
    }
    if (errs.size() != per_model) {
      std::vector<GridSearchRecord> recs(per_model);
      score_cell(cells[d], d, ws, options, recs.data());
      errs.clear();
      for (const GridSearchRecord& r : recs) errs.push_back(r.mae);
    }
    scores[d] = mean_of(errs);
  });

  std::optional<std::size_t> best;
  ModelSelection out;
  for (std::size_t d = 0; d < D; ++d) {
    out.scores.emplace_back(ws.days[d].date, scores[d]);
    if (std::isfinite(scores[d]) && (!best || scores[d] < scores[*best])) best = d;
  }
  if (!best) throw PipelineError("no candidate model under shifts " + to_string(chosen) + " could be scored");
  out.model = *cells[*best].model;
  out.day = ws.days[*best].date;
  return out;
}

TestReport evaluate_test(const SparseModel& model, const ShiftConfig& shifts,
                         std::span<const DaySegment> test_days, const PipelineOptions& options,
                         std::span<const Date> train_dates) {
  if (test_days.empty()) throw InvalidArgument("test set is empty");
  std::vector<DaySegment> days = prepare_days({test_days.begin(), test_days.end()}, options);
  std::sort(days.begin(), days.end(), date_less);
  for (const DaySegment& d : days) {
    const bool trained_on = (model.provenance.train_day && *model.provenance.train_day == d.date) ||
                            std::find(train_dates.begin(), train_dates.end(), d.date) != train_dates.end();
    if (trained_on) throw PipelineError("test day " + format_date(d.date) + " was used for training");
  }

  TestReport report;
  report.days.resize(days.size());
  parallel_for(days.size(), options.jobs, [&](std::size_t i) {
    const DaySegment& d = days[i];
    const double g0 = d.glucose[0];
    const SimulationResult sim = simulate_day(model, g0, shifted_inputs(d, shifts), options.simulation);
    const UniformSeries baseline = constant_model(g0, d.grid());
    TestDayResult& row = report.days[i];
    row.date = d.date;
    row.sindy = compute_metrics(sim.trajectory.values(), d.glucose.values());
    row.constant = compute_metrics(baseline.values(), d.glucose.values());
    row.diverged = sim.diverged;
    row.constant_unbeatable = row.constant.mae == 0.0;
    row.predicted = sim.trajectory;
    row.actual = d.glucose;
  });

  const double n = static_cast<double>(report.days.size());
  double r2_sum = 0.0;
  std::size_t r2_count = 0;
  for (const TestDayResult& r : report.days) {
    report.rmse_sindy += r.sindy.rmse / n;
    report.rmse_constant += r.constant.rmse / n;
    report.mae_sindy += r.sindy.mae / n;
    report.mae_constant += r.constant.mae / n;
    if (r.sindy.r2) {
      r2_sum += *r.sindy.r2;
      ++r2_count;
    }
  }
  if (r2_count > 0) report.r2_sindy = r2_sum / static_cast<double>(r2_count);
  return report;
}

}  // namespace gsindy
