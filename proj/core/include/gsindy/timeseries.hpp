#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gsindy {

using Timestamp = std::chrono::sys_seconds;
using Seconds = std::chrono::seconds;
using Date = std::chrono::year_month_day;

inline constexpr Seconds kDefaultStep{300};

/// Unit of time used for derivatives, integration and decay rates.
/// The default makes one 5-minute grid step equal to one time unit.
struct TimeUnit {
  double minutes = 5.0;
  /// Length of a grid step of `step` seconds in this unit.
  double steps_to_units(Seconds step) const { return static_cast<double>(step.count()) / 60.0 / minutes; }
};

/// Formats as RFC 3339 in UTC, e.g. "2027-05-13T00:05:00Z".
std::string format_timestamp(Timestamp t);
/// Parses RFC 3339 (`Z` or numeric offset, optional fractional seconds rounded to the second).
std::optional<Timestamp> parse_timestamp(std::string_view text);
/// "2027-05-13".
std::string format_date(Date d);
std::optional<Date> parse_date(std::string_view text);

struct Sample {
  Timestamp time;
  double value = 0.0;
  bool operator==(const Sample&) const = default;
};

/// Regular sampling grid: `length` points starting at `start`, `step` apart.
struct Grid {
  Timestamp start{};
  Seconds step = kDefaultStep;
  std::size_t length = 0;

  Timestamp at(std::size_t i) const { return start + step * static_cast<long long>(i); }
  /// One step past the last grid point.
  Timestamp end() const { return at(length); }
  bool operator==(const Grid&) const = default;
};

/// Values on a uniform grid. Immutable once built.
class UniformSeries {
 public:
  UniformSeries() = default;
  UniformSeries(Timestamp start, Seconds step, std::vector<double> values);
  UniformSeries(const Grid& grid, std::vector<double> values)
      : UniformSeries(grid.start, grid.step, std::move(values)) {}

  Timestamp start() const { return start_; }
  Seconds step() const { return step_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  Grid grid() const { return {start_, step_, values_.size()}; }
  Timestamp time_at(std::size_t i) const { return grid().at(i); }

  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Same start, step and length.
  bool aligned_with(const UniformSeries& other) const { return grid() == other.grid(); }

  bool operator==(const UniformSeries&) const = default;

 private:
  Timestamp start_{};
  Seconds step_ = kDefaultStep;
  std::vector<double> values_;
};

enum class EventKind { bolus, meal };

struct Event {
  Timestamp time;
  double dose = 0.0;  // insulin units for bolus, grams of carbohydrate for meals
  bool operator==(const Event&) const = default;
};

/// Impulse doses. Timestamps strictly increasing, doses positive and finite.
class EventList {
 public:
  explicit EventList(EventKind kind = EventKind::bolus) : kind_(kind) {}
  /// Validates ordering and doses; throws InvalidArgument.
  EventList(EventKind kind, std::vector<Event> events);

  EventKind kind() const { return kind_; }
  std::span<const Event> events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }

  /// Events with time in [from, to).
  EventList slice(Timestamp from, Timestamp to) const;

  bool operator==(const EventList&) const = default;

 private:
  EventKind kind_;
  std::vector<Event> events_;
};

/// Delay applied to the absorbed input channels, in grid steps.
struct ShiftConfig {
  int bolus_steps = 0;
  int carb_steps = 0;
  auto operator<=>(const ShiftConfig&) const = default;
};

std::string to_string(const ShiftConfig& s);

/// Every (bolus, carb) pair drawn from `steps`, ordered lexicographically.
std::vector<ShiftConfig> shift_grid(std::span<const int> steps);

// --- resampling -----------------------------------------------------------

struct FillPolicy {
  /// Longest span between known grid points that is bridged by interpolation.
  Seconds max_gap{1800};
  /// Strict: a longer gap throws IncompleteDayError. Lenient: it is filled anyway and reported.
  bool strict = true;
};

struct GapSpan {
  Timestamp first_missing;
  Timestamp last_missing;
};

struct Resampled {
  UniformSeries series;
  std::vector<GapSpan> long_gaps;  // only populated under a lenient policy
};

/// Places time-sorted samples on `grid`. Each sample goes to its nearest grid
/// point (ties to the earlier one); several samples on one point are averaged;
/// samples whose nearest point is off-grid are ignored. Missing interior points
/// are linearly interpolated, missing head/tail points hold the nearest value.
Resampled resample_to_grid(std::span<const Sample> samples, const Grid& grid,
                           const FillPolicy& policy = {});

/// Zero-order hold of a step-function channel (each sample is a new level).
/// Grid points before the first sample are 0.
UniformSeries sample_and_hold(std::span<const Sample> levels, const Grid& grid);

/// Delays `s` by `steps` points: out[i] = s[i - steps], zero-padded head.
UniformSeries shift_series(const UniformSeries& s, int steps);

/// Central differences inside, first-order one-sided at both ends.
/// `delta` is the grid step expressed in model time units.
UniformSeries differentiate(const UniformSeries& s, double delta = 1.0);

// --- day segmentation -----------------------------------------------------

/// One calendar day of aligned channels.
///
/// `bolus_abs`/`carbs_abs` hold the absorbed (bergerized) channels once
/// `absorb_day` has run; shifts are applied per fit, so they are stored unshifted.
struct DaySegment {
  Date date;
  UniformSeries glucose;
  UniformSeries basal;
  EventList bolus_raw{EventKind::bolus};
  EventList carbs_raw{EventKind::meal};
  std::optional<UniformSeries> bolus_abs;
  std::optional<UniformSeries> carbs_abs;

  Grid grid() const { return glucose.grid(); }
  bool preprocessed() const { return bolus_abs.has_value() && carbs_abs.has_value(); }
};

/// The exogenous inputs a model sees on one day, after shifting.
struct DayInputs {
  UniformSeries carbs;   // C
  UniformSeries bolus;   // B
  UniformSeries basal;   // b
};

/// Shifts the absorbed channels of a preprocessed day. Throws InvalidArgument if
/// the day has not been absorbed.
DayInputs shifted_inputs(const DaySegment& day, const ShiftConfig& shifts);

struct DayRule {
  /// Offset of local time from UTC; day boundaries are local midnights.
  std::chrono::minutes utc_offset{0};
  Seconds step = kDefaultStep;
  FillPolicy policy{};
};

struct IncompleteDay {
  Date date;
  std::string reason;
  std::size_t glucose_samples = 0;
  std::size_t basal_samples = 0;
  std::size_t bolus_events = 0;
  std::size_t meal_events = 0;
};

struct Segmentation {
  std::vector<DaySegment> days;
  std::vector<IncompleteDay> incomplete;
  std::vector<std::string> warnings;
};

/// Splits the channels into calendar days. Every glucose sample lands in exactly
/// one complete day or one incomplete-day report. Throws PipelineError if no day
/// is complete.
Segmentation segment_days(std::span<const Sample> glucose, std::span<const Sample> basal,
                          const EventList& bolus, const EventList& meals,
                          const DayRule& rule = {});

struct DaySplit {
  std::vector<DaySegment> train;
  std::vector<DaySegment> test;
};

/// First `n_train` days (in date order) train, the rest test.
DaySplit split_first_n(std::vector<DaySegment> days, std::size_t n_train);

}  // namespace gsindy
