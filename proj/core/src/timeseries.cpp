#include "gsindy/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "gsindy/errors.hpp"

namespace gsindy {

namespace {

using std::chrono::days;
using std::chrono::sys_days;

bool parse_fixed(std::string_view text, std::size_t pos, std::size_t width, int& out) {
  if (pos + width > text.size()) return false;
  int value = 0;
  for (std::size_t i = pos; i < pos + width; ++i) {
    const char c = text[i];
    if (c < '0' || c > '9') return false;
    value = value * 10 + (c - '0');
  }
  out = value;
  return true;
}

long long floor_div(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Index of the grid point nearest to `offset` seconds past the grid origin; ties go to the earlier point.
long long nearest_index(long long offset, long long step) {
  const long long base = floor_div(offset, step);
  const long long rem = offset - base * step;
  return 2 * rem > step ? base + 1 : base;
}

}  // namespace

std::string format_timestamp(Timestamp t) {
  const sys_days day = std::chrono::floor<days>(t);
  const Date ymd{day};
  const std::chrono::hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  int year, month, day, hour, minute, second;
  if (text.size() < 20) return std::nullopt;
  if (!parse_fixed(text, 0, 4, year) || text[4] != '-' || !parse_fixed(text, 5, 2, month) ||
      text[7] != '-' || !parse_fixed(text, 8, 2, day))
    return std::nullopt;
  if (text[10] != 'T' && text[10] != 't' && text[10] != ' ') return std::nullopt;
  if (!parse_fixed(text, 11, 2, hour) || text[13] != ':' || !parse_fixed(text, 14, 2, minute) ||
      text[16] != ':' || !parse_fixed(text, 17, 2, second))
    return std::nullopt;
  if (hour > 23 || minute > 59 || second > 60) return std::nullopt;

  std::size_t pos = 19;
  double fraction = 0.0;
  if (pos < text.size() && text[pos] == '.') {
    const std::size_t begin = pos;
    ++pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
    if (pos == begin + 1) return std::nullopt;
    fraction = std::stod(std::string("0") + std::string(text.substr(begin, pos - begin)));
  }
  if (pos >= text.size()) return std::nullopt;
  long long offset_seconds = 0;
  if (text[pos] == 'Z' || text[pos] == 'z') {
    ++pos;
  } else if (text[pos] == '+' || text[pos] == '-') {
    int oh, om;
    if (!parse_fixed(text, pos + 1, 2, oh) || pos + 3 >= text.size() || text[pos + 3] != ':' ||
        !parse_fixed(text, pos + 4, 2, om))
      return std::nullopt;
    offset_seconds = (oh * 3600LL + om * 60LL) * (text[pos] == '-' ? -1 : 1);
    pos += 6;
  } else {
    return std::nullopt;
  }
  if (pos != text.size()) return std::nullopt;

  const Date ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                 std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok()) return std::nullopt;
  Timestamp t = sys_days{ymd} + std::chrono::hours{hour} + std::chrono::minutes{minute} +
                Seconds{second} - Seconds{offset_seconds};
  if (fraction >= 0.5) t += Seconds{1};
  return t;
}

std::string format_date(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

std::optional<Date> parse_date(std::string_view text) {
  int year, month, day;
  if (text.size() != 10 || !parse_fixed(text, 0, 4, year) || text[4] != '-' ||
      !parse_fixed(text, 5, 2, month) || text[7] != '-' || !parse_fixed(text, 8, 2, day))
    return std::nullopt;
  const Date ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                 std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok()) return std::nullopt;
  return ymd;
}

// --- UniformSeries / EventList ------------------------------------------------

UniformSeries::UniformSeries(Timestamp start, Seconds step, std::vector<double> values)
    : start_(start), step_(step), values_(std::move(values)) {
  if (step_ <= Seconds{0}) throw InvalidArgument("series step must be positive");
}

EventList::EventList(EventKind kind, std::vector<Event> events)
    : kind_(kind), events_(std::move(events)) {
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const double d = events_[i].dose;
    if (!std::isfinite(d) || d <= 0.0)
      throw InvalidArgument("event dose must be positive and finite at " +
                            format_timestamp(events_[i].time));
    if (i > 0 && events_[i].time <= events_[i - 1].time)
      throw InvalidArgument("event timestamps must be strictly increasing at " +
                            format_timestamp(events_[i].time));
  }
}

EventList EventList::slice(Timestamp from, Timestamp to) const {
  std::vector<Event> out;
  for (const Event& e : events_)
    if (e.time >= from && e.time < to) out.push_back(e);
  EventList result(kind_);
  result.events_ = std::move(out);
  return result;
}

std::string to_string(const ShiftConfig& s) {
  return "(bolus " + std::to_string(s.bolus_steps) + ", carbs " + std::to_string(s.carb_steps) + ")";
}

std::vector<ShiftConfig> shift_grid(std::span<const int> steps) {
  std::vector<int> sorted(steps.begin(), steps.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<ShiftConfig> out;
  for (int b : sorted)
    for (int c : sorted) out.push_back({b, c});
  return out;
}

// --- resampling ------------------------------------------------------------

Resampled resample_to_grid(std::span<const Sample> samples, const Grid& grid,
                           const FillPolicy& policy) {
  if (grid.length == 0) throw InvalidArgument("grid length must be at least 1");
  if (grid.step <= Seconds{0}) throw InvalidArgument("grid step must be positive");
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (samples[i].time < samples[i - 1].time)
      throw InvalidArgument("samples are not sorted by timestamp (at " +
                            format_timestamp(samples[i].time) + ")");

  const long long step = grid.step.count();
  std::vector<double> sum(grid.length, 0.0);
  std::vector<int> count(grid.length, 0);
  for (const Sample& s : samples) {
    const long long idx = nearest_index((s.time - grid.start).count(), step);
    if (idx < 0 || idx >= static_cast<long long>(grid.length)) continue;
    sum[idx] += s.value;
    ++count[idx];
  }

  std::vector<std::size_t> known;
  for (std::size_t i = 0; i < grid.length; ++i)
    if (count[i] > 0) known.push_back(i);
  if (known.empty())
    throw IncompleteDayError("no samples on grid starting " + format_timestamp(grid.start));

  std::vector<double> values(grid.length, 0.0);
  for (std::size_t i : known) values[i] = sum[i] / count[i];

  Resampled out;
  auto check_gap = [&](std::size_t first_missing, std::size_t last_missing, long long span_steps) {
    if (Seconds{span_steps * step} <= policy.max_gap) return;
    GapSpan gap{grid.at(first_missing), grid.at(last_missing)};
    if (policy.strict)
      throw IncompleteDayError("gap from " + format_timestamp(gap.first_missing) + " to " +
                               format_timestamp(gap.last_missing) + " exceeds the maximum of " +
                               std::to_string(policy.max_gap.count() / 60) + " min");
    out.long_gaps.push_back(gap);
  };

  if (known.front() > 0) {
    check_gap(0, known.front() - 1, static_cast<long long>(known.front()));
    std::fill(values.begin(), values.begin() + known.front(), values[known.front()]);
  }
  for (std::size_t k = 1; k < known.size(); ++k) {
    const std::size_t lo = known[k - 1];
    const std::size_t hi = known[k];
    if (hi - lo < 2) continue;
    check_gap(lo + 1, hi - 1, static_cast<long long>(hi - lo));
    for (std::size_t i = lo + 1; i < hi; ++i) {
      const double w = static_cast<double>(i - lo) / static_cast<double>(hi - lo);
      values[i] = (1.0 - w) * values[lo] + w * values[hi];
    }
  }
  if (known.back() + 1 < grid.length) {
    check_gap(known.back() + 1, grid.length - 1,
              static_cast<long long>(grid.length - 1 - known.back()));
    std::fill(values.begin() + known.back() + 1, values.end(), values[known.back()]);
  }

  out.series = UniformSeries(grid, std::move(values));
  return out;
}

UniformSeries sample_and_hold(std::span<const Sample> levels, const Grid& grid) {
  std::vector<double> values(grid.length, 0.0);
  std::size_t next = 0;
  double level = 0.0;
  for (std::size_t i = 0; i < grid.length; ++i) {
    const Timestamp t = grid.at(i);
    while (next < levels.size() && levels[next].time <= t) level = levels[next++].value;
    values[i] = level;
  }
  return UniformSeries(grid, std::move(values));
}

UniformSeries shift_series(const UniformSeries& s, int steps) {
  if (steps < 0 || static_cast<std::size_t>(steps) >= s.size())
    throw InvalidArgument("shift of " + std::to_string(steps) + " steps is out of range for a series of length " +
                          std::to_string(s.size()));
  std::vector<double> out(s.size(), 0.0);
  const auto v = s.values();
  std::copy(v.begin(), v.end() - steps, out.begin() + steps);
  return UniformSeries(s.start(), s.step(), std::move(out));
}

UniformSeries differentiate(const UniformSeries& s, double delta) {
  const std::size_t n = s.size();
  if (n < 3) throw InvalidArgument("differentiation needs at least 3 points");
  if (!(delta > 0.0)) throw InvalidArgument("differentiation step must be positive");
  std::vector<double> d(n);
  d[0] = (s[1] - s[0]) / delta;
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (s[i + 1] - s[i - 1]) / (2.0 * delta);
  d[n - 1] = (s[n - 1] - s[n - 2]) / delta;
  return UniformSeries(s.start(), s.step(), std::move(d));
}

DayInputs shifted_inputs(const DaySegment& day, const ShiftConfig& shifts) {
  if (!day.preprocessed())
    throw InvalidArgument("day " + format_date(day.date) +
                          " has no absorbed bolus/carb channels; run absorption first");
  return {shift_series(*day.carbs_abs, shifts.carb_steps),
          shift_series(*day.bolus_abs, shifts.bolus_steps), day.basal};
}

// --- day segmentation ----------------------------------------------------------

Segmentation segment_days(std::span<const Sample> glucose, std::span<const Sample> basal,
                          const EventList& bolus, const EventList& meals, const DayRule& rule) {
  constexpr long long kDay = 86400;
  const long long step = rule.step.count();
  if (step <= 0 || kDay % step != 0)
    throw InvalidArgument("grid step must divide one day evenly");
  const long long offset = std::chrono::duration_cast<Seconds>(rule.utc_offset).count();
  const std::size_t points_per_day = static_cast<std::size_t>(kDay / step);

  auto local = [&](Timestamp t) { return t.time_since_epoch().count() + offset; };
  auto day_of_event = [&](Timestamp t) { return floor_div(local(t), kDay); };
  auto day_of_sample = [&](Timestamp t) {
    return floor_div(nearest_index(local(t), step) * step, kDay);
  };

  std::map<long long, IncompleteDay> tallies;
  auto tally = [&](long long d) -> IncompleteDay& {
    auto [it, inserted] = tallies.try_emplace(d);
    if (inserted) it->second.date = Date{sys_days{days{d}}};
    return it->second;
  };
  for (const Sample& s : glucose) ++tally(day_of_sample(s.time)).glucose_samples;
  for (const Sample& s : basal) ++tally(day_of_event(s.time)).basal_samples;
  for (const Event& e : bolus.events()) ++tally(day_of_event(e.time)).bolus_events;
  for (const Event& e : meals.events()) ++tally(day_of_event(e.time)).meal_events;

  Segmentation out;
  if (tallies.empty()) throw PipelineError("no data: every channel is empty");

  const long long first = tallies.begin()->first;
  const long long last = tallies.rbegin()->first;
  std::size_t cursor = 0;  // glucose samples are consumed in order
  for (long long d = first; d <= last; ++d) {
    IncompleteDay info = tally(d);
    const Grid grid{Timestamp{Seconds{d * kDay - offset}}, rule.step, points_per_day};

    const std::size_t begin = cursor;
    while (cursor < glucose.size() && day_of_sample(glucose[cursor].time) == d) ++cursor;
    const auto day_samples = glucose.subspan(begin, cursor - begin);

    if (day_samples.empty()) {
      info.reason = "no glucose samples";
      out.incomplete.push_back(std::move(info));
      continue;
    }
    try {
      FillPolicy strict = rule.policy;
      strict.strict = true;
      DaySegment seg;
      seg.date = info.date;
      seg.glucose = resample_to_grid(day_samples, grid, strict).series;
      seg.basal = sample_and_hold(basal, grid);
      seg.bolus_raw = bolus.slice(grid.start, grid.end());
      seg.carbs_raw = meals.slice(grid.start, grid.end());
      out.days.push_back(std::move(seg));
    } catch (const IncompleteDayError& e) {
      info.reason = e.what();
      out.incomplete.push_back(std::move(info));
    }
  }
  if (cursor != glucose.size())
    throw InvalidArgument("glucose samples are not sorted by timestamp");

  if (out.days.empty()) throw PipelineError("no complete day in the dataset");
  if (out.days.size() == 1)
    out.warnings.push_back("only one complete day; the shift grid search needs at least 2");
  return out;
}

DaySplit split_first_n(std::vector<DaySegment> days, std::size_t n_train) {
  std::sort(days.begin(), days.end(),
            [](const DaySegment& a, const DaySegment& b) { return sys_days{a.date} < sys_days{b.date}; });
  DaySplit split;
  const std::size_t n = std::min(n_train, days.size());
  split.train.assign(std::make_move_iterator(days.begin()), std::make_move_iterator(days.begin() + n));
  split.test.assign(std::make_move_iterator(days.begin() + n), std::make_move_iterator(days.end()));
  return split;
}

}  // namespace gsindy
