#include "gsindy/absorption.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gsindy/errors.hpp"

namespace gsindy {

double t50(double dose, const BergerParams& p) {
  if (!(dose > 0.0)) throw InvalidArgument("dose must be positive, got " + std::to_string(dose));
  const double value = p.t50_form == T50Form::product ? p.a * dose * p.b : p.a * dose + p.b;
  if (!(value > 0.0) || !std::isfinite(value))
    throw InvalidArgument("T50 must be positive, got " + std::to_string(value));
  return value;
}

namespace {

double rate_with_t50(double dose, double t, double half_time, double s) {
  if (t <= 0.0) return 0.0;
  const double ts = std::pow(t, s);
  const double hs = std::pow(half_time, s);
  const double denom = hs + ts;
  return s * ts * hs * dose / (t * denom * denom);
}

}  // namespace

double absorption_rate(double dose, double minutes, const BergerParams& p) {
  return rate_with_t50(dose, minutes, t50(dose, p), p.s);
}

double cumulative_absorption(double dose, double minutes, const BergerParams& p) {
  if (minutes <= 0.0) return 0.0;
  const double ts = std::pow(minutes, p.s);
  return dose * ts / (std::pow(t50(dose, p), p.s) + ts);
}

Bergerized bergerize(const EventList& events, const BergerParams& p, const Grid& grid,
                     const TimeUnit& unit, int substeps) {
  if (grid.length == 0) throw InvalidArgument("grid length must be at least 1");
  if (substeps < 1) throw InvalidArgument("substeps must be at least 1");
  if (!(p.s > 0.0) || !(p.decay_rate > 0.0))
    throw InvalidArgument("Berger shape s and decay rate k must be positive");

  struct Dose {
    double onset;  // minutes after grid start
    double amount;
    double half_time;
  };
  Bergerized out;
  std::vector<Dose> doses;
  for (const Event& e : events.events()) {
    if (e.time < grid.start || e.time >= grid.end()) out.outside_span.push_back(e.time);
    if (e.time >= grid.end()) continue;
    doses.push_back({static_cast<double>((e.time - grid.start).count()) / 60.0, e.dose,
                     t50(e.dose, p)});
  }

  const double k = p.decay_rate / unit.minutes;  // per minute
  const double h = static_cast<double>(grid.step.count()) / 60.0 / substeps;
  auto input = [&](double t) {
    double sum = 0.0;
    for (const Dose& d : doses) sum += rate_with_t50(d.amount, t - d.onset, d.half_time, p.s);
    return sum;
  };

  std::vector<double> level(grid.length, 0.0);
  const double step_minutes = static_cast<double>(grid.step.count()) / 60.0;
  double a = 0.0;
  for (std::size_t i = 1; i < grid.length; ++i) {
    for (int j = 0; j < substeps; ++j) {
      const double t = static_cast<double>(i - 1) * step_minutes + j * h;
      const double r0 = input(t);
      const double rm = input(t + 0.5 * h);
      const double r1 = input(t + h);
      const double k1 = r0 - k * a;
      const double k2 = rm - k * (a + 0.5 * h * k1);
      const double k3 = rm - k * (a + 0.5 * h * k2);
      const double k4 = r1 - k * (a + h * k3);
      a = std::max(0.0, a + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    }
    level[i] = a;
  }
  out.series = UniformSeries(grid, std::move(level));
  return out;
}

DaySegment absorb_day(DaySegment day, const AbsorptionConfig& config, const TimeUnit& unit) {
  const Grid grid = day.grid();
  day.bolus_abs = bergerize(day.bolus_raw, config.bolus, grid, unit, config.substeps).series;
  day.carbs_abs = bergerize(day.carbs_raw, config.meal, grid, unit, config.substeps).series;
  return day;
}

}  // namespace gsindy
