#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "gsindy/errors.hpp"
#include "gsindy/ingest.hpp"

namespace gsindy {

namespace {

using std::chrono::minutes;
using std::chrono::sys_days;

constexpr long long kStepMinutes = 5;

Timestamp snap(Timestamp day_start, double minute_of_day) {
  const long long m = std::llround(minute_of_day / kStepMinutes) * kStepMinutes;
  return day_start + minutes{std::clamp<long long>(m, 0, 24 * 60 - kStepMinutes)};
}

double round_to(double v, double quantum) { return std::round(v / quantum) * quantum; }

}  // namespace

SparseModel default_planted_model() {
  using V = Variable;
  SparseModel m;
  m.terms = {TermDescriptor::monomial({{V::glucose, 1}}),
             TermDescriptor::monomial({{V::bolus, 1}, {V::glucose, 1}}),
             TermDescriptor::monomial({{V::carbs, 2}})};
  m.coefficients = {-0.05, -0.5, 20.0};
  return m;
}

SparseModel parse_model_expression(std::string_view text) {
  SparseModel model;
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  auto fail = [&](const std::string& why) -> ParseError {
    return ParseError("model expression at column " + std::to_string(pos + 1) + ": " + why, 0);
  };
  skip();
  if (pos == text.size()) return model;  // "dG/dt = 0"
  bool first = true;
  while (pos < text.size()) {
    double sign = 1.0;
    skip();
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
      sign = text[pos] == '-' ? -1.0 : 1.0;
      ++pos;
    } else if (!first) {
      throw fail("expected '+' or '-'");
    }
    first = false;
    skip();
    double coefficient = 1.0;
    bool have_number = false;
    {
      std::size_t end = pos;
      while (end < text.size() && (std::isdigit(static_cast<unsigned char>(text[end])) || text[end] == '.' ||
                                   text[end] == 'e' || text[end] == 'E' ||
                                   ((text[end] == '-' || text[end] == '+') && end > pos &&
                                    (text[end - 1] == 'e' || text[end - 1] == 'E'))))
        ++end;
      if (end > pos) {
        try {
          coefficient = std::stod(std::string(text.substr(pos, end - pos)));
        } catch (const std::exception&) {
          throw fail("bad number");
        }
        have_number = true;
        pos = end;
      }
    }
    TermDescriptor term;
    bool need_factor = !have_number;
    skip();
    while (pos < text.size() && (need_factor || text[pos] == '*')) {
      if (!need_factor) ++pos;  // '*'
      skip();
      if (pos >= text.size()) throw fail("expected a variable");
      const auto v = variable_from_symbol(text.substr(pos, 1));
      if (!v) throw fail("unknown variable '" + std::string(text.substr(pos, 1)) + "'");
      ++pos;
      int power = 1;
      if (pos < text.size() && text[pos] == '^') {
        ++pos;
        if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos]))) throw fail("expected exponent");
        power = text[pos++] - '0';
      }
      term.exponents[static_cast<std::size_t>(*v)] += power;
      need_factor = false;
      skip();
    }
    const double c = sign * coefficient;
    auto it = std::find(model.terms.begin(), model.terms.end(), term);
    if (it != model.terms.end()) {
      model.coefficients[static_cast<std::size_t>(it - model.terms.begin())] += c;
    } else {
      model.terms.push_back(term);
      model.coefficients.push_back(c);
    }
    skip();
  }
  return model;
}

SynthResult synthesize_dataset(const SynthSpec& spec) {
  if (spec.n_days < 1) throw InvalidArgument("synthetic dataset needs n_days >= 1");
  if (spec.noise_sd < 0.0) throw InvalidArgument("noise_sd must be non-negative");
  const EventSchedule& ev = spec.schedule;
  if (ev.meals_min < 1 || ev.meals_max < ev.meals_min) throw InvalidArgument("bad meal count range");
  if (!(ev.carb_ratio > 0.0)) throw InvalidArgument("carb ratio must be positive");

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  std::normal_distribution<double> noise(0.0, 1.0);

  SynthResult out;
  out.dataset.patient_id = spec.patient_id;
  out.truth.model = spec.true_model;
  out.truth.shifts = spec.true_shifts;
  out.truth.noise_sd = spec.noise_sd;
  out.truth.seed = spec.seed;

  std::vector<Event> all_bolus, all_meals;
  double g_start = spec.g0;
  for (int d = 0; d < spec.n_days; ++d) {
    const Date date{sys_days{spec.start_date} + std::chrono::days{d}};
    const Timestamp day_start = sys_days{date};
    const Grid grid{day_start, Seconds{kStepMinutes * 60}, static_cast<std::size_t>(24 * 60 / kStepMinutes)};

    // Basal levels: midnight plus a few changes.
    std::set<long long> change_minutes{0};
    for (int c = 0; c < ev.basal_changes; ++c)
      change_minutes.insert(std::llround(uniform(60.0, 23.0 * 60.0) / kStepMinutes) * kStepMinutes);
    std::vector<Sample> basal_today;
    for (long long m : change_minutes)
      basal_today.push_back({day_start + minutes{m}, round_to(uniform(ev.basal_min, ev.basal_max), 0.05)});

    // Meals spread over the waking hours, each with a paired bolus.
    const int n_meals = ev.meals_min + static_cast<int>(unit(rng) * (ev.meals_max - ev.meals_min + 1) * 0.999999);
    std::set<Timestamp> meal_times, bolus_times;
    std::vector<Event> meals_today, bolus_today;
    for (int m = 0; m < n_meals; ++m) {
      const double anchor = 7.0 * 60.0 + (n_meals == 1 ? 5.0 * 60.0 : m * (14.0 * 60.0) / (n_meals - 1));
      Timestamp t = snap(day_start, anchor + uniform(-ev.meal_jitter_minutes, ev.meal_jitter_minutes));
      while (meal_times.count(t)) t += minutes{kStepMinutes};
      meal_times.insert(t);
      const double carbs = std::max(1.0, std::round(uniform(ev.carbs_min, ev.carbs_max)));
      meals_today.push_back({t, carbs});
      if (!ev.paired_bolus) continue;

      const double minute = static_cast<double>((t - day_start).count()) / 60.0;
      Timestamp tb = snap(day_start, minute + uniform(ev.bolus_offset_min, ev.bolus_offset_max));
      while (bolus_times.count(tb)) tb += minutes{kStepMinutes};
      bolus_times.insert(tb);
      const double dose = std::max(0.1, round_to(carbs / ev.carb_ratio * uniform(1.0 - ev.ratio_jitter, 1.0 + ev.ratio_jitter), 0.1));
      bolus_today.push_back({tb, dose});
    }
    auto by_time = [](const Event& a, const Event& b) { return a.time < b.time; };
    std::sort(meals_today.begin(), meals_today.end(), by_time);
    std::sort(bolus_today.begin(), bolus_today.end(), by_time);

    DaySegment day;
    day.date = date;
    day.basal = sample_and_hold(basal_today, grid);
    day.bolus_raw = EventList(EventKind::bolus, bolus_today);
    day.carbs_raw = EventList(EventKind::meal, meals_today);
    day.glucose = UniformSeries(grid, std::vector<double>(grid.length, g_start));
    day = absorb_day(std::move(day), spec.absorption, spec.simulation.unit);

    const SimulationResult sim =
        simulate_day(spec.true_model, g_start, shifted_inputs(day, spec.true_shifts), spec.simulation);
    if (sim.diverged)
      throw InvalidArgument("planted model leaves the guard band on " + format_date(date) + " (step " +
                            std::to_string(*sim.divergence_index) +
                            "); choose a stabler model or a wider guard");

    for (std::size_t i = 0; i < grid.length; ++i) {
      const double v = sim.trajectory[i] + (spec.noise_sd > 0.0 ? spec.noise_sd * noise(rng) : 0.0);
      out.dataset.glucose.push_back({grid.at(i), v});
    }
    out.dataset.basal.insert(out.dataset.basal.end(), basal_today.begin(), basal_today.end());
    all_bolus.insert(all_bolus.end(), bolus_today.begin(), bolus_today.end());
    all_meals.insert(all_meals.end(), meals_today.begin(), meals_today.end());
    out.truth.days.push_back(date);
    out.truth.day_start_glucose.push_back(g_start);
    g_start = sim.trajectory[grid.length - 1];
  }
  out.dataset.bolus = EventList(EventKind::bolus, std::move(all_bolus));
  out.dataset.meals = EventList(EventKind::meal, std::move(all_meals));
  return out;
}

std::string ground_truth_to_json(const GroundTruth& truth) {
  nlohmann::json doc;
  doc["model"] = nlohmann::json::parse(model_to_json(truth.model));
  doc["bolus_shift"] = truth.shifts.bolus_steps;
  doc["carb_shift"] = truth.shifts.carb_steps;
  doc["noise_sd"] = truth.noise_sd;
  doc["seed"] = truth.seed;
  nlohmann::json days = nlohmann::json::array();
  for (std::size_t i = 0; i < truth.days.size(); ++i)
    days.push_back({{"date", format_date(truth.days[i])}, {"start_glucose", truth.day_start_glucose[i]}});
  doc["days"] = days;
  return doc.dump(2) + "\n";
}

}  // namespace gsindy
