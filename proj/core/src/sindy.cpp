#include "gsindy/sindy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "gsindy/errors.hpp"

namespace gsindy {

const char* symbol(Variable v) {
  switch (v) {
    case Variable::bolus: return "B";
    case Variable::carbs: return "C";
    case Variable::glucose: return "G";
    case Variable::basal: return "b";
  }
  return "?";
}

std::optional<Variable> variable_from_symbol(std::string_view s) {
  for (Variable v : kVariables)
    if (s == symbol(v)) return v;
  return std::nullopt;
}

TermDescriptor TermDescriptor::monomial(std::initializer_list<std::pair<Variable, int>> powers) {
  TermDescriptor t;
  for (const auto& [v, p] : powers) t.exponents[static_cast<std::size_t>(v)] += p;
  return t;
}

int TermDescriptor::degree() const {
  int d = 0;
  for (int e : exponents) d += e;
  return d;
}

std::string TermDescriptor::name() const {
  if (trig != TrigFunction::none)
    return std::string(trig == TrigFunction::sin ? "sin(" : "cos(") + symbol(trig_variable) + ")";
  std::string out;
  for (Variable v : kVariables) {
    const int e = exponent(v);
    if (e == 0) continue;
    if (!out.empty()) out += "·";
    out += symbol(v);
    if (e == 2) out += "²";
    else if (e == 3) out += "³";
    else if (e > 3) out += "^" + std::to_string(e);
  }
  return out.empty() ? "1" : out;
}

double TermDescriptor::evaluate(const State& x) const {
  if (trig != TrigFunction::none) {
    const double arg = x[static_cast<std::size_t>(trig_variable)];
    return trig == TrigFunction::sin ? std::sin(arg) : std::cos(arg);
  }
  double value = 1.0;
  for (std::size_t i = 0; i < kNumVariables; ++i)
    for (int e = 0; e < exponents[i]; ++e) value *= x[i];
  return value;
}

std::vector<TermDescriptor> library_terms(int max_degree, bool trig) {
  if (max_degree < 1) throw InvalidArgument("max_degree must be at least 1");
  std::vector<TermDescriptor> terms{TermDescriptor::constant()};
  // Non-decreasing index sequences of length `degree` enumerate monomials lexicographically.
  std::vector<std::size_t> idx;
  std::function<void(int, std::size_t)> emit = [&](int remaining, std::size_t from) {
    if (remaining == 0) {
      TermDescriptor t;
      for (std::size_t i : idx) ++t.exponents[i];
      terms.push_back(t);
      return;
    }
    for (std::size_t v = from; v < kNumVariables; ++v) {
      idx.push_back(v);
      emit(remaining - 1, v);
      idx.pop_back();
    }
  };
  for (int d = 1; d <= max_degree; ++d) emit(d, 0);
  if (trig) {
    for (Variable v : kVariables) {
      terms.push_back({{}, TrigFunction::sin, v});
      terms.push_back({{}, TrigFunction::cos, v});
    }
  }
  return terms;
}

LibraryMatrix build_library(std::span<const double> glucose, std::span<const double> carbs,
                            std::span<const double> bolus, std::span<const double> basal,
                            const LibraryOptions& options) {
  const std::size_t n = glucose.size();
  if (carbs.size() != n || bolus.size() != n || basal.size() != n)
    throw InvalidArgument("library channels must have equal length");
  LibraryMatrix lib;
  lib.terms = library_terms(options.max_degree, options.trig);
  const std::size_t cols = lib.terms.size();
  lib.values = Matrix(n, cols);
  for (std::size_t r = 0; r < n; ++r) {
    const State x = make_state(glucose[r], carbs[r], bolus[r], basal[r]);
    for (std::size_t c = 0; c < cols; ++c) lib.values(r, c) = lib.terms[c].evaluate(x);
  }

  lib.scale.assign(cols, 1.0);
  lib.degenerate.assign(cols, false);
  for (std::size_t c = 0; c < cols; ++c) {
    if (lib.terms[c].is_constant()) continue;  // a column of ones already has unit RMS
    double mean = 0.0, peak = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      mean += lib.values(r, c);
      peak = std::max(peak, std::abs(lib.values(r, c)));
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) var += (lib.values(r, c) - mean) * (lib.values(r, c) - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    if (peak == 0.0 || sd <= 1e-12 * peak) {
      lib.degenerate[c] = true;
    } else {
      lib.scale[c] = sd;
    }
  }
  return lib;
}

LibraryMatrix build_library(const DaySegment& day, const ShiftConfig& shifts,
                            const LibraryOptions& options) {
  const DayInputs in = shifted_inputs(day, shifts);
  return build_library(day.glucose.values(), in.carbs.values(), in.bolus.values(), in.basal.values(),
                       options);
}

double SparseModel::coefficient(const TermDescriptor& term) const {
  for (std::size_t j = 0; j < terms.size(); ++j)
    if (terms[j] == term) return coefficients[j];
  return 0.0;
}

std::string SparseModel::to_string() const {
  std::string out = "dG/dt =";
  if (terms.empty()) return out + " 0";
  for (std::size_t j = 0; j < terms.size(); ++j) {
    char buf[64];
    const double c = coefficients[j];
    std::snprintf(buf, sizeof buf, " %s %.6g", (c < 0 ? "-" : (j == 0 ? "" : "+")), std::abs(c));
    out += buf;
    if (!terms[j].is_constant()) out += "·" + terms[j].name();
  }
  return out;
}

StlsqResult stlsq(const LibraryMatrix& library, std::span<const double> target,
                  const SindyHyper& hyper) {
  const std::size_t n = library.rows();
  const std::size_t cols = library.cols();
  if (target.size() != n) throw InvalidArgument("stlsq: target length differs from library rows");
  if (n < cols)
    throw InvalidArgument("stlsq: need at least as many samples (" + std::to_string(n) +
                          ") as library columns (" + std::to_string(cols) + ")");
  if (hyper.threshold < 0.0 || hyper.ridge < 0.0)
    throw InvalidArgument("stlsq: threshold and ridge must be non-negative");
  if (hyper.max_iter < 1) throw InvalidArgument("stlsq: max_iter must be at least 1");

  std::vector<double> scale(cols, 1.0);
  if (hyper.normalize) scale = library.scale;

  StlsqResult result;
  std::vector<bool> active(cols);
  for (std::size_t c = 0; c < cols; ++c) active[c] = !library.degenerate[c];

  std::vector<double> scaled(cols, 0.0);
  for (int iter = 0; iter < hyper.max_iter; ++iter) {
    result.active_history.push_back(active);
    result.iterations = iter + 1;
    std::vector<std::size_t> columns;
    for (std::size_t c = 0; c < cols; ++c)
      if (active[c]) columns.push_back(c);
    if (columns.empty()) break;

    Matrix sub(n, columns.size());
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t j = 0; j < columns.size(); ++j)
        sub(r, j) = library.values(r, columns[j]) / scale[columns[j]];
    const LeastSquaresSolution sol = solve_least_squares(sub, target, hyper.ridge);
    if (sol.rank_deficient && hyper.ridge == 0.0)
      result.warnings.push_back("rank-deficient active set (rank " + std::to_string(sol.rank) + " of " +
                                std::to_string(columns.size()) + "); using the minimum-norm solution");

    std::fill(scaled.begin(), scaled.end(), 0.0);
    std::vector<bool> next(cols, false);
    for (std::size_t j = 0; j < columns.size(); ++j) {
      scaled[columns[j]] = sol.x[j];
      next[columns[j]] = std::abs(sol.x[j]) >= hyper.threshold;
    }
    if (next == active) {
      result.converged = true;
      break;
    }
    active = std::move(next);
  }

  if (!result.converged) {
    // Out of iterations: enforce the threshold on the last solve without refitting.
    for (std::size_t c = 0; c < cols; ++c)
      if (std::abs(scaled[c]) < hyper.threshold) scaled[c] = 0.0;
    result.warnings.push_back("stlsq did not reach a stable active set within " +
                              std::to_string(hyper.max_iter) + " iterations");
  }

  result.scaled_coefficients = scaled;
  result.coefficients.assign(cols, 0.0);
  bool any = false;
  for (std::size_t c = 0; c < cols; ++c) {
    if (scaled[c] == 0.0 || !active[c]) {
      result.scaled_coefficients[c] = 0.0;
      continue;
    }
    any = true;
    result.coefficients[c] = scaled[c] / scale[c];
    result.model.terms.push_back(library.terms[c]);
    result.model.coefficients.push_back(result.coefficients[c]);
  }
  if (!any) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", hyper.threshold);
    throw EmptyModelError(std::string("empty model at λ = ") + buf);
  }
  result.model.hyper = hyper;
  return result;
}

SparseModel fit_day(const DaySegment& day, const ShiftConfig& shifts, const SindyHyper& hyper,
                    const TimeUnit& unit, std::vector<std::string>* warnings) {
  const std::string context = "fit on " + format_date(day.date) + " with shifts " + to_string(shifts);
  try {
    const LibraryMatrix lib = build_library(day, shifts, {hyper.max_degree, hyper.trig});
    const UniformSeries dgdt = differentiate(day.glucose, unit.steps_to_units(day.glucose.step()));
    StlsqResult fit = stlsq(lib, dgdt.values(), hyper);
    if (warnings)
      for (const std::string& w : fit.warnings) warnings->push_back(context + ": " + w);
    fit.model.provenance = {day.date, shifts};
    return std::move(fit.model);
  } catch (const EmptyModelError& e) {
    throw EmptyModelError(context + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(context + ": " + e.what());
  }
}

}  // namespace gsindy
