#include "gsindy/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "gsindy/errors.hpp"

namespace gsindy {

double evaluate_rhs(const SparseModel& model, double glucose, double carbs, double bolus, double basal) {
  const State x = make_state(glucose, carbs, bolus, basal);
  double sum = 0.0;
  for (std::size_t j = 0; j < model.terms.size(); ++j) sum += model.coefficients[j] * model.terms[j].evaluate(x);
  return sum;
}

namespace {

constexpr std::size_t kG = static_cast<std::size_t>(Variable::glucose);

// The model restricted to one grid interval: with the inputs frozen, the
// right-hand side is a polynomial in G plus any trig terms of G.
class FrozenRhs {
 public:
  explicit FrozenRhs(const SparseModel& model) : model_(model) {
    int top = 0;
    for (const TermDescriptor& t : model.terms)
      if (t.trig == TrigFunction::none) top = std::max(top, t.exponents[kG]);
    poly_.assign(static_cast<std::size_t>(top) + 1, 0.0);
  }

  void freeze(double carbs, double bolus, double basal) {
    std::fill(poly_.begin(), poly_.end(), 0.0);
    trig_.clear();
    const State x = make_state(1.0, carbs, bolus, basal);
    for (std::size_t j = 0; j < model_.terms.size(); ++j) {
      const TermDescriptor& t = model_.terms[j];
      const double c = model_.coefficients[j];
      if (t.trig != TrigFunction::none) {
        if (t.trig_variable == Variable::glucose) trig_.push_back({t.trig, c});
        else poly_[0] += c * t.evaluate(x);
        continue;
      }
      // G is 1 in `x`, so evaluate() yields the input part of the monomial.
      poly_[static_cast<std::size_t>(t.exponents[kG])] += c * t.evaluate(x);
    }
  }

  double operator()(double g) const {
    double v = 0.0;
    for (std::size_t k = poly_.size(); k-- > 0;) v = v * g + poly_[k];
    for (const auto& [fn, c] : trig_) v += c * (fn == TrigFunction::sin ? std::sin(g) : std::cos(g));
    return v;
  }

 private:
  const SparseModel& model_;
  std::vector<double> poly_;
  std::vector<std::pair<TrigFunction, double>> trig_;
};

}  // namespace

SimulationResult simulate_day(const SparseModel& model, double g0, const DayInputs& inputs,
                              const SimulationOptions& options) {
  if (!inputs.carbs.aligned_with(inputs.bolus) || !inputs.carbs.aligned_with(inputs.basal))
    throw InvalidArgument("simulation inputs are not aligned");
  if (inputs.carbs.empty()) throw InvalidArgument("simulation inputs are empty");
  if (options.substeps < 1) throw InvalidArgument("substeps must be at least 1");
  if (!(options.g_min < options.g_max)) throw InvalidArgument("guard band is empty");

  const std::size_t n = inputs.carbs.size();
  const double delta = options.unit.steps_to_units(inputs.carbs.step());
  // Each input sample is held over its own cell [i - 1/2, i + 1/2], so a grid
  // interval switches from the left sample to the right one at its midpoint.
  struct Piece {
    double h;
    bool right;
  };
  std::vector<Piece> pieces;
  for (int j = 0; j < options.substeps; ++j) {
    const double a = static_cast<double>(j) / options.substeps;
    const double b = static_cast<double>(j + 1) / options.substeps;
    if (a < 0.5 && b > 0.5) {
      pieces.push_back({(0.5 - a) * delta, false});
      pieces.push_back({(b - 0.5) * delta, true});
    } else {
      pieces.push_back({(b - a) * delta, a >= 0.5});
    }
  }

  std::vector<double> g(n, 0.0);
  g[0] = g0;

  SimulationResult out;
  out.provenance = model.provenance;
  FrozenRhs left(model), right(model);
  double state = g0;
  std::size_t i = 1;
  for (; i < n; ++i) {
    left.freeze(inputs.carbs[i - 1], inputs.bolus[i - 1], inputs.basal[i - 1]);
    right.freeze(inputs.carbs[i], inputs.bolus[i], inputs.basal[i]);
    for (const Piece& p : pieces) {
      const FrozenRhs& f = p.right ? right : left;
      const double k1 = f(state);
      const double k2 = f(state + 0.5 * p.h * k1);
      const double k3 = f(state + 0.5 * p.h * k2);
      const double k4 = f(state + p.h * k3);
      state += p.h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!std::isfinite(state) || state < options.g_min || state > options.g_max) break;
    g[i] = state;
  }
  if (i < n) {
    const double clamped = state < options.g_min ? options.g_min : options.g_max;
    std::fill(g.begin() + static_cast<std::ptrdiff_t>(i), g.end(), clamped);
    out.diverged = true;
    out.divergence_index = i;
  }
  out.trajectory = UniformSeries(inputs.carbs.start(), inputs.carbs.step(), std::move(g));
  return out;
}

UniformSeries constant_model(double g0, const Grid& grid) {
  if (grid.length < 1) throw InvalidArgument("constant model needs length >= 1");
  return UniformSeries(grid, std::vector<double>(grid.length, g0));
}

SparseModel reference_model() {
  using V = Variable;
  SparseModel m;
  m.terms = {
      TermDescriptor::constant(),
      TermDescriptor::monomial({{V::basal, 1}}),
      TermDescriptor::monomial({{V::carbs, 1}}),
      TermDescriptor::monomial({{V::glucose, 1}}),
      TermDescriptor::monomial({{V::bolus, 1}, {V::basal, 1}}),
      TermDescriptor::monomial({{V::basal, 2}}),
      TermDescriptor::monomial({{V::basal, 1}, {V::carbs, 1}}),
      TermDescriptor::monomial({{V::basal, 1}, {V::glucose, 1}}),
      TermDescriptor::monomial({{V::carbs, 1}, {V::glucose, 1}}),
      TermDescriptor::monomial({{V::glucose, 2}}),
  };
  m.coefficients = {-1.14, 102.39, -0.14, -7.69, -0.21, 648.80, 12.80, -185.42, -0.96, 11.39};
  m.provenance.shifts = ShiftConfig{6, 1};
  return m;
}

}  // namespace gsindy
