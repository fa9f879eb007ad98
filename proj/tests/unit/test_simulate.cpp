#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gsindy/errors.hpp"
#include "gsindy/simulate.hpp"
#include "scenarios.hpp"
#include "support.hpp"

using namespace gsindy;
using gsindy::test::series;

namespace {

using V = Variable;

DayInputs flat_inputs(std::size_t n, double c = 0.0, double b = 0.0, double basal = 0.0) {
  return {series(std::vector<double>(n, c)), series(std::vector<double>(n, b)),
          series(std::vector<double>(n, basal))};
}

SparseModel linear_decay(double rate) {
  SparseModel m;
  m.terms = {TermDescriptor::monomial({{V::glucose, 1}})};
  m.coefficients = {-rate};
  return m;
}

double max_error_vs_exponential(int substeps) {
  SimulationOptions o;
  o.substeps = substeps;
  const auto sim = simulate_day(linear_decay(0.1), 100.0, flat_inputs(11), o);
  double worst = 0.0;
  for (std::size_t i = 0; i < 11; ++i)
    worst = std::max(worst, std::abs(sim.trajectory[i] - 100.0 * std::exp(-0.1 * static_cast<double>(i))));
  return worst;
}

}  // namespace

TEST(Rhs, ReferenceModelAlgebra) {
  const SparseModel ref = reference_model();
  ASSERT_EQ(ref.size(), 10u);
  EXPECT_NEAR(evaluate_rhs(ref, 0, 0, 0, 0), -1.14, 1e-12);
  EXPECT_NEAR(evaluate_rhs(ref, 1, 0, 0, 0), -1.14 + -7.69 + 11.39, 1e-12);
  EXPECT_NEAR(evaluate_rhs(ref, 1, 0, 0, 0), 2.56, 1e-12);
  // b = 1 alone: p0 + p1 + p5.
  EXPECT_NEAR(evaluate_rhs(ref, 0, 0, 0, 1), -1.14 + 102.39 + 648.80, 1e-10);
}

TEST(Rhs, ZeroModelAndLinearity) {
  EXPECT_EQ(evaluate_rhs(SparseModel{}, 140, 3, 2, 1), 0.0);
  std::mt19937 rng(6);
  std::normal_distribution<double> n(0.0, 1.0);
  SparseModel a = reference_model(), b = reference_model(), sum = reference_model();
  for (std::size_t j = 0; j < a.size(); ++j) {
    a.coefficients[j] = n(rng);
    b.coefficients[j] = n(rng);
    sum.coefficients[j] = a.coefficients[j] + b.coefficients[j];
  }
  for (int k = 0; k < 50; ++k) {
    const double g = 100 + 50 * n(rng), c = n(rng), bo = n(rng), ba = n(rng);
    const double lhs = evaluate_rhs(sum, g, c, bo, ba);
    const double rhs = evaluate_rhs(a, g, c, bo, ba) + evaluate_rhs(b, g, c, bo, ba);
    EXPECT_NEAR(lhs, rhs, 1e-9 * std::max(1.0, std::abs(lhs)));
  }
}

TEST(Simulate, ZeroDynamicsStayConstant) {
  const auto sim = simulate_day(SparseModel{}, 120.0, flat_inputs(50, 3.0, 1.0, 0.8));
  for (double v : sim.trajectory.values()) EXPECT_EQ(v, 120.0);
  EXPECT_FALSE(sim.diverged);
}

TEST(Simulate, ExponentialDecay) {
  EXPECT_LT(max_error_vs_exponential(4), 1e-6);
}

TEST(Simulate, FourthOrderConvergence) {
  // One substep is split at the input switch anyway, so halving starts at two.
  EXPECT_EQ(max_error_vs_exponential(1), max_error_vs_exponential(2));
  for (int s : {2, 4, 8}) {
    const double ratio = max_error_vs_exponential(s) / max_error_vs_exponential(2 * s);
    EXPECT_GE(ratio, 12.0) << "substeps " << s;
    EXPECT_LE(ratio, 20.0) << "substeps " << s;
  }
}

TEST(Simulate, InputsSwitchAtIntervalMidpoints) {
  // dG/dt = C integrates to the trapezoid sum of the samples.
  SparseModel m;
  m.terms = {TermDescriptor::monomial({{V::carbs, 1}})};
  m.coefficients = {1.0};
  const std::vector<double> c{0.0, 4.0, 4.0, 1.0, 0.0, 2.0};
  const DayInputs in{series(c), series(std::vector<double>(6, 0.0)), series(std::vector<double>(6, 0.0))};
  for (int substeps : {1, 3, 4}) {
    SimulationOptions o;
    o.substeps = substeps;
    const auto sim = simulate_day(m, 10.0, in, o);
    double expected = 10.0;
    EXPECT_EQ(sim.trajectory[0], 10.0);
    for (std::size_t i = 1; i < c.size(); ++i) {
      expected += 0.5 * (c[i - 1] + c[i]);
      EXPECT_NEAR(sim.trajectory[i], expected, 1e-12);
    }
  }
}

TEST(Simulate, TimeUnitScalesTheStep) {
  SimulationOptions o;
  o.unit.minutes = 1.0;  // one 5-minute grid step is 5 model units
  const auto sim = simulate_day(linear_decay(0.02), 100.0, flat_inputs(4), o);
  EXPECT_NEAR(sim.trajectory[3], 100.0 * std::exp(-0.02 * 15.0), 1e-6);
}

TEST(Simulate, DivergenceClampsAndFlags) {
  const auto sim = simulate_day(linear_decay(-0.5), 100.0, flat_inputs(20));
  ASSERT_TRUE(sim.diverged);
  ASSERT_TRUE(sim.divergence_index);
  // 100 e^{0.5 i} first exceeds 1000 at i = 5.
  EXPECT_EQ(*sim.divergence_index, 5u);
  for (std::size_t i = 5; i < 20; ++i) EXPECT_EQ(sim.trajectory[i], 1000.0);
  EXPECT_LT(sim.trajectory[4], 1000.0);

  const auto low = simulate_day(linear_decay(0.5), 100.0, flat_inputs(20), {4, 50.0, 1000.0});
  ASSERT_TRUE(low.diverged);
  EXPECT_EQ(low.trajectory[19], 50.0);
}

TEST(Simulate, RejectsMisalignedInputs) {
  DayInputs in = flat_inputs(10);
  in.bolus = series(std::vector<double>(9, 0.0));
  EXPECT_THROW(simulate_day(SparseModel{}, 100.0, in), InvalidArgument);
  SimulationOptions o;
  o.substeps = 0;
  EXPECT_THROW(simulate_day(SparseModel{}, 100.0, flat_inputs(10), o), InvalidArgument);
}

TEST(Simulate, FirstValueIsInitialCondition) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> g(40, 400);
  for (int k = 0; k < 20; ++k) {
    const double g0 = g(rng);
    EXPECT_EQ(simulate_day(reference_model(), g0, flat_inputs(5, 1, 1, 1)).trajectory[0], g0);
  }
}

TEST(ConstantModel, Definition) {
  const auto three = constant_model(142.0, {gsindy::test::at(2027, 5, 13), kDefaultStep, 3});
  EXPECT_EQ(gsindy::test::to_vector(three), (std::vector<double>{142.0, 142.0, 142.0}));
  EXPECT_EQ(constant_model(99.0, {gsindy::test::at(2027, 5, 13), kDefaultStep, 1}).size(), 1u);
  EXPECT_THROW(constant_model(1.0, {gsindy::test::at(2027, 5, 13), kDefaultStep, 0}), InvalidArgument);
}

TEST(Simulate, ClosedLoopOnNoiselessDay) {
  const SynthSpec spec = scenario::meals_only("-0.05*G + 0.8*C", 0.0, 7, 3);
  const PipelineOptions opt = scenario::options_for(spec, 0.1);
  const auto days = scenario::days_of(synthesize_dataset(spec), opt);
  for (const DaySegment& d : days) {
    const SparseModel m = fit_day(d, spec.true_shifts, opt.hyper);
    const auto sim = simulate_day(m, d.glucose[0], shifted_inputs(d, spec.true_shifts));
    EXPECT_LT(mean_absolute_error(sim.trajectory.values(), d.glucose.values()), 0.5);
  }
}
