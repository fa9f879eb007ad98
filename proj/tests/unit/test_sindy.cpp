#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gsindy/errors.hpp"
#include "gsindy/sindy.hpp"
#include "scenarios.hpp"
#include "support.hpp"

using namespace gsindy;
using gsindy::test::normal_equations;

namespace {

using V = Variable;

// A library over arbitrary columns, scaled the way build_library scales.
LibraryMatrix raw_library(const Matrix& values) {
  LibraryMatrix lib;
  const auto all = library_terms(2);
  lib.terms.assign(all.begin() + 1, all.begin() + 1 + static_cast<long>(values.cols()));
  lib.values = values;
  lib.scale.assign(values.cols(), 1.0);
  lib.degenerate.assign(values.cols(), false);
  for (std::size_t c = 0; c < values.cols(); ++c) {
    double mean = 0.0, var = 0.0;
    for (std::size_t r = 0; r < values.rows(); ++r) mean += values(r, c);
    mean /= static_cast<double>(values.rows());
    for (std::size_t r = 0; r < values.rows(); ++r) var += (values(r, c) - mean) * (values(r, c) - mean);
    lib.scale[c] = std::sqrt(var / static_cast<double>(values.rows()));
  }
  return lib;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = n(rng);
  return m;
}

SindyHyper plain(double threshold, double ridge = 0.0, bool normalize = true) {
  SindyHyper h;
  h.threshold = threshold;
  h.ridge = ridge;
  h.normalize = normalize;
  return h;
}

}  // namespace

TEST(Library, TermCountsAndOrder) {
  EXPECT_EQ(library_terms(2).size(), 15u);
  EXPECT_EQ(library_terms(1).size(), 5u);
  std::vector<std::string> names;
  for (const auto& t : library_terms(2)) names.push_back(t.name());
  const std::vector<std::string> expected{"1",   "B",   "C",   "G",   "b",   "B²",  "B·C", "B·G",
                                          "B·b", "C²",  "C·G", "C·b", "G²",  "G·b", "b²"};
  EXPECT_EQ(names, expected);
  EXPECT_EQ(library_terms(1, true).size(), 13u);
}

TEST(Library, MonomialEvaluation) {
  const std::vector<double> g{2.0, 3.0}, zero{0.0, 0.0}, c{0.0, 1.0};
  const LibraryMatrix lib = build_library(g, c, zero, zero);
  ASSERT_EQ(lib.cols(), 15u);
  for (std::size_t j = 0; j < lib.cols(); ++j) {
    const auto& t = lib.terms[j];
    double expected = 0.0;
    if (t.is_constant()) expected = 1.0;
    if (t == TermDescriptor::monomial({{V::glucose, 1}})) expected = 2.0;
    if (t == TermDescriptor::monomial({{V::glucose, 2}})) expected = 4.0;
    EXPECT_EQ(lib.values(0, j), expected) << t.name();
  }
}

TEST(Library, ZeroChannelsAreDegenerate) {
  std::vector<double> g(20), zero(20, 0.0), c(20);
  for (std::size_t i = 0; i < 20; ++i) {
    g[i] = 100.0 + static_cast<double>(i);
    c[i] = std::sin(static_cast<double>(i));
  }
  const LibraryMatrix lib = build_library(g, c, zero, zero);
  for (std::size_t j = 0; j < lib.cols(); ++j) {
    const auto& t = lib.terms[j];
    const bool uses_zero = t.exponent(V::bolus) > 0 || t.exponent(V::basal) > 0;
    EXPECT_EQ(lib.degenerate[j], uses_zero) << t.name();
  }
  EXPECT_EQ(lib.scale[0], 1.0);
}

TEST(Library, UnabsorbedDayIsRejected) {
  DaySegment day;
  day.glucose = gsindy::test::series(std::vector<double>(10, 100.0));
  day.basal = gsindy::test::series(std::vector<double>(10, 1.0));
  EXPECT_THROW(build_library(day, ShiftConfig{1, 1}), InvalidArgument);
}

TEST(Stlsq, MatchesNormalEquationsWithoutThreshold) {
  std::mt19937 rng(2024);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t cols = 1 + trial % 10, rows = 2 * cols + 5;
    const Matrix a = random_matrix(rows, cols, rng);
    std::vector<double> y(rows);
    for (double& v : y) v = n(rng);
    const auto oracle = normal_equations(a, y);
    for (bool normalize : {false, true}) {
      const StlsqResult fit = stlsq(raw_library(a), y, plain(0.0, 0.0, normalize));
      for (std::size_t j = 0; j < cols; ++j) EXPECT_NEAR(fit.coefficients[j], oracle[j], 1e-8);
    }
  }
}

TEST(Stlsq, SixByFourOrdinaryLeastSquares) {
  Matrix a(6, 4);
  const double v[6][4] = {{1, 0, 2, 1}, {2, 1, 0, 3}, {0, 1, 1, 1}, {3, 2, 1, 0}, {1, 3, 2, 2}, {2, 0, 3, 1}};
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 4; ++c) a(r, c) = v[r][c];
  const std::vector<double> y{1.0, -2.0, 0.5, 3.0, 1.5, -1.0};
  const auto oracle = normal_equations(a, y);
  const StlsqResult fit = stlsq(raw_library(a), y, plain(0.0));
  std::vector<double> res_fit(6), res_oracle(6);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 4; ++c) {
      res_fit[r] += a(r, c) * fit.coefficients[c];
      res_oracle[r] += a(r, c) * oracle[c];
    }
  for (int r = 0; r < 6; ++r) EXPECT_NEAR(res_fit[r], res_oracle[r], 1e-10);
}

TEST(Stlsq, NormalisationDoesNotChangeUnthresholdedCoefficients) {
  std::mt19937 rng(3);
  Matrix a = random_matrix(50, 6, rng);
  for (std::size_t r = 0; r < 50; ++r) {
    a(r, 1) *= 1000.0;
    a(r, 4) *= 1e-3;
  }
  std::vector<double> y(50);
  for (std::size_t r = 0; r < 50; ++r) y[r] = std::cos(0.3 * static_cast<double>(r));
  const auto on = stlsq(raw_library(a), y, plain(0.0, 0.0, true));
  const auto off = stlsq(raw_library(a), y, plain(0.0, 0.0, false));
  for (std::size_t j = 0; j < 6; ++j)
    EXPECT_NEAR(on.coefficients[j], off.coefficients[j], 1e-10 * std::max(1.0, std::abs(off.coefficients[j])));
}

TEST(Stlsq, PlantedColumnsOneAndThree) {
  std::mt19937 rng(17);
  const Matrix a = random_matrix(40, 6, rng);
  std::vector<double> y(40);
  for (std::size_t r = 0; r < 40; ++r) y[r] = 2.0 * a(r, 1) - 3.0 * a(r, 3);
  const StlsqResult fit = stlsq(raw_library(a), y, plain(0.5, 0.0, false));
  const std::vector<double> expected{0.0, 2.0, 0.0, -3.0, 0.0, 0.0};
  for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(fit.coefficients[j], expected[j], 1e-8);
  EXPECT_TRUE(fit.converged);
  EXPECT_EQ(fit.model.size(), 2u);
}

TEST(Stlsq, PlantedTwoSparseSupportRecovery) {
  std::mt19937 rng(99);
  std::uniform_int_distribution<std::size_t> pick(0, 9);
  std::uniform_real_distribution<double> mag(1.0, 5.0);
  int exact = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix a = random_matrix(60, 10, rng);
    const std::size_t i = pick(rng);
    std::size_t j = pick(rng);
    while (j == i) j = pick(rng);
    const double ci = mag(rng), cj = -mag(rng);
    std::vector<double> y(60);
    for (std::size_t r = 0; r < 60; ++r) y[r] = ci * a(r, i) + cj * a(r, j);
    const LibraryMatrix lib = raw_library(a);
    const double smallest = std::min(std::abs(ci) * lib.scale[i], std::abs(cj) * lib.scale[j]);
    const StlsqResult fit = stlsq(lib, y, plain(0.5 * smallest));
    bool ok = fit.model.size() == 2;
    for (std::size_t c = 0; c < 10; ++c) ok = ok && ((fit.coefficients[c] != 0.0) == (c == i || c == j));
    exact += ok;
  }
  EXPECT_EQ(exact, 100);
}

TEST(Stlsq, ThresholdAboveEveryCoefficientIsEmpty) {
  std::mt19937 rng(1);
  const Matrix a = random_matrix(30, 5, rng);
  std::vector<double> y(30);
  for (std::size_t r = 0; r < 30; ++r) y[r] = 0.3 * a(r, 0);
  try {
    stlsq(raw_library(a), y, plain(100.0));
    FAIL() << "expected EmptyModelError";
  } catch (const EmptyModelError& e) {
    EXPECT_NE(std::string(e.what()).find("empty model"), std::string::npos);
  }
}

TEST(Stlsq, ActiveSetNeverGrows) {
  std::mt19937 rng(12);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix a = random_matrix(40, 8, rng);
    std::vector<double> y(40);
    for (std::size_t r = 0; r < 40; ++r) y[r] = a(r, 0) + 0.2 * a(r, 5) + 0.5 * n(rng);
    try {
      const StlsqResult fit = stlsq(raw_library(a), y, plain(0.3, 1e-6));
      for (std::size_t k = 1; k < fit.active_history.size(); ++k)
        for (std::size_t c = 0; c < 8; ++c) {
          EXPECT_TRUE(!fit.active_history[k][c] || fit.active_history[k - 1][c]);
        }
      for (std::size_t c = 0; c < 8; ++c) {
        if (fit.scaled_coefficients[c] != 0.0) {
          EXPECT_GE(std::abs(fit.scaled_coefficients[c]), 0.3);
        }
      }
    } catch (const EmptyModelError&) {
    }
  }
}

TEST(Stlsq, RankDeficientWithoutRidgeWarns) {
  std::mt19937 rng(4);
  Matrix a = random_matrix(20, 3, rng);
  for (std::size_t r = 0; r < 20; ++r) a(r, 2) = 2.0 * a(r, 0);
  std::vector<double> y(20);
  for (std::size_t r = 0; r < 20; ++r) y[r] = a(r, 1);
  const StlsqResult fit = stlsq(raw_library(a), y, plain(0.0));
  ASSERT_FALSE(fit.warnings.empty());
  EXPECT_NE(fit.warnings[0].find("minimum-norm"), std::string::npos);
  EXPECT_NEAR(fit.coefficients[1], 1.0, 1e-10);
}

TEST(Stlsq, RejectsBadInput) {
  std::mt19937 rng(4);
  const Matrix a = random_matrix(3, 5, rng);
  const std::vector<double> y(3, 1.0);
  EXPECT_THROW(stlsq(raw_library(a), y), InvalidArgument);
  const Matrix b = random_matrix(8, 2, rng);
  EXPECT_THROW(stlsq(raw_library(b), y), InvalidArgument);
  const std::vector<double> y8(8, 1.0);
  EXPECT_THROW(stlsq(raw_library(b), y8, plain(-1.0)), InvalidArgument);
}

TEST(FitDay, RecoversPlantedLinearModel) {
  const SynthSpec spec = scenario::meals_only("-0.05*G + 0.8*C", 0.0, 7, 5);
  const PipelineOptions opt = scenario::options_for(spec, 0.1);
  const auto days = scenario::days_of(synthesize_dataset(spec), opt);
  ASSERT_EQ(days.size(), 5u);
  for (const DaySegment& d : days) {
    const SparseModel m = fit_day(d, spec.true_shifts, opt.hyper);
    const double err = scenario::support_error(m, spec.true_model);
    EXPECT_GE(err, 0.0) << m.to_string();
    EXPECT_LT(err, 0.01) << m.to_string();
    EXPECT_EQ(m.provenance.train_day, d.date);
    EXPECT_EQ(m.provenance.shifts, spec.true_shifts);
  }
}

TEST(FitDay, Deterministic) {
  const SynthSpec spec = scenario::full_schedule(2.0, 3, 2);
  const PipelineOptions opt = scenario::options_for(spec, 1.0);
  const auto days = scenario::days_of(synthesize_dataset(spec), opt);
  EXPECT_EQ(fit_day(days[0], {6, 1}, opt.hyper), fit_day(days[0], {6, 1}, opt.hyper));
}

TEST(FitDay, FlatDayGivesEmptyOrZeroModel) {
  DaySegment day;
  day.date = gsindy::test::date(2027, 5, 13);
  day.glucose = gsindy::test::series(std::vector<double>(288, 110.0));
  day.basal = gsindy::test::series(std::vector<double>(288, 0.0));
  day = absorb_day(std::move(day), {});
  try {
    const SparseModel m = fit_day(day, {1, 1});
    ASSERT_EQ(m.size(), 1u);
    EXPECT_TRUE(m.terms[0].is_constant());
    EXPECT_NEAR(m.coefficients[0], 0.0, 1e-12);
  } catch (const EmptyModelError& e) {
    EXPECT_NE(std::string(e.what()).find("2027-05-13"), std::string::npos);
  }
}

TEST(ModelJson, RoundTrip) {
  SparseModel m = default_planted_model();
  m.hyper.threshold = 0.25;
  m.provenance = {gsindy::test::date(2027, 5, 3), ShiftConfig{6, 1}};
  m.coefficients[0] = 0.1 + 0.2;  // not exactly representable in short decimal form
  const SparseModel back = model_from_json(model_to_json(m));
  EXPECT_EQ(back, m);
  EXPECT_EQ(model_to_json(back), model_to_json(m));
  EXPECT_THROW(model_from_json("{\"terms\": 3}"), ParseError);
  EXPECT_THROW(model_from_json("not json"), ParseError);
}

TEST(ModelExpression, ParsesTerms) {
  const SparseModel m = parse_model_expression("6 - 0.05*G + 0.8*C - 0.004*B*G + 2*G^2");
  EXPECT_EQ(m.coefficient(TermDescriptor::constant()), 6.0);
  EXPECT_EQ(m.coefficient(TermDescriptor::monomial({{V::glucose, 1}})), -0.05);
  EXPECT_EQ(m.coefficient(TermDescriptor::monomial({{V::bolus, 1}, {V::glucose, 1}})), -0.004);
  EXPECT_EQ(m.coefficient(TermDescriptor::monomial({{V::glucose, 2}})), 2.0);
  EXPECT_THROW(parse_model_expression("3*X"), ParseError);
}
