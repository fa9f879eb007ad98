// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion ...]   (no arguments runs all nine)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "gsindy/absorption.hpp"
#include "gsindy/errors.hpp"
#include "gsindy/metrics.hpp"
#include "gsindy/simulate.hpp"
#include "gsindy/sindy.hpp"
#include "scenarios.hpp"

using namespace gsindy;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double trapezoid(std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) s += 0.5 * (v[i - 1] + v[i]);
  return s;
}

// Absorbed amount up to T50 by Simpson's rule after t = T50·u^5, which
// smooths the t^(s-1) onset of the rate.
double integrate_rate_to_t50(double dose, const BergerParams& p) {
  const double T = t50(dose, p);
  const int n = 4000;
  auto f = [&](double u) { return u == 0.0 ? 0.0 : absorption_rate(dose, T * std::pow(u, 5), p) * 5.0 * T * std::pow(u, 4); };
  double s = f(0.0) + f(1.0);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(static_cast<double>(i) / n);
  return s / (3.0 * n);
}

// Gauss-Jordan on the normal equations.
std::vector<double> normal_equations(const Matrix& a, std::span<const double> y) {
  const std::size_t n = a.cols();
  std::vector<std::vector<double>> m(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t r = 0; r < a.rows(); ++r) m[i][j] += a(r, i) * a(r, j);
    for (std::size_t r = 0; r < a.rows(); ++r) m[i][n] += a(r, i) * y[r];
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m[r][c]) > std::abs(m[p][c])) p = r;
    std::swap(m[c], m[p]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = m[r][c] / m[c][c];
      for (std::size_t k = c; k <= n; ++k) m[r][k] -= f * m[c][k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = m[i][n] / m[i][i];
  return x;
}

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

SindyHyper hyper(double threshold, double ridge) {
  SindyHyper h;
  h.threshold = threshold;
  h.ridge = ridge;
  return h;
}

// Threshold for the full-schedule planted experiments (criteria 4, 5, 9).
constexpr double kShiftThreshold = 2.0;
// Threshold for the meals-only recovery experiment (criterion 3).
constexpr double kRecoveryThreshold = 1.0;

Verdict berger_mass_balance() {
  Verdict v;
  double worst_balance = 0.0, worst_half = 0.0;
  for (T50Form form : {T50Form::product, T50Form::affine})
    for (double dose : {1.0, 10.0, 75.0}) {
      BergerParams p;
      p.t50_form = form;
      const double span = 50.0 * t50(dose, p);
      const Grid g{Timestamp{}, kDefaultStep, static_cast<std::size_t>(span / 5.0) + 2};
      const auto a = bergerize(EventList(EventKind::bolus, {{g.start, dose}}), p, g).series;
      const double balance = std::abs(p.decay_rate * trapezoid(a.values()) - dose) / dose;
      const double half = std::abs(integrate_rate_to_t50(dose, p) - dose / 2.0);
      const double closed = std::abs(cumulative_absorption(dose, t50(dose, p), p) - dose / 2.0);
      worst_balance = std::max(worst_balance, balance);
      worst_half = std::max({worst_half, half, closed});
    }
  v.pass = worst_balance < 0.01 && worst_half < 1e-6;
  v.detail = fmt("max mass-balance error %.3g%% (< 1%%), max |A(T50) - D/2| %.2g (< 1e-6)", 100 * worst_balance, worst_half);
  return v;
}

Verdict stlsq_oracle() {
  Verdict v;
  std::mt19937 rng(20270513);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t cols = 1 + trial % 10, rows = cols + 2 + trial % 13;
    const Matrix a = random_matrix(rows, cols, rng);
    std::vector<double> y(rows);
    for (double& x : y) x = n(rng);
    const auto oracle = normal_equations(a, y);
    const auto fit = stlsq(raw_library(a), y, hyper(0.0, 0.0));
    for (std::size_t j = 0; j < cols; ++j) worst = std::max(worst, std::abs(fit.coefficients[j] - oracle[j]));
  }
  std::uniform_int_distribution<std::size_t> pick(0, 9);
  std::uniform_real_distribution<double> mag(0.5, 5.0);
  int exact = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix a = random_matrix(80, 10, rng);
    const std::size_t i = pick(rng);
    std::size_t j = pick(rng);
    while (j == i) j = pick(rng);
    const double ci = mag(rng), cj = -mag(rng);
    std::vector<double> y(80);
    for (std::size_t r = 0; r < 80; ++r) y[r] = ci * a(r, i) + cj * a(r, j);
    const LibraryMatrix lib = raw_library(a);
    // Thresholding happens on normalised columns, where the coefficients are c * sd.
    const double smallest = std::min(std::abs(ci) * lib.scale[i], std::abs(cj) * lib.scale[j]);
    const auto fit = stlsq(lib, y, hyper(0.9 * smallest, 0.0));
    bool ok = true;
    for (std::size_t c = 0; c < 10; ++c) ok = ok && ((fit.coefficients[c] != 0.0) == (c == i || c == j));
    exact += ok;
  }
  v.pass = worst < 1e-8 && exact == 100;
  v.detail = fmt("oracle max error %.2g (< 1e-8), exact support %.0f/100", worst, exact);
  return v;
}

Verdict planted_recovery() {
  Verdict v;
  const char* model = "-0.05*G + 20*C^2";
  std::string detail;
  for (double noise : {0.0, 2.0}) {
    const double tolerance = noise == 0.0 ? 0.01 : 0.10;
    const SynthSpec spec = scenario::meals_only(model, noise, 1);
    const PipelineOptions opt = scenario::options_for(spec, kRecoveryThreshold);
    const auto days = scenario::days_of(synthesize_dataset(spec), opt);
    int ok = 0;
    double worst = 0.0;
    for (const DaySegment& d : days) {
      double err = -1.0;
      try {
        err = scenario::support_error(fit_day(d, spec.true_shifts, opt.hyper), spec.true_model);
      } catch (const EmptyModelError&) {
      }
      if (err >= 0.0 && err < tolerance) ++ok;
      if (err >= 0.0) worst = std::max(worst, err);
      else worst = INFINITY;
    }
    v.pass = v.pass && ok == static_cast<int>(days.size());
    detail += fmt("noise %.0f: %.0f/%.0f days exact support, worst coefficient error %.2f%%", noise, ok,
                  static_cast<double>(days.size()), 100 * worst) +
              fmt(" (< %.0f%%); ", 100 * tolerance);
  }
  v.detail = "dG/dt = " + std::string(model) + "; " + detail.substr(0, detail.size() - 2);
  return v;
}

Verdict planted_shifts() {
  Verdict v;
  int hits = 0;
  double slowest = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const SynthSpec spec = scenario::full_schedule(2.0, seed);
    const PipelineOptions opt = scenario::options_for(spec, kShiftThreshold);
    const auto days = scenario::days_of(synthesize_dataset(spec), opt);
    const auto t0 = std::chrono::steady_clock::now();
    const GridSearchResult r = grid_search_shifts(days, opt);
    slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    hits += r.selection.chosen == spec.true_shifts;
  }
  v.pass = hits >= 95 && slowest < 300.0;
  v.detail = fmt("(6, 1) chosen in %.0f/100 runs at noise sd 2 (>= 95); slowest full grid %.1f s (< 300 s)", hits, slowest);
  return v;
}

Verdict baseline_dominance() {
  Verdict v;
  const SynthSpec spec = scenario::full_schedule(2.0, 42, 17);
  const PipelineOptions opt = scenario::options_for(spec, kShiftThreshold);
  const DaySplit split = split_first_n(scenario::days_of(synthesize_dataset(spec), opt), 11);
  const GridSearchResult grid = grid_search_shifts(split.train, opt);
  const ModelSelection best = select_best_model(split.train, grid.selection.chosen, opt, &grid);
  const TestReport rep = evaluate_test(best.model, grid.selection.chosen, split.test, opt);
  bool dynamic = true;
  for (const TestDayResult& d : rep.days) dynamic = dynamic && !d.constant_unbeatable;
  const double r2 = rep.r2_sindy.value_or(-INFINITY);
  v.pass = dynamic && rep.mae_sindy < rep.mae_constant && rep.rmse_sindy < rep.rmse_constant && r2 >= 0.5;
  v.detail = fmt("%.0f test days: MAE %.2f vs CM %.2f, ", static_cast<double>(rep.days.size()), rep.mae_sindy, rep.mae_constant) +
             fmt("RMSE %.2f vs CM %.2f, R2 %.3f (>= 0.5)", rep.rmse_sindy, rep.rmse_constant, r2);
  return v;
}

Verdict integrator_order() {
  Verdict v;
  SparseModel decay;
  decay.terms = {TermDescriptor::monomial({{Variable::glucose, 1}})};
  decay.coefficients = {-0.1};
  const std::size_t n = 11;
  const auto zero = UniformSeries(Timestamp{}, kDefaultStep, std::vector<double>(n, 0.0));
  auto error = [&](int substeps) {
    SimulationOptions o;
    o.substeps = substeps;
    const auto sim = simulate_day(decay, 100.0, {zero, zero, zero}, o);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      worst = std::max(worst, std::abs(sim.trajectory[i] - 100.0 * std::exp(-0.1 * static_cast<double>(i))));
    return worst;
  };
  std::string ratios;
  for (int s : {2, 4, 8}) {
    const double ratio = error(s) / error(2 * s);
    v.pass = v.pass && ratio >= 12.0 && ratio <= 20.0;
    ratios += fmt("%.2f ", ratio);
  }
  v.detail = "error ratios per substep halving (2->4->8->16): " + ratios + "(in [12, 20])";
  return v;
}

Verdict metrics_exactness() {
  Verdict v;
  const std::vector<double> p{0.0, 0.0}, a{3.0, 4.0};
  const MetricsRecord m = compute_metrics(p, a);
  const bool fixture = std::abs(m.mae - 3.5) < 1e-9 && std::abs(m.rmse - std::sqrt(12.5)) < 1e-9;
  const std::vector<double> same{1.0, 2.0, 3.0};
  const MetricsRecord id = compute_metrics(same, same);
  const bool identity = id.mae == 0.0 && id.rmse == 0.0 && id.r2 && std::abs(*id.r2 - 1.0) < 1e-9;
  std::mt19937 rng(7);
  std::normal_distribution<double> g(120.0, 50.0);
  int held = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> x(2 + trial % 200), y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = g(rng);
      y[i] = g(rng);
    }
    const MetricsRecord r = compute_metrics(x, y);
    held += r.rmse >= r.mae;
  }
  v.pass = fixture && identity && held == 1000;
  v.detail = fmt("MAE %.12g, RMSE %.12g (sqrt 12.5 = %.12g); rmse >= mae on %.0f/1000 random pairs", m.mae, m.rmse,
                 std::sqrt(12.5), held);
  return v;
}

Verdict reference_algebra() {
  Verdict v;
  const SparseModel ref = reference_model();
  const double origin = evaluate_rhs(ref, 0, 0, 0, 0);
  const double unit_g = evaluate_rhs(ref, 1, 0, 0, 0);
  v.pass = std::abs(origin - -1.14) < 1e-12 && std::abs(unit_g - 2.56) < 1e-12;
  v.detail = fmt("rhs(0,0,0,0) = %.15g, rhs(G=1) = %.15g", origin, unit_g);
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism() {
  Verdict v;
  const fs::path root = fs::temp_directory_path() / "gsindy_acceptance_determinism";
  fs::remove_all(root);
  const std::vector<std::string> stages{"synth", "gridsearch", "fit", "simulate", "evaluate", "report"};
  auto pipeline = [&](const std::vector<std::string>& common) {
    for (const std::string& stage : stages) {
      std::vector<std::string> args{stage};
      args.insert(args.end(), common.begin(), common.end());
      std::ostringstream out, err;
      if (cli::run(args, out, err) != 0) throw std::runtime_error(stage + ": " + err.str());
    }
  };
  const std::string threshold = fmt("%g", kShiftThreshold);
  pipeline({"--output.dir", (root / "a").string(), "--berger.t50_form", "affine", "--sindy.threshold", threshold,
            "--jobs", "1"});
  const std::string meta = (root / "a" / "run_meta.json").string();
  // The same run_meta.json replayed with three and with four workers.
  pipeline({"--config", meta, "--output.dir", (root / "b").string(), "--jobs", "3"});
  pipeline({"--config", meta, "--output.dir", (root / "c").string(), "--jobs", "4"});

  int files = 0, identical = 0;
  for (const auto& e : fs::directory_iterator(root / "a")) {
    const std::string name = e.path().filename().string();
    if (name == "run_meta.json") continue;  // differs only in output.dir
    ++files;
    const std::string ref = slurp(e.path());
    identical += ref == slurp(root / "b" / name) && ref == slurp(root / "c" / name);
  }
  fs::remove_all(root);
  v.pass = files >= 8 && identical == files;
  v.detail = fmt("%.0f/%.0f artifacts byte-identical across jobs = 1, 3, 4", identical, files);
  return v;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "Berger mass balance", berger_mass_balance},
      {2, "STLSQ oracle equivalence", stlsq_oracle},
      {3, "planted-model recovery", planted_recovery},
      {4, "planted-shift recovery", planted_shifts},
      {5, "baseline dominance", baseline_dominance},
      {6, "integrator order", integrator_order},
      {7, "metrics exactness", metrics_exactness},
      {8, "reference-model algebra", reference_algebra},
      {9, "determinism and reproducibility", determinism},
  };
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
  const double limits[] = {0, 1.0, 5.0, 10.0, 0, 0, 0, 0, 0, 0};  // seconds, 0 = no runtime bound

  int failed = 0;
  for (const Criterion& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double limit = limits[c.id];
    if (limit > 0.0 && secs >= limit) {
      v.pass = false;
      v.detail += fmt("; runtime over %.0f s", limit);
    }
    std::printf("criterion %d %-32s %s  %s  [%.2f s]\n", c.id, c.name, v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed == 0 ? 0 : 1;
}
