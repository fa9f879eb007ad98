#include <benchmark/benchmark.h>

#include "gsindy/absorption.hpp"
#include "gsindy/pipeline.hpp"
#include "scenarios.hpp"

using namespace gsindy;

namespace {

struct Data {
  SynthSpec spec;
  PipelineOptions options;
  std::vector<DaySegment> days;
};

const Data& data() {
  static const Data d = [] {
    Data out;
    out.spec = scenario::full_schedule(2.0, 42, 11);
    out.options = scenario::options_for(out.spec, 2.0);
    out.days = scenario::days_of(synthesize_dataset(out.spec), out.options);
    return out;
  }();
  return d;
}

void BM_Bergerize(benchmark::State& state) {
  const DaySegment& day = data().days[0];
  const BergerParams p = data().options.absorption.meal;
  for (auto _ : state) benchmark::DoNotOptimize(bergerize(day.carbs_raw, p, day.grid(), {}, 4));
}
BENCHMARK(BM_Bergerize);

void BM_BuildLibrary(benchmark::State& state) {
  const DaySegment& day = data().days[0];
  for (auto _ : state) benchmark::DoNotOptimize(build_library(day, {6, 1}));
}
BENCHMARK(BM_BuildLibrary);

void BM_FitDay(benchmark::State& state) {
  const DaySegment& day = data().days[0];
  for (auto _ : state) benchmark::DoNotOptimize(fit_day(day, {6, 1}, data().options.hyper));
}
BENCHMARK(BM_FitDay);

void BM_SimulateDay(benchmark::State& state) {
  const DaySegment& day = data().days[1];
  const DayInputs in = shifted_inputs(day, {6, 1});
  SimulationOptions o;
  o.substeps = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(simulate_day(data().spec.true_model, day.glucose[0], in, o));
}
BENCHMARK(BM_SimulateDay)->Arg(1)->Arg(4)->Arg(16);

void BM_GridSearch(benchmark::State& state) {
  PipelineOptions o = data().options;
  o.jobs = static_cast<std::size_t>(state.range(1));
  const std::vector<DaySegment> days(data().days.begin(), data().days.begin() + state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(grid_search_shifts(days, o));
}
BENCHMARK(BM_GridSearch)->Args({4, 1})->Args({11, 1})->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
