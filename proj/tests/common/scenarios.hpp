#pragma once

#include <string_view>
#include <vector>

#include "gsindy/ingest.hpp"
#include "gsindy/pipeline.hpp"

// Synthetic set-ups shared by the unit and acceptance tests.
namespace gsindy::scenario {

inline AbsorptionConfig affine_absorption() {
  AbsorptionConfig a;
  a.bolus.t50_form = T50Form::affine;
  a.meal = a.bolus;
  return a;
}

/// Meals only: no bolus events and zero basal, so C is the sole input.
inline SynthSpec meals_only(std::string_view model, double noise_sd, std::uint64_t seed, int n_days = 11) {
  SynthSpec spec;
  spec.true_model = parse_model_expression(model);
  spec.noise_sd = noise_sd;
  spec.seed = seed;
  spec.n_days = n_days;
  spec.absorption = affine_absorption();
  spec.schedule.paired_bolus = false;
  spec.schedule.basal_min = spec.schedule.basal_max = 0.0;
  return spec;
}

/// Meals with paired boluses and a varying basal rate, planted shifts (6, 1).
inline SynthSpec full_schedule(double noise_sd, std::uint64_t seed, int n_days = 11) {
  SynthSpec spec;
  spec.true_model = default_planted_model();
  spec.noise_sd = noise_sd;
  spec.seed = seed;
  spec.n_days = n_days;
  spec.absorption = affine_absorption();
  return spec;
}

inline PipelineOptions options_for(const SynthSpec& spec, double threshold, std::size_t jobs = 1) {
  PipelineOptions o;
  o.absorption = spec.absorption;
  o.simulation = spec.simulation;
  o.hyper.threshold = threshold;
  o.shift_grid = default_shift_grid();
  o.jobs = jobs;
  return o;
}

/// Segments and absorbs a synthetic dataset.
inline std::vector<DaySegment> days_of(const SynthResult& syn, const PipelineOptions& options) {
  const PatientDataset& d = syn.dataset;
  Segmentation seg = segment_days(d.glucose, d.basal, d.bolus, d.meals);
  return prepare_days(std::move(seg.days), options);
}

/// Largest relative coefficient error, or a negative value if the support differs.
inline double support_error(const SparseModel& fitted, const SparseModel& truth) {
  if (fitted.size() != truth.size()) return -1.0;
  double worst = 0.0;
  for (std::size_t j = 0; j < truth.size(); ++j) {
    bool found = false;
    for (std::size_t k = 0; k < fitted.size(); ++k)
      if (fitted.terms[k] == truth.terms[j]) {
        found = true;
        worst = std::max(worst, std::abs(fitted.coefficients[k] / truth.coefficients[j] - 1.0));
      }
    if (!found) return -1.0;
  }
  return worst;
}

}  // namespace gsindy::scenario
