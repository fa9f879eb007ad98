#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "gsindy/absorption.hpp"
#include "gsindy/simulate.hpp"
#include "gsindy/sindy.hpp"
#include "gsindy/timeseries.hpp"

namespace gsindy {

/// Raw channels of one patient, each sorted by time.
struct PatientDataset {
  std::string patient_id = "unknown";
  std::vector<Sample> glucose;  // mg/dL
  std::vector<Sample> basal;    // rate levels; each sample starts a new level
  EventList bolus{EventKind::bolus};
  EventList meals{EventKind::meal};

  bool operator==(const PatientDataset&) const = default;
};

/// Reads the `timestamp,channel,value` interchange format. Rows may come in any
/// order. Throws ParseError naming the offending line.
PatientDataset parse_events_csv(std::istream& in);
PatientDataset parse_events_csv(std::string_view text);

/// Writes the interchange format, rows ordered by time then channel, values in
/// shortest round-trip form.
void write_events_csv(const PatientDataset& data, std::ostream& out);

struct XmlImport {
  PatientDataset dataset;
  std::vector<std::string> warnings;
};

/// Reads an OhioT1DM-style XML patient file (glucose_level, basal, bolus, meal
/// groups; other groups are ignored with a warning).
XmlImport parse_ohio_xml(std::istream& in);
XmlImport parse_ohio_xml(std::string_view text);

// --- synthetic data ------------------------------------------------------------

struct EventSchedule {
  int meals_min = 3;
  int meals_max = 5;
  double carbs_min = 20.0;  // g
  double carbs_max = 80.0;
  double meal_jitter_minutes = 45.0;
  bool paired_bolus = true;    // false: meals only, no bolus events
  double carb_ratio = 10.0;    // g of carbohydrate covered by one insulin unit
  double ratio_jitter = 0.3;   // relative spread of the bolus dose
  double bolus_offset_min = -20.0;  // minutes relative to the meal
  double bolus_offset_max = 15.0;
  double basal_min = 0.6;
  double basal_max = 1.4;
  int basal_changes = 4;  // level changes per day after midnight
};

struct SynthSpec {
  int n_days = 17;
  Date start_date{std::chrono::year{2027}, std::chrono::month{5}, std::chrono::day{1}};
  SparseModel true_model;
  ShiftConfig true_shifts{6, 1};
  double noise_sd = 0.0;  // mg/dL
  std::uint64_t seed = 1;
  double g0 = 120.0;      // glucose at the first midnight
  AbsorptionConfig absorption{};
  SimulationOptions simulation{};
  EventSchedule schedule{};
  std::string patient_id = "synthetic";
};

struct GroundTruth {
  SparseModel model;
  ShiftConfig shifts;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;
  std::vector<Date> days;
  std::vector<double> day_start_glucose;
};

struct SynthResult {
  PatientDataset dataset;
  GroundTruth truth;
};

/// Generates days of events, absorbs and shifts them, integrates the planted
/// model day by day (each day starts where the previous one ended) and adds
/// Gaussian noise to the glucose samples. Deterministic in `seed`.
/// Throws InvalidArgument if the planted model leaves the guard band.
SynthResult synthesize_dataset(const SynthSpec& spec);

std::string ground_truth_to_json(const GroundTruth& truth);

/// Default planted model: dG/dt = -0.05·G - 0.5·B·G + 20·C².
SparseModel default_planted_model();

/// Parses "6 - 0.05*G + 0.8*C - 0.004*B*G" (also accepts G^2). Throws ParseError.
SparseModel parse_model_expression(std::string_view text);

}  // namespace gsindy
