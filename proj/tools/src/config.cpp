#include "config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gsindy/errors.hpp"
#include "gsindy/parallel.hpp"

namespace gsindy::cli {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Keys that describe the machine rather than the experiment.
bool machine_key(const std::string& key) { return key == "jobs"; }

T50Form parse_form(const RunConfig& c, const std::string& key) {
  const std::string& v = c.get(key);
  if (v == "product") return T50Form::product;
  if (v == "affine") return T50Form::affine;
  throw ConfigError(key + ": expected product or affine, got '" + v + "'");
}

BergerParams berger(const RunConfig& c, const std::string& prefix, const BergerParams& fallback) {
  BergerParams p = fallback;
  auto has = [&](const char* name) { return !c.get(prefix + name).empty(); };
  if (has("s")) p.s = c.number(prefix + "s");
  if (has("a")) p.a = c.number(prefix + "a");
  if (has("b")) p.b = c.number(prefix + "b");
  if (has("t50_form")) p.t50_form = parse_form(c, prefix + "t50_form");
  if (has("k")) p.decay_rate = c.number(prefix + "k");
  if (!(p.s > 0.0)) throw ConfigError(prefix + "s must be positive");
  if (!(p.decay_rate > 0.0)) throw ConfigError(prefix + "k must be positive");
  return p;
}

std::vector<int> parse_steps(const std::string& key, const std::string& text) {
  std::vector<int> steps;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    int v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || p != t.data() + t.size() || v < 0)
      throw ConfigError(key + ": expected a comma-separated list of non-negative integers, got '" + text + "'");
    steps.push_back(v);
  }
  if (steps.empty()) throw ConfigError(key + " is empty");
  return steps;
}

}  // namespace

const std::vector<KeyInfo>& config_keys() {
  static const std::vector<KeyInfo> keys = {
      {"data.path", "", "input patient file (.csv interchange format or OhioT1DM .xml)"},
      {"data.format", "auto", "auto | csv | xml"},
      {"output.dir", "out", "directory for every artifact"},
      {"split.train", "11", "the first N complete days train, the rest test"},
      {"shifts.steps", "1,2,3,4,5,6", "candidate shifts in grid steps, used for both channels"},
      {"berger.s", "1.6", "Berger shape exponent"},
      {"berger.a", "5.2", "T50 slope"},
      {"berger.b", "41", "T50 factor (product) or intercept (affine)"},
      {"berger.t50_form", "product", "product: T50 = a*D*b; affine: T50 = a*D + b"},
      {"berger.k", "1", "plasma decay rate per model time unit"},
      {"berger.meal.s", "", "meal override of berger.s (empty: same as bolus)"},
      {"berger.meal.a", "", "meal override of berger.a"},
      {"berger.meal.b", "", "meal override of berger.b"},
      {"berger.meal.t50_form", "", "meal override of berger.t50_form"},
      {"berger.meal.k", "", "meal override of berger.k"},
      {"berger.substeps", "4", "RK4 substeps per grid step for absorption"},
      {"sindy.threshold", "0.1", "STLSQ threshold lambda (normalised units)"},
      {"sindy.ridge", "1e-6", "ridge alpha"},
      {"sindy.max_iter", "20", "STLSQ iteration cap"},
      {"sindy.max_degree", "2", "monomial degree of the library (1 or 2)"},
      {"sindy.trig", "false", "add sin/cos of each variable to the library"},
      {"sindy.normalize", "true", "threshold in normalised-column space"},
      {"sim.substeps", "4", "RK4 substeps per grid step for glucose"},
      {"sim.g_min", "0", "lower guard bound, mg/dL"},
      {"sim.g_max", "1000", "upper guard bound, mg/dL"},
      {"time_unit_minutes", "5", "minutes per model time unit"},
      {"day.utc_offset_minutes", "0", "local time offset used for day boundaries"},
      {"day.max_gap_minutes", "30", "longest glucose gap bridged by interpolation"},
      {"gridsearch.top_fraction", "0.1", "share of models kept per shift"},
      {"gridsearch.scoring", "own_shift", "own_shift | all_shifts"},
      {"jobs", "auto", "worker threads (auto: all CPUs); never changes results"},
      {"seed", "42", "random seed for synth"},
      {"synth.n_days", "17", "synthetic days"},
      {"synth.start_date", "2027-05-01", "first synthetic day"},
      {"synth.model", "-0.05*G + 20*C^2 - 0.5*B*G", "planted right-hand side"},
      {"synth.bolus_shift", "6", "planted bolus shift in steps"},
      {"synth.carb_shift", "1", "planted carbohydrate shift in steps"},
      {"synth.noise_sd", "2", "glucose noise sd, mg/dL"},
      {"synth.g0", "120", "glucose at the first midnight"},
      {"synth.meals_min", "3", "fewest meals per day"},
      {"synth.meals_max", "5", "most meals per day"},
      {"synth.carbs_min", "20", "smallest meal, g"},
      {"synth.carbs_max", "80", "largest meal, g"},
      {"synth.paired_bolus", "true", "give every meal a bolus"},
      {"synth.carb_ratio", "10", "g of carbohydrate per insulin unit"},
      {"synth.basal_min", "0.6", "lowest basal level"},
      {"synth.basal_max", "1.4", "highest basal level"},
      {"synth.patient_id", "synthetic", "patient id written to the dataset"},
  };
  return keys;
}

RunConfig::RunConfig() {
  for (const KeyInfo& k : config_keys()) values_[k.key] = k.default_value;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = value;
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

double RunConfig::number(const std::string& key) const {
  const std::string& v = get(key);
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size())
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

long long RunConfig::integer(const std::string& key) const {
  const std::string& v = get(key);
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size())
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

bool RunConfig::flag(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

void RunConfig::load_text(std::istream& in, const std::string& source) {
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(n) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (!values_.count(key))
      throw ConfigError(source + ":" + std::to_string(n) + ": unknown config key '" + key + "'");
    values_[key] = trim(std::string_view(t).substr(eq + 1));
  }
}

void RunConfig::load_meta_json(std::string_view text, const std::string& source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(source + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("config") || !doc["config"].is_object())
    throw ConfigError(source + ": no \"config\" object");
  for (const auto& [key, value] : doc["config"].items()) {
    if (!values_.count(key)) throw ConfigError(source + ": unknown config key '" + key + "'");
    if (!value.is_string()) throw ConfigError(source + ": value of '" + key + "' must be a string");
    values_[key] = value.get<std::string>();
  }
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    load_meta_json(text, path);
  } else {
    std::istringstream lines(text);
    load_text(lines, path);
  }
}

std::string RunConfig::meta_json() const {
  nlohmann::ordered_json doc;
  doc["tool"] = "gsindy";
  doc["version"] = GSINDY_VERSION;
  doc["seed"] = get("seed");
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [key, value] : values_)
    if (!machine_key(key)) cfg[key] = value;
  doc["config"] = cfg;
  return doc.dump(2) + "\n";
}

PipelineOptions pipeline_options(const RunConfig& c) {
  PipelineOptions o;
  o.hyper.threshold = c.number("sindy.threshold");
  o.hyper.ridge = c.number("sindy.ridge");
  o.hyper.max_iter = static_cast<int>(c.integer("sindy.max_iter"));
  o.hyper.max_degree = static_cast<int>(c.integer("sindy.max_degree"));
  o.hyper.trig = c.flag("sindy.trig");
  o.hyper.normalize = c.flag("sindy.normalize");
  if (o.hyper.threshold < 0.0) throw ConfigError("sindy.threshold must be non-negative");
  if (o.hyper.ridge < 0.0) throw ConfigError("sindy.ridge must be non-negative");
  if (o.hyper.max_iter < 1) throw ConfigError("sindy.max_iter must be at least 1");
  if (o.hyper.max_degree < 1 || o.hyper.max_degree > 2) throw ConfigError("sindy.max_degree must be 1 or 2");

  o.absorption.bolus = berger(c, "berger.", BergerParams{});
  o.absorption.meal = berger(c, "berger.meal.", o.absorption.bolus);
  o.absorption.substeps = static_cast<int>(c.integer("berger.substeps"));
  if (o.absorption.substeps < 1) throw ConfigError("berger.substeps must be at least 1");

  o.simulation.substeps = static_cast<int>(c.integer("sim.substeps"));
  o.simulation.g_min = c.number("sim.g_min");
  o.simulation.g_max = c.number("sim.g_max");
  o.simulation.unit.minutes = c.number("time_unit_minutes");
  if (o.simulation.substeps < 1) throw ConfigError("sim.substeps must be at least 1");
  if (!(o.simulation.g_min < o.simulation.g_max)) throw ConfigError("sim.g_min must be below sim.g_max");
  if (!(o.simulation.unit.minutes > 0.0)) throw ConfigError("time_unit_minutes must be positive");

  o.shift_grid = shift_grid(parse_steps("shifts.steps", c.get("shifts.steps")));
  o.top_fraction = c.number("gridsearch.top_fraction");
  if (!(o.top_fraction > 0.0 && o.top_fraction <= 1.0))
    throw ConfigError("gridsearch.top_fraction must be in (0, 1]");
  const std::string& scoring = c.get("gridsearch.scoring");
  if (scoring == "own_shift")
    o.scoring = ShiftScoring::own_shift;
  else if (scoring == "all_shifts")
    o.scoring = ShiftScoring::all_shifts;
  else
    throw ConfigError("gridsearch.scoring: expected own_shift or all_shifts, got '" + scoring + "'");

  if (c.get("jobs") == "auto") {
    o.jobs = default_jobs();
  } else {
    const long long j = c.integer("jobs");
    if (j < 1) throw ConfigError("jobs must be at least 1 or 'auto'");
    o.jobs = static_cast<std::size_t>(j);
  }
  return o;
}

DayRule day_rule(const RunConfig& c) {
  DayRule r;
  r.utc_offset = std::chrono::minutes{c.integer("day.utc_offset_minutes")};
  const long long gap = c.integer("day.max_gap_minutes");
  if (gap < 0) throw ConfigError("day.max_gap_minutes must be non-negative");
  r.policy.max_gap = Seconds{gap * 60};
  return r;
}

SynthSpec synth_spec(const RunConfig& c) {
  const PipelineOptions o = pipeline_options(c);
  SynthSpec s;
  s.n_days = static_cast<int>(c.integer("synth.n_days"));
  try {
    const auto start = parse_date(c.get("synth.start_date"));
    if (!start) throw ConfigError("synth.start_date: expected YYYY-MM-DD, got '" + c.get("synth.start_date") + "'");
    s.start_date = *start;
    s.true_model = parse_model_expression(c.get("synth.model"));
  } catch (const Error& e) {
    throw ConfigError(std::string("synth: ") + e.what());
  }
  s.true_shifts = {static_cast<int>(c.integer("synth.bolus_shift")), static_cast<int>(c.integer("synth.carb_shift"))};
  s.noise_sd = c.number("synth.noise_sd");
  const long long seed = c.integer("seed");
  if (seed < 0) throw ConfigError("seed must be non-negative");
  s.seed = static_cast<std::uint64_t>(seed);
  s.g0 = c.number("synth.g0");
  s.absorption = o.absorption;
  s.simulation = o.simulation;
  s.schedule.meals_min = static_cast<int>(c.integer("synth.meals_min"));
  s.schedule.meals_max = static_cast<int>(c.integer("synth.meals_max"));
  s.schedule.carbs_min = c.number("synth.carbs_min");
  s.schedule.carbs_max = c.number("synth.carbs_max");
  s.schedule.paired_bolus = c.flag("synth.paired_bolus");
  s.schedule.carb_ratio = c.number("synth.carb_ratio");
  s.schedule.basal_min = c.number("synth.basal_min");
  s.schedule.basal_max = c.number("synth.basal_max");
  s.patient_id = c.get("synth.patient_id");
  return s;
}

}  // namespace gsindy::cli
