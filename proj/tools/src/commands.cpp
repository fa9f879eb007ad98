#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "config.hpp"
#include "gsindy/errors.hpp"
#include "gsindy/ingest.hpp"
#include "gsindy/pipeline.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;

namespace gsindy::cli {

namespace {

// A required input is absent; the message names the file.
class MissingArtifact : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Context {
  RunConfig config;
  PipelineOptions options;
  fs::path dir;
  std::ostream& out;
  std::ostream& err;

  fs::path at(const std::string& name) const { return dir / name; }
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string require(const Context& ctx, const std::string& name, const std::string& producer) {
  const fs::path p = ctx.at(name);
  if (!fs::exists(p)) throw MissingArtifact("missing " + p.string() + " (run '" + producer + "' first)");
  return read_file(p);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("failed writing " + path.string());
}

template <class Fn>
void write_with(const fs::path& path, Fn&& fn) {
  std::ostringstream buf;
  fn(buf);
  write_file(path, buf.str());
}

struct Days {
  std::vector<DaySegment> train;
  std::vector<DaySegment> test;
};

Days load_days(const Context& ctx, bool need_test) {
  const PatientDataset data = parse_events_csv(require(ctx, "dataset.csv", "ingest' or 'synth"));
  Segmentation seg = segment_days(data.glucose, data.basal, data.bolus, data.meals, day_rule(ctx.config));
  for (const std::string& w : seg.warnings) ctx.err << "warning: " << w << "\n";
  const long long n_train = ctx.config.integer("split.train");
  if (n_train < 2) throw ConfigError("split.train must be at least 2");
  if (static_cast<std::size_t>(n_train) > seg.days.size())
    throw PipelineError("split.train = " + std::to_string(n_train) + " but the dataset has only " +
                        std::to_string(seg.days.size()) + " complete days");
  DaySplit split = split_first_n(std::move(seg.days), static_cast<std::size_t>(n_train));
  if (need_test && split.test.empty())
    throw PipelineError("no test days: every complete day is used for training (split.train = " +
                        std::to_string(n_train) + ")");
  return {prepare_days(std::move(split.train), ctx.options), prepare_days(std::move(split.test), ctx.options)};
}

SparseModel load_model(const Context& ctx) {
  SparseModel model = model_from_json(require(ctx, "model.json", "fit"));
  if (!model.provenance.shifts) throw PipelineError(ctx.at("model.json").string() + " records no shifts");
  return model;
}

std::vector<Date> dates_of(const std::vector<DaySegment>& days) {
  std::vector<Date> out;
  for (const DaySegment& d : days) out.push_back(d.date);
  return out;
}

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// --- subcommands -----------------------------------------------------------------

void cmd_ingest(Context& ctx) {
  const std::string& path = ctx.config.get("data.path");
  if (path.empty()) throw ConfigError("data.path is not set");
  if (!fs::exists(path)) throw MissingArtifact("input file not found: " + path);
  std::string format = ctx.config.get("data.format");
  if (format == "auto") {
    std::string ext = fs::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    format = ext == ".xml" ? "xml" : "csv";
  }
  PatientDataset data;
  if (format == "xml") {
    XmlImport imported = parse_ohio_xml(read_file(path));
    for (const std::string& w : imported.warnings) ctx.err << "warning: " << w << "\n";
    data = std::move(imported.dataset);
  } else if (format == "csv") {
    data = parse_events_csv(read_file(path));
  } else {
    throw ConfigError("data.format: expected auto, csv or xml, got '" + format + "'");
  }

  const Segmentation seg = segment_days(data.glucose, data.basal, data.bolus, data.meals, day_rule(ctx.config));
  for (const std::string& w : seg.warnings) ctx.err << "warning: " << w << "\n";
  for (const IncompleteDay& d : seg.incomplete)
    ctx.err << "skipping " << format_date(d.date) << ": " << d.reason << "\n";
  write_with(ctx.at("dataset.csv"), [&](std::ostream& o) { write_events_csv(data, o); });
  ctx.out << "ingest: " << seg.days.size() << " complete days, " << seg.incomplete.size() << " incomplete, "
          << data.glucose.size() << " glucose samples -> " << ctx.at("dataset.csv").string() << "\n";
}

void cmd_synth(Context& ctx) {
  const SynthSpec spec = synth_spec(ctx.config);
  const SynthResult result = synthesize_dataset(spec);
  write_with(ctx.at("dataset.csv"), [&](std::ostream& o) { write_events_csv(result.dataset, o); });
  write_file(ctx.at("ground_truth.json"), ground_truth_to_json(result.truth));
  ctx.out << "synth: " << spec.n_days << " days, seed " << spec.seed << ", planted shifts "
          << to_string(spec.true_shifts) << " -> " << ctx.at("dataset.csv").string() << "\n";
}

void cmd_gridsearch(Context& ctx) {
  const Days days = load_days(ctx, false);
  const GridSearchResult result = grid_search_shifts(days.train, ctx.options);
  constexpr std::size_t kShownWarnings = 3;
  for (std::size_t i = 0; i < std::min(kShownWarnings, result.warnings.size()); ++i)
    ctx.err << "warning: " << result.warnings[i] << "\n";
  if (result.warnings.size() > kShownWarnings)
    ctx.err << "warning: " << result.warnings.size() - kShownWarnings << " more failed fits (scored as +inf)\n";
  write_with(ctx.at("gridsearch_records.csv"),
             [&](std::ostream& o) { write_records_csv(result.selection.records, o); });
  write_file(ctx.at("shift_selection.json"), shift_selection_to_json(result.selection));
  double score = 0.0;
  for (const ShiftSummary& s : result.selection.summary)
    if (s.shifts == result.selection.chosen) score = s.score;
  ctx.out << "gridsearch: " << days.train.size() << " days x " << ctx.options.shift_grid.size() << " shifts, "
          << result.selection.records.size() << " simulations; chosen " << to_string(result.selection.chosen)
          << " (score " << fixed(score) << " mg/dL)\n";
}

void cmd_fit(Context& ctx) {
  const ShiftSelection selection =
      shift_selection_from_json(require(ctx, "shift_selection.json", "gridsearch"));
  const Days days = load_days(ctx, false);
  const ModelSelection best = select_best_model(days.train, selection.chosen, ctx.options);
  write_file(ctx.at("model.json"), model_to_json(best.model));
  double score = 0.0;
  for (const auto& [d, s] : best.scores)
    if (d == best.day) score = s;
  ctx.out << "fit: model from " << format_date(best.day) << " under " << to_string(selection.chosen)
          << ", validation MAE " << fixed(score) << " mg/dL: " << best.model.to_string() << "\n";
}

void cmd_simulate(Context& ctx) {
  const SparseModel model = load_model(ctx);
  const Days days = load_days(ctx, true);
  const TestReport report =
      evaluate_test(model, *model.provenance.shifts, days.test, ctx.options, dates_of(days.train));
  std::size_t diverged = 0;
  for (const TestDayResult& d : report.days) {
    write_with(ctx.at("trajectory_" + format_date(d.date) + ".csv"),
               [&](std::ostream& o) { write_trajectory_csv(d, o); });
    diverged += d.diverged;
  }
  ctx.out << "simulate: " << report.days.size() << " test days written";
  if (diverged) ctx.out << " (" << diverged << " left the guard band)";
  ctx.out << "\n";
}

void cmd_evaluate(Context& ctx) {
  const SparseModel model = load_model(ctx);
  const Days days = load_days(ctx, true);
  const TestReport report =
      evaluate_test(model, *model.provenance.shifts, days.test, ctx.options, dates_of(days.train));
  write_with(ctx.at("report.csv"), [&](std::ostream& o) { write_report_csv(report, o); });
  for (const TestDayResult& d : report.days) {
    if (d.constant_unbeatable)
      ctx.err << "note: " << format_date(d.date) << " is constant; the constant model is exact there\n";
    if (d.diverged) ctx.err << "note: the simulation of " << format_date(d.date) << " left the guard band\n";
  }
  ctx.out << "evaluate: " << report.days.size() << " test days, MAE " << fixed(report.mae_sindy) << " (CM "
          << fixed(report.mae_constant) << "), RMSE " << fixed(report.rmse_sindy) << " (CM "
          << fixed(report.rmse_constant) << ")";
  if (report.r2_sindy) ctx.out << ", R2 " << fixed(*report.r2_sindy);
  ctx.out << "\n";
}

void cmd_report(Context& ctx) {
  std::vector<fs::path> inputs;
  if (fs::is_directory(ctx.dir))
    for (const auto& entry : fs::directory_iterator(ctx.dir)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("trajectory_", 0) == 0 && entry.path().extension() == ".csv") inputs.push_back(entry.path());
    }
  if (inputs.empty())
    throw MissingArtifact("missing trajectory_<date>.csv in " + ctx.dir.string() + " (run 'simulate' first)");
  std::sort(inputs.begin(), inputs.end());
  for (const fs::path& p : inputs) {
    std::istringstream in(read_file(p));
    const TrajectoryRows rows = read_trajectory_csv(in);
    const std::string date = p.stem().string().substr(std::string("trajectory_").size());
    write_file(ctx.at("plot_" + date + ".svg"), render_trajectory_svg(rows, "Glucose " + date));
  }
  ctx.out << "report: " << inputs.size() << " plots written to " << ctx.dir.string() << "\n";
}

const std::map<std::string, std::pair<std::function<void(Context&)>, std::string>>& commands() {
  static const std::map<std::string, std::pair<std::function<void(Context&)>, std::string>> table = {
      {"ingest", {cmd_ingest, "read data.path and write dataset.csv"}},
      {"synth", {cmd_synth, "generate a planted synthetic dataset.csv"}},
      {"gridsearch", {cmd_gridsearch, "time-shift search over the training days"}},
      {"fit", {cmd_fit, "select the best training-day model under the chosen shifts"}},
      {"simulate", {cmd_simulate, "simulate the test days from their first glucose value"}},
      {"evaluate", {cmd_evaluate, "compare the model with the constant baseline on the test days"}},
      {"report", {cmd_report, "render plot_<date>.svg from trajectory_<date>.csv"}},
  };
  return table;
}

std::string key_help() {
  std::string s = "\nConfig keys (set in --config FILE or as --key value):\n";
  for (const KeyInfo& k : config_keys()) {
    std::string line = "  " + k.key;
    line.resize(std::max<std::size_t>(line.size() + 1, 28), ' ');
    s += line + k.help + " [" + k.default_value + "]\n";
  }
  return s;
}

// Applies `--key value` and `--key=value` pairs left over by the parser.
void apply_overrides(RunConfig& config, const std::vector<std::string>& extras) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const std::string& a = extras[i];
    if (a.rfind("--", 0) != 0 || a.size() < 3) throw ConfigError("unexpected argument '" + a + "'");
    std::string key = a.substr(2), value;
    if (auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.erase(eq);
    } else {
      if (i + 1 >= extras.size()) throw ConfigError("missing value for --" + key);
      value = extras[++i];
    }
    config.set(key, value);
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse identification of glucose dynamics"};
  app.name("gsindy");
  app.require_subcommand(1, 1);
  app.allow_extras();
  app.footer(key_help());
  std::string config_path;
  app.add_option("--config", config_path, "flat key = value file or a run_meta.json");
  for (const auto& [name, entry] : commands()) app.add_subcommand(name, entry.second)->allow_extras()->fallthrough();

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "gsindy: " << e.what() << "\n";
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  RunConfig config;
  try {
    if (!config_path.empty()) config.load_file(config_path);
    apply_overrides(config, app.remaining(true));
  } catch (const std::exception& e) {
    err << "gsindy: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    Context ctx{config, pipeline_options(config), fs::path(config.get("output.dir")), out, err};
    fs::create_directories(ctx.dir);
    write_file(ctx.at("run_meta.json"), config.meta_json());
    commands().at(sub->get_name()).first(ctx);
  } catch (const ConfigError& e) {
    err << "gsindy: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "gsindy " << sub->get_name() << ": " << e.what() << "\n";
    return kExitFailure;
  }
  return 0;
}

}  // namespace gsindy::cli
