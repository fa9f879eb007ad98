#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "gsindy/errors.hpp"
#include "gsindy/pipeline.hpp"

namespace gsindy {

namespace {

std::string exact(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fixed4(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "NA" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double to_double(const std::string& s, std::size_t line) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError("bad number '" + s + "'", line);
  return v;
}

int to_int(const std::string& s, std::size_t line) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError("bad integer '" + s + "'", line);
  return v;
}

Date to_date(const std::string& s, std::size_t line) {
  const auto d = parse_date(s);
  if (!d) throw ParseError("bad date '" + s + "'", line);
  return *d;
}

constexpr const char* kRecordsHeader =
    "train_day,train_bolus_shift,train_carb_shift,eval_day,eval_bolus_shift,eval_carb_shift,mae,diverged,failed";

}  // namespace

void write_records_csv(std::span<const GridSearchRecord> records, std::ostream& out) {
  out << kRecordsHeader << '\n';
  for (const GridSearchRecord& r : records)
    out << format_date(r.train_day) << ',' << r.train_shifts.bolus_steps << ',' << r.train_shifts.carb_steps
        << ',' << format_date(r.eval_day) << ',' << r.eval_shifts.bolus_steps << ','
        << r.eval_shifts.carb_steps << ',' << exact(r.mae) << ',' << (r.diverged ? 1 : 0) << ','
        << (r.failed ? 1 : 0) << '\n';
}

std::vector<GridSearchRecord> read_records_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || split(line) != split(kRecordsHeader))
    throw ParseError("grid-search records: unexpected header", 1);
  std::vector<GridSearchRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split(line);
    if (f.size() != 9) throw ParseError("grid-search records: expected 9 fields", line_no);
    records.push_back({to_date(f[0], line_no),
                       {to_int(f[1], line_no), to_int(f[2], line_no)},
                       to_date(f[3], line_no),
                       {to_int(f[4], line_no), to_int(f[5], line_no)},
                       to_double(f[6], line_no),
                       f[7] == "1",
                       f[8] == "1"});
  }
  return records;
}

std::string shift_selection_to_json(const ShiftSelection& selection) {
  nlohmann::json doc;
  doc["chosen"] = {{"bolus_shift", selection.chosen.bolus_steps}, {"carb_shift", selection.chosen.carb_steps}};
  nlohmann::json summary = nlohmann::json::array();
  for (const ShiftSummary& s : selection.summary) {
    nlohmann::json retained = nlohmann::json::array();
    for (const Date& d : s.retained) retained.push_back(format_date(d));
    summary.push_back({{"bolus_shift", s.shifts.bolus_steps},
                       {"carb_shift", s.shifts.carb_steps},
                       {"score", std::isfinite(s.score) ? nlohmann::json(s.score) : nlohmann::json()},
                       {"retained_days", retained}});
  }
  doc["summary"] = summary;
  doc["record_count"] = selection.records.size();
  return doc.dump(2) + "\n";
}

ShiftSelection shift_selection_from_json(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text.begin(), text.end());
    ShiftSelection sel;
    sel.chosen = {doc.at("chosen").at("bolus_shift").get<int>(), doc.at("chosen").at("carb_shift").get<int>()};
    for (const auto& s : doc.at("summary")) {
      ShiftSummary entry;
      entry.shifts = {s.at("bolus_shift").get<int>(), s.at("carb_shift").get<int>()};
      entry.score = s.at("score").is_null() ? std::numeric_limits<double>::infinity() : s.at("score").get<double>();
      for (const auto& d : s.at("retained_days")) entry.retained.push_back(to_date(d.get<std::string>(), 0));
      sel.summary.push_back(std::move(entry));
    }
    return sel;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("shift selection JSON: ") + e.what(), 0);
  }
}

void write_report_csv(const TestReport& report, std::ostream& out) {
  auto r2 = [](const std::optional<double>& v) { return v ? fixed4(*v) : std::string("NA"); };
  out << "day,rmse_sindy,rmse_cm,mae_sindy,mae_cm,r2_sindy\n";
  for (const TestDayResult& d : report.days)
    out << format_date(d.date) << ',' << fixed4(d.sindy.rmse) << ',' << fixed4(d.constant.rmse) << ','
        << fixed4(d.sindy.mae) << ',' << fixed4(d.constant.mae) << ',' << r2(d.sindy.r2) << '\n';
  out << "Average," << fixed4(report.rmse_sindy) << ',' << fixed4(report.rmse_constant) << ','
      << fixed4(report.mae_sindy) << ',' << fixed4(report.mae_constant) << ',' << r2(report.r2_sindy) << '\n';
}

void write_trajectory_csv(const TestDayResult& day, std::ostream& out) {
  out << "timestamp,predicted,actual\n";
  for (std::size_t i = 0; i < day.predicted.size(); ++i)
    out << format_timestamp(day.predicted.time_at(i)) << ',' << exact(day.predicted[i]) << ','
        << exact(day.actual[i]) << '\n';
}

TrajectoryRows read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || split(line) != std::vector<std::string>{"timestamp", "predicted", "actual"})
    throw ParseError("trajectory: unexpected header", 1);
  TrajectoryRows rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split(line);
    if (f.size() != 3) throw ParseError("trajectory: expected 3 fields", line_no);
    const auto t = parse_timestamp(f[0]);
    if (!t) throw ParseError("trajectory: bad timestamp", line_no);
    rows.time.push_back(*t);
    rows.predicted.push_back(to_double(f[1], line_no));
    rows.actual.push_back(to_double(f[2], line_no));
  }
  return rows;
}

}  // namespace gsindy
