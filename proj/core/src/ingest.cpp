#include "gsindy/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include "gsindy/errors.hpp"

namespace gsindy {

namespace {

enum class Channel { glucose = 0, basal = 1, bolus = 2, meal = 3 };
constexpr const char* kChannelNames[] = {"glucose", "basal", "bolus", "meal"};

std::optional<Channel> channel_from(std::string_view s) {
  for (int c = 0; c < 4; ++c)
    if (s == kChannelNames[c]) return static_cast<Channel>(c);
  return std::nullopt;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct Row {
  Timestamp time;
  Channel channel;
  double value;
  std::size_t line;
};

}  // namespace

PatientDataset parse_events_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty input; expected header 'timestamp,channel,value'", 1);
  ++line_no;
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
  if (trim(line) != "timestamp,channel,value")
    throw ParseError("expected header 'timestamp,channel,value'", 1);

  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    const auto c1 = text.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : text.find(',', c1 + 1);
    if (c2 == std::string_view::npos || text.find(',', c2 + 1) != std::string_view::npos)
      throw ParseError("expected 3 comma-separated fields", line_no);
    const auto ts = parse_timestamp(trim(text.substr(0, c1)));
    if (!ts) throw ParseError("unparseable timestamp '" + std::string(text.substr(0, c1)) + "'", line_no);
    const std::string_view channel_text = trim(text.substr(c1 + 1, c2 - c1 - 1));
    const auto channel = channel_from(channel_text);
    if (!channel) throw ParseError("unknown channel '" + std::string(channel_text) + "'", line_no);
    const auto value = parse_number(text.substr(c2 + 1));
    if (!value) throw ParseError("unparseable value '" + std::string(text.substr(c2 + 1)) + "'", line_no);
    if ((*channel == Channel::bolus || *channel == Channel::meal) && *value <= 0.0)
      throw ParseError(std::string(kChannelNames[static_cast<int>(*channel)]) + " dose must be positive",
                       line_no);
    if (*channel == Channel::basal && *value < 0.0) throw ParseError("basal rate must be non-negative", line_no);
    rows.push_back({*ts, *channel, *value, line_no});
  }

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.channel, a.time) < std::tie(b.channel, b.time);
  });
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].channel == rows[i - 1].channel && rows[i].time == rows[i - 1].time)
      throw ParseError("duplicate " + std::string(kChannelNames[static_cast<int>(rows[i].channel)]) +
                           " row at " + format_timestamp(rows[i].time) + " (first seen on line " +
                           std::to_string(std::min(rows[i].line, rows[i - 1].line)) + ")",
                       std::max(rows[i].line, rows[i - 1].line));

  PatientDataset data;
  std::vector<Event> bolus, meals;
  for (const Row& r : rows) {
    switch (r.channel) {
      case Channel::glucose: data.glucose.push_back({r.time, r.value}); break;
      case Channel::basal: data.basal.push_back({r.time, r.value}); break;
      case Channel::bolus: bolus.push_back({r.time, r.value}); break;
      case Channel::meal: meals.push_back({r.time, r.value}); break;
    }
  }
  data.bolus = EventList(EventKind::bolus, std::move(bolus));
  data.meals = EventList(EventKind::meal, std::move(meals));
  return data;
}

PatientDataset parse_events_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_events_csv(in);
}

void write_events_csv(const PatientDataset& data, std::ostream& out) {
  std::vector<Row> rows;
  for (const Sample& s : data.glucose) rows.push_back({s.time, Channel::glucose, s.value, 0});
  for (const Sample& s : data.basal) rows.push_back({s.time, Channel::basal, s.value, 0});
  for (const Event& e : data.bolus.events()) rows.push_back({e.time, Channel::bolus, e.dose, 0});
  for (const Event& e : data.meals.events()) rows.push_back({e.time, Channel::meal, e.dose, 0});
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.time, a.channel) < std::tie(b.time, b.channel);
  });
  out << "timestamp,channel,value\n";
  for (const Row& r : rows)
    out << format_timestamp(r.time) << ',' << kChannelNames[static_cast<int>(r.channel)] << ','
        << shortest(r.value) << '\n';
}

}  // namespace gsindy
