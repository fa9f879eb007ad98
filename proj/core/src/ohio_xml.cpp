#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "gsindy/errors.hpp"
#include "gsindy/ingest.hpp"

namespace gsindy {

namespace pt = boost::property_tree;

namespace {

// OhioT1DM timestamps look like "13-05-2027 00:05:00" (day first).
std::optional<Timestamp> parse_ohio_time(const std::string& text) {
  int d, mo, y, h, mi, s;
  char tail;
  if (std::sscanf(text.c_str(), "%2d-%2d-%4d %2d:%2d:%2d%c", &d, &mo, &y, &h, &mi, &s, &tail) != 6)
    return std::nullopt;
  const Date ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                 std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) return std::nullopt;
  return std::chrono::sys_days{ymd} + std::chrono::hours{h} + std::chrono::minutes{mi} + Seconds{s};
}

std::optional<double> attr_number(const pt::ptree& event, const std::string& name) {
  const auto v = event.get_optional<std::string>("<xmlattr>." + name);
  if (!v) return std::nullopt;
  try {
    std::size_t used = 0;
    const double x = std::stod(*v, &used);
    if (used != v->size() || !std::isfinite(x)) return std::nullopt;
    return x;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

Timestamp attr_time(const pt::ptree& event, const std::string& name, const std::string& group) {
  const auto v = event.get_optional<std::string>("<xmlattr>." + name);
  if (!v) throw ParseError(group + " event without '" + name + "' attribute", 0);
  const auto t = parse_ohio_time(*v);
  if (!t) throw ParseError(group + " event has unparseable timestamp '" + *v + "'", 0);
  return *t;
}

// Events of one group, summing doses that share a timestamp.
EventList to_event_list(EventKind kind, std::map<Timestamp, double> doses) {
  std::vector<Event> events;
  for (const auto& [t, d] : doses) events.push_back({t, d});
  return EventList(kind, std::move(events));
}

}  // namespace

XmlImport parse_ohio_xml(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError("malformed XML: " + e.message(), e.line());
  }
  const auto patient = tree.get_child_optional("patient");
  if (!patient) throw ParseError("missing <patient> root element", 0);

  XmlImport out;
  out.dataset.patient_id = patient->get<std::string>("<xmlattr>.id", "unknown");
  bool saw_glucose = false;
  std::map<Timestamp, double> glucose, basal, bolus, meals;
  std::size_t skipped = 0;

  for (const auto& [group, node] : *patient) {
    if (group == "<xmlattr>" || group == "<xmlcomment>") continue;
    const bool known = group == "glucose_level" || group == "basal" || group == "bolus" || group == "meal";
    if (!known) {
      out.warnings.push_back("ignoring unsupported element group <" + group + ">");
      continue;
    }
    if (group == "glucose_level") saw_glucose = true;
    for (const auto& [tag, event] : node) {
      if (tag != "event") continue;
      if (group == "glucose_level") {
        const auto v = attr_number(event, "value");
        if (!v) throw ParseError("glucose_level event without numeric value", 0);
        glucose[attr_time(event, "ts", group)] = *v;
      } else if (group == "basal") {
        const auto v = attr_number(event, "value");
        if (!v || *v < 0.0) throw ParseError("basal event without a non-negative value", 0);
        basal[attr_time(event, "ts", group)] = *v;
      } else if (group == "bolus") {
        const auto v = attr_number(event, "dose");
        if (!v || *v <= 0.0) {
          ++skipped;
          continue;
        }
        bolus[attr_time(event, "ts_begin", group)] += *v;
      } else {
        const auto v = attr_number(event, "carbs");
        if (!v || *v <= 0.0) {
          ++skipped;
          continue;
        }
        meals[attr_time(event, "ts", group)] += *v;
      }
    }
  }
  if (!saw_glucose) throw ParseError("missing <glucose_level> group", 0);
  if (skipped > 0) out.warnings.push_back("skipped " + std::to_string(skipped) + " zero-dose bolus/meal events");

  for (const auto& [t, v] : glucose) out.dataset.glucose.push_back({t, v});
  for (const auto& [t, v] : basal) out.dataset.basal.push_back({t, v});
  out.dataset.bolus = to_event_list(EventKind::bolus, std::move(bolus));
  out.dataset.meals = to_event_list(EventKind::meal, std::move(meals));
  return out;
}

XmlImport parse_ohio_xml(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_ohio_xml(in);
}

}  // namespace gsindy
