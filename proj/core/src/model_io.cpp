#include <json.hpp>

#include "gsindy/errors.hpp"
#include "gsindy/sindy.hpp"

namespace gsindy {

using nlohmann::json;

std::string model_to_json(const SparseModel& model) {
  json terms = json::array();
  for (std::size_t j = 0; j < model.terms.size(); ++j) {
    const TermDescriptor& t = model.terms[j];
    json entry;
    entry["name"] = t.name();
    json exps = json::object();
    for (Variable v : kVariables)
      if (t.exponent(v) != 0) exps[symbol(v)] = t.exponent(v);
    entry["exponents"] = exps;
    if (t.trig != TrigFunction::none) {
      entry["function"] = t.trig == TrigFunction::sin ? "sin" : "cos";
      entry["variable"] = symbol(t.trig_variable);
    }
    entry["coefficient"] = model.coefficients[j];
    terms.push_back(std::move(entry));
  }

  json variables = json::array();
  for (Variable v : kVariables) variables.push_back(symbol(v));

  const SindyHyper& h = model.hyper;
  json doc;
  doc["variables"] = variables;
  doc["terms"] = terms;
  doc["hyper"] = {{"threshold", h.threshold}, {"ridge", h.ridge},       {"max_iter", h.max_iter},
                  {"max_degree", h.max_degree}, {"trig", h.trig}, {"normalize", h.normalize}};
  json prov = json::object();
  prov["train_day"] = model.provenance.train_day ? json(format_date(*model.provenance.train_day)) : json();
  if (model.provenance.shifts) {
    prov["bolus_shift"] = model.provenance.shifts->bolus_steps;
    prov["carb_shift"] = model.provenance.shifts->carb_steps;
  } else {
    prov["bolus_shift"] = nullptr;
    prov["carb_shift"] = nullptr;
  }
  doc["provenance"] = prov;
  return doc.dump(2) + "\n";
}

SparseModel model_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model JSON: ") + e.what(), 0);
  }
  try {
    SparseModel model;
    for (const json& entry : doc.at("terms")) {
      TermDescriptor t;
      for (const auto& [name, power] : entry.at("exponents").items()) {
        const auto v = variable_from_symbol(name);
        if (!v) throw ParseError("model JSON: unknown variable '" + name + "'", 0);
        const int p = power.get<int>();
        if (p < 0) throw ParseError("model JSON: negative exponent for '" + name + "'", 0);
        t.exponents[static_cast<std::size_t>(*v)] = p;
      }
      if (entry.contains("function")) {
        const std::string fn = entry.at("function").get<std::string>();
        if (fn == "sin") t.trig = TrigFunction::sin;
        else if (fn == "cos") t.trig = TrigFunction::cos;
        else throw ParseError("model JSON: unknown function '" + fn + "'", 0);
        const auto v = variable_from_symbol(entry.at("variable").get<std::string>());
        if (!v) throw ParseError("model JSON: unknown trig variable", 0);
        t.trig_variable = *v;
      }
      model.terms.push_back(t);
      model.coefficients.push_back(entry.at("coefficient").get<double>());
    }
    if (doc.contains("hyper")) {
      const json& h = doc.at("hyper");
      model.hyper.threshold = h.value("threshold", model.hyper.threshold);
      model.hyper.ridge = h.value("ridge", model.hyper.ridge);
      model.hyper.max_iter = h.value("max_iter", model.hyper.max_iter);
      model.hyper.max_degree = h.value("max_degree", model.hyper.max_degree);
      model.hyper.trig = h.value("trig", model.hyper.trig);
      model.hyper.normalize = h.value("normalize", model.hyper.normalize);
    }
    if (doc.contains("provenance")) {
      const json& p = doc.at("provenance");
      if (p.contains("train_day") && !p.at("train_day").is_null()) {
        model.provenance.train_day = parse_date(p.at("train_day").get<std::string>());
        if (!model.provenance.train_day) throw ParseError("model JSON: bad train_day", 0);
      }
      if (p.contains("bolus_shift") && !p.at("bolus_shift").is_null())
        model.provenance.shifts = ShiftConfig{p.at("bolus_shift").get<int>(), p.at("carb_shift").get<int>()};
    }
    return model;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what(), 0);
  }
}

}  // namespace gsindy
