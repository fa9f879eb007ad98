#pragma once

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gsindy/ingest.hpp"
#include "gsindy/pipeline.hpp"

namespace gsindy::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KeyInfo {
  std::string key;
  std::string default_value;
  std::string help;
};

/// Every recognised key with its default, in documentation order.
const std::vector<KeyInfo>& config_keys();

/// Flat `key = value` configuration. Only keys from config_keys() are accepted.
class RunConfig {
 public:
  RunConfig();

  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;

  double number(const std::string& key) const;
  long long integer(const std::string& key) const;
  bool flag(const std::string& key) const;

  /// `key = value` lines; `#` starts a comment. Errors name the source and line.
  void load_text(std::istream& in, const std::string& source);
  /// The "config" object of a run_meta.json document.
  void load_meta_json(std::string_view text, const std::string& source);
  /// Dispatches on content: a leading `{` means run_meta.json.
  void load_file(const std::string& path);

  /// run_meta.json: the resolved config minus machine-dependent keys.
  std::string meta_json() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

PipelineOptions pipeline_options(const RunConfig& config);
SynthSpec synth_spec(const RunConfig& config);
DayRule day_rule(const RunConfig& config);

}  // namespace gsindy::cli
