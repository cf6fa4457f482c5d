#pragma once

// Named, preregistered Monte Carlo experiments and their JSON reports.
//
// Sizes come from a key=value configuration; every key has a built-in
// default and can be overridden from a file or the command line. Reports
// never record the worker count, so the same (seed, config) gives the same
// bytes on any machine.

#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pfp/rng.hpp"
#include "pfp/stats.hpp"

namespace pfp::experiments {

using Json = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  /// Built-in defaults for every experiment.
  static Config defaults();

  /// Reads "key = value" lines; '#' starts a comment. Unknown keys are errors.
  void load_file(const std::string& path);
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  double number(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;

  /// Keys with the given prefix ("gap." etc.), in sorted order.
  std::vector<std::string> keys(const std::string& prefix) const;
  const std::string& raw(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;
};

/// One checked quantity: passes iff lower <= observed <= upper.
struct Target {
  std::string label;
  double observed = 0.0;
  double expected = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool statistical = true;  // false for exact / deterministic checks
  bool pass = false;
};

struct ExperimentReport {
  std::string name;
  Json parameters = Json::object();
  Json estimates = Json::array();
  std::vector<Target> targets;

  void estimate(const std::string& label, const stats::SummaryStats& s);
  void estimate(const std::string& label, double value);
  void estimate(const std::string& label, Json value);
  /// Adds a target [lower, upper] around `expected`.
  void check(const std::string& label, double observed, double expected, double lower,
             double upper, bool statistical = true);
  /// Adds a p-value target rejected below alpha.
  void check_p(const std::string& label, double p_value, double alpha = kAlpha);
  void check_true(const std::string& label, bool ok, bool statistical = false);

  bool passed() const;
  bool deterministic_failure() const;
  Json to_json() const;

  static constexpr double kAlpha = 1e-3;
};

/// Result of a full run, including the retry on an independent stream.
struct ExperimentOutcome {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<ExperimentReport> attempts;
  bool passed = false;

  Json to_json() const;
};

const std::vector<std::string>& experiment_names();
bool has_experiment(const std::string& name);

/// Runs one attempt on the given base stream.
ExperimentReport run_attempt(const std::string& name, const Config& config, const RngStream& base,
                             std::size_t workers);

/// Runs the experiment; if a statistical target fails (and nothing exact
/// does), repeats once on an independent stream and passes iff that retry
/// passes.
ExperimentOutcome run_experiment(const std::string& name, const Config& config,
                                 std::uint64_t seed, std::size_t workers);

}  // namespace pfp::experiments
