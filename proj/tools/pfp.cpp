// pfp: exact values, single simulations and the named experiments.
//
// Exit codes: 0 success, 1 experiment failure or kernel error, 2 usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pfp/analytic.hpp"
#include "pfp/coupling.hpp"
#include "pfp/experiments.hpp"
#include "pfp/policies.hpp"
#include "pfp/processes.hpp"
#include "pfp/stats.hpp"

using Json = nlohmann::ordered_json;
namespace ex = pfp::experiments;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::optional<double> t;
  std::optional<int> n;
  std::optional<double> capacity;
  std::string control = "optimal";
  std::string kind = "i";
  std::optional<double> reps;
  std::uint64_t seed = pfp::kDefaultSeed;
  std::size_t workers = pfp::stats::default_workers();
  std::string format;
  bool summary = false;
  std::string config;
  std::string out;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

/// Rows of cells; every table starts with a header row.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const {
    std::ostringstream out;
    auto line = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << csv_field(cells[i]);
      out << "\r\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out.str();
  }

  Json json() const {
    Json arr = Json::array();
    for (const auto& r : rows) {
      Json obj;
      for (std::size_t i = 0; i < header.size(); ++i) {
        // Numbers go out as numbers, everything else as strings.
        const std::string& cell = r[i];
        char* end = nullptr;
        const long long k = std::strtoll(cell.c_str(), &end, 10);
        if (!cell.empty() && *end == '\0') {
          obj[header[i]] = k;
          continue;
        }
        const double v = std::strtod(cell.c_str(), &end);
        if (!cell.empty() && *end == '\0' && cell != "nan")
          obj[header[i]] = v;
        else
          obj[header[i]] = cell;
      }
      arr.push_back(std::move(obj));
    }
    return arr;
  }
};

std::string render(const Table& table, const std::string& format) {
  if (format == "json") return table.json().dump(2) + "\n";
  return table.csv();
}

double need_t(const Options& o) {
  if (!o.t) throw UsageError("--t is required");
  return *o.t;
}

int need_n(const Options& o) {
  if (!o.n) throw UsageError("--n is required");
  return *o.n;
}

std::size_t reps_of(const Options& o) {
  if (!o.reps) return 1;
  const double r = *o.reps;
  if (!(r >= 1.0) || r != std::floor(r)) throw UsageError("--reps must be a positive integer");
  return static_cast<std::size_t>(r);
}

pfp::policies::ControlFunction parse_control(const std::string& spec, double horizon) {
  using pfp::policies::ControlFunction;
  if (spec == "optimal") return ControlFunction::optimal();
  if (spec == "greedy") return ControlFunction::greedy();
  if (spec == "stationary") return ControlFunction::stationary(horizon);
  if (spec.rfind("threshold=", 0) == 0) {
    try {
      return ControlFunction::threshold(std::stod(spec.substr(10)));
    } catch (const std::invalid_argument&) {
      throw UsageError("bad threshold in --control " + spec);
    }
  }
  if (spec.rfind("custom=", 0) == 0) {
    try {
      return ControlFunction::custom_from_file(spec.substr(7));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  throw UsageError("unknown control " + spec);
}

// --- exact -------------------------------------------------------------------------

Table cmd_exact(const std::string& quantity, const Options& o) {
  namespace a = pfp::analytic;
  Table t;
  if (quantity == "mean" || quantity == "gap") {
    const double x = need_t(o);
    const auto v = quantity == "mean" ? a::mean_exit_count(x) : a::mean_gap(x);
    t.header = {"quantity", "t", "value", "tail_bound", "terms_used"};
    t.rows.push_back({quantity, num(x), num(v.value), num(v.tail_bound), std::to_string(v.terms_used)});
  } else if (quantity == "cdf") {
    const double x = need_t(o);
    const int n = need_n(o);
    t.header = {"quantity", "n", "t", "value"};
    t.rows.push_back({quantity, std::to_string(n), num(x), num(a::entrance_cdf(n, x))});
  } else if (quantity == "variance") {
    const double x = need_t(o);
    t.header = {"quantity", "t", "value"};
    t.rows.push_back({quantity, num(x), num(a::exit_variance(x))});
  } else if (quantity == "bounds") {
    const double x = need_t(o);
    const auto b = a::mean_bounds(x);
    t.header = {"quantity", "t", "lower", "upper"};
    t.rows.push_back({quantity, num(x), num(b.lower), num(b.upper)});
  } else if (quantity == "borel") {
    const int j = need_n(o);
    t.header = {"quantity", "j", "value"};
    t.rows.push_back({quantity, std::to_string(j), num(a::borel_pmf(j))});
  } else {
    throw UsageError("unknown quantity " + quantity);
  }
  return t;
}

// --- simulate ----------------------------------------------------------------------

std::uint64_t stream_of(const std::string& process) {
  std::uint64_t h = 0;
  for (unsigned char c : process) h = h * 131 + c;
  return pfp::RngStream::mix64(h);
}

Table summary_table(const std::string& label, const pfp::stats::SummaryStats& s) {
  Table t;
  t.header = {"quantity", "n", "mean", "variance", "se", "skewness", "excess_kurtosis"};
  t.rows.push_back({label, std::to_string(s.n), num(s.mean), num(s.variance), num(s.se),
                    num(s.skewness), num(s.excess_kurtosis)});
  return t;
}

Table cmd_simulate(const std::string& process, const Options& o) {
  namespace p = pfp::processes;
  namespace pol = pfp::policies;
  const double x = need_t(o);
  if (!(x >= 0.0)) throw UsageError("--t must be >= 0");
  const std::size_t reps = reps_of(o);
  const pfp::RngStream rng(o.seed, stream_of(process));

  // Scalar processes share the summary / per-row output.
  std::function<double(pfp::RngStream&)> scalar;
  if (process == "exit") {
    if (o.capacity) {
      const double c = *o.capacity;
      if (!(c > 0.0)) throw UsageError("--capacity must be positive");
      scalar = [x, c](pfp::RngStream& r) { return double(pol::sample_poisson_packing(x, c, r)); };
    } else {
      scalar = [x](pfp::RngStream& r) { return double(p::sample_exit_count(x, r)); };
    }
  } else if (process == "entrance") {
    scalar = [x](pfp::RngStream& r) { return double(p::entrance_count(x, r)); };
  } else if (process == "urn") {
    scalar = [x](pfp::RngStream& r) { return double(p::urn_count(x, r)); };
  } else if (process == "lis") {
    scalar = [x](pfp::RngStream& r) { return double(pol::lis_length(pol::sample_planar(x, r))); };
  }

  if (scalar) {
    if (o.summary) {
      if (reps < 2) throw UsageError("--summary needs --reps >= 2");
      return summary_table(process, pfp::stats::mc_estimate(scalar, reps, rng, o.workers));
    }
    const auto values = pfp::stats::mc_collect(scalar, reps, rng, o.workers);
    Table t;
    t.header = {"replica", "t", "count"};
    for (std::size_t i = 0; i < values.size(); ++i)
      t.rows.push_back({std::to_string(i), num(x), num(values[i])});
    return t;
  }

  if (process == "integrals") {
    auto kernel = [x](pfp::RngStream& r) { return p::waiting_integrals(p::sample_arrivals(x, r), x); };
    if (o.summary) {
      if (reps < 2) throw UsageError("--summary needs --reps >= 2");
      const auto T = pfp::stats::mc_estimate([&](pfp::RngStream& r) { return kernel(r).T; }, reps,
                                             rng, o.workers);
      const auto S = pfp::stats::mc_estimate([&](pfp::RngStream& r) { return kernel(r).S; }, reps,
                                             rng, o.workers);
      Table t = summary_table("T", T);
      t.rows.push_back(summary_table("S", S).rows[0]);
      return t;
    }
    const auto values = pfp::stats::mc_collect(kernel, reps, rng, o.workers);
    Table t;
    t.header = {"replica", "x", "T", "S", "count"};
    for (std::size_t i = 0; i < values.size(); ++i)
      t.rows.push_back({std::to_string(i), num(x), num(values[i].T), num(values[i].S),
                        std::to_string(values[i].count)});
    return t;
  }

  if (process == "policy") {
    const auto control = parse_control(o.control, x);
    if (o.kind != "i" && o.kind != "b") throw UsageError("--kind must be i or b");
    const bool threshold = control.kind() == pol::ControlFunction::Kind::Threshold;
    auto run = [&](pfp::RngStream& r) {
      const auto smp = pol::sample_planar(x, r);
      pol::SelectionTrace trace;
      if (!threshold)
        trace = o.kind == "i" ? pol::run_i_policy(smp, control) : pol::run_b_policy(smp, control);
      const std::size_t count = threshold ? pol::threshold_count(smp, control.parameter()) : trace.count();
      return std::pair{count, trace};
    };
    if (o.summary) {
      if (reps < 2) throw UsageError("--summary needs --reps >= 2");
      return summary_table(
          "policy", pfp::stats::mc_estimate([&](pfp::RngStream& r) { return double(run(r).first); },
                                            reps, rng, o.workers));
    }
    const auto runs = pfp::stats::mc_collect(run, reps, rng, o.workers);
    Table t;
    if (threshold) {
      t.header = {"replica", "control", "count"};
      for (std::size_t i = 0; i < runs.size(); ++i)
        t.rows.push_back({std::to_string(i), control.name(), std::to_string(runs[i].first)});
      return t;
    }
    t.header = {"replica", "control", "kind", "k", "index", "time", "mark", "path"};
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto& tr = runs[i].second;
      for (std::size_t k = 0; k < tr.count(); ++k)
        t.rows.push_back({std::to_string(i), control.name(), o.kind, std::to_string(k + 1),
                          std::to_string(tr.indices[k]), num(tr.accepted[k].time),
                          num(tr.accepted[k].mark), num(tr.path[k])});
    }
    return t;
  }

  if (process == "coupling") {
    const auto control = parse_control(o.control, x);
    if (control.kind() == pol::ControlFunction::Kind::Threshold)
      throw UsageError("coupling needs a control function, not a threshold");
    auto run = [&](pfp::RngStream& r) {
      return pfp::coupling::verify_coupling(pol::sample_planar(x, r), control);
    };
    if (o.summary) {
      const auto pooled = pfp::coupling::verify_coupling_pooled(x, control, reps, rng, o.workers);
      Table t;
      t.header = {"control", "realizations", "deterministic_failures", "pooled_marks",
                  "uniformity_ks", "uniformity_p", "serial_z", "serial_p", "mean_selections"};
      t.rows.push_back({control.name(), std::to_string(pooled.realizations),
                        std::to_string(pooled.deterministic_failures),
                        std::to_string(pooled.pooled_marks), num(pooled.uniformity_ks),
                        num(pooled.uniformity_p), num(pooled.serial_z), num(pooled.serial_p),
                        num(pooled.mean_selections)});
      return t;
    }
    const auto reports = pfp::stats::mc_collect(run, reps, rng, o.workers);
    Table t;
    t.header = {"replica", "control", "selections", "ok", "failure"};
    for (std::size_t i = 0; i < reports.size(); ++i)
      t.rows.push_back({std::to_string(i), control.name(), std::to_string(reports[i].selections),
                        reports[i].ok() ? "true" : "false", reports[i].failure});
    return t;
  }

  throw UsageError("unknown process " + process);
}

// --- experiment --------------------------------------------------------------------

ex::Config experiment_config(const std::string& name, const Options& o) {
  auto cfg = ex::Config::defaults();
  if (!o.config.empty()) cfg.load_file(o.config);
  auto override_key = [&](const std::string& flag, const std::string& key, const std::string& value) {
    if (!cfg.has(key)) throw UsageError(flag + " does not apply to experiment " + name);
    cfg.set(key, value);
  };
  if (o.t) override_key("--t", name + ".t", num(*o.t));
  if (o.n) override_key("--n", name + ".n", std::to_string(*o.n));
  if (o.reps) {
    bool any = false;
    for (const auto& key : cfg.keys(name + ".")) {
      if (key.ends_with("reps") || key.ends_with("realizations")) {
        // List-valued keys get the same count in every slot.
        const auto slots = cfg.numbers(key).size();
        std::string v = num(*o.reps);
        for (std::size_t i = 1; i < slots; ++i) v += "," + num(*o.reps);
        cfg.set(key, v);
        any = true;
      }
    }
    if (!any) throw UsageError("--reps does not apply to experiment " + name);
  }
  return cfg;
}

void emit(const std::string& text, const Options& o) {
  if (o.out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw UsageError("cannot write " + o.out);
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Poisson first-passage and online selection toolkit"};
  app.require_subcommand(1);
  Options o;
  std::string target;

  auto common = [&o](CLI::App* sub) {
    sub->add_option("--t", o.t, "time horizon t (or x for integrals)");
    sub->add_option("--n", o.n, "index n (or j for borel)");
    sub->add_option("--capacity", o.capacity, "bin capacity C");
    sub->add_option("--control", o.control,
                    "optimal | greedy | stationary | threshold=THETA | custom=FILE");
    sub->add_option("--kind", o.kind, "policy kind: i (increasing) or b (bounded sum)");
    sub->add_option("--reps", o.reps, "replications");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_flag("--summary", o.summary, "one summary row instead of one row per replication");
    sub->add_option("--config", o.config, "key = value experiment configuration file");
    sub->add_option("--out", o.out, "write output to FILE");
  };

  auto* exact = app.add_subcommand("exact", "exact and numerical values");
  exact->add_option("quantity", target, "mean | cdf | variance | bounds | borel | gap")
      ->required()
      ->check(CLI::IsMember({"mean", "cdf", "variance", "bounds", "borel", "gap"}));
  common(exact);
  auto* simulate = app.add_subcommand("simulate", "seeded simulations");
  simulate
      ->add_option("process", target,
                   "exit | entrance | urn | integrals | policy | lis | coupling")
      ->required()
      ->check(CLI::IsMember({"exit", "entrance", "urn", "integrals", "policy", "lis", "coupling"}));
  common(simulate);
  auto* experiment = app.add_subcommand("experiment", "named acceptance experiments");
  experiment->add_option("name", target, "experiment name")
      ->required()
      ->check(CLI::IsMember(ex::experiment_names()));
  common(experiment);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (exact->parsed()) {
      emit(render(cmd_exact(target, o), o.format), o);
      return 0;
    }
    if (simulate->parsed()) {
      emit(render(cmd_simulate(target, o), o.format), o);
      return 0;
    }
    const auto cfg = experiment_config(target, o);
    const auto outcome = ex::run_experiment(target, cfg, o.seed, o.workers);
    if (o.format == "csv") {
      Table t;
      t.header = {"experiment", "attempt", "target", "observed", "expected", "lower", "upper", "pass"};
      for (std::size_t a = 0; a < outcome.attempts.size(); ++a)
        for (const auto& tg : outcome.attempts[a].targets)
          t.rows.push_back({target, std::to_string(a), tg.label, num(tg.observed), num(tg.expected),
                            num(tg.lower), num(tg.upper), tg.pass ? "true" : "false"});
      emit(t.csv(), o);
    } else {
      emit(outcome.to_json().dump(2) + "\n", o);
    }
    return outcome.passed ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "pfp: " << e.what() << "\n";
    return 2;
  } catch (const ex::ConfigError& e) {
    std::cerr << "pfp: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "pfp: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "pfp: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "pfp: " << e.what() << "\n";
    return 1;
  }
}
