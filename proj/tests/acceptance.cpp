// Runs every acceptance experiment at full size and prints one line per
// criterion. Exit status is nonzero if any criterion fails.
//
//   acceptance [--workers N] [--seed S] [--reports DIR]

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "pfp/experiments.hpp"
#include "pfp/stats.hpp"

namespace ex = pfp::experiments;

namespace {

struct Criterion {
  int id;
  std::string title;
  std::vector<std::string> experiments;
};

const std::vector<Criterion> kCriteria = {
    {1, "bounds sqrt(2t+1)-1 < nu(t) < sqrt(2t)", {"bounds"}},
    {2, "gap limit 2/3, exact and Monte Carlo", {"gap"}},
    {3, "variance identity and asymptotics", {"variance"}},
    {4, "duality N(t) = M(t) in law", {"duality"}},
    {5, "integral identities T = S, moments, mass at zero", {"integrals"}},
    {6, "CLT skewness and kurtosis", {"clt"}},
    {7, "ODE and Wald identities", {"wald"}},
    {8, "depoissonization and poissonization", {"depoissonize", "poissonize"}},
    {9, "capacity C = 0.5 and C = 2", {"capacity"}},
    {10, "coupling of i- and b-selection", {"coupling"}},
    {11, "policy gap slope against ln t", {"policy-gap"}},
    {12, "prophet LIS leading behavior", {"lis"}},
    {13, "fixed threshold policy", {"threshold"}},
    {14, "tail bound 3 exp(-z/4)", {"tail"}},
};

/// Same experiments at reduced sizes, used for the determinism check. Every
/// count keeps at least three harness chunks so the merge order is exercised.
ex::Config reduced_config() {
  auto cfg = ex::Config::defaults();
  for (const auto& key : cfg.keys("")) {
    if (!(key.ends_with("reps") || key.ends_with("realizations"))) continue;
    std::string value;
    for (double v : cfg.numbers(key)) {
      const double r = std::max(std::floor(v / 100.0), 3.0 * pfp::stats::kChunkSize);
      value += (value.empty() ? "" : ",") + std::to_string(static_cast<long long>(std::min(v, r)));
    }
    cfg.set(key, value);
  }
  return cfg;
}

void print(int id, const std::string& title, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << "  criterion " << id << ": " << title;
  if (!detail.empty()) std::cout << " (" << detail << ")";
  std::cout << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t workers = pfp::stats::default_workers();
  std::uint64_t seed = pfp::kDefaultSeed;
  std::string reports;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--workers") workers = std::stoul(argv[i + 1]);
    else if (flag == "--seed") seed = std::stoull(argv[i + 1]);
    else if (flag == "--reports") reports = argv[i + 1];
    else {
      std::cerr << "unknown flag " << flag << "\n";
      return 2;
    }
  }
  if (!reports.empty()) std::filesystem::create_directories(reports);

  const auto config = ex::Config::defaults();
  bool all = true;
  for (const auto& c : kCriteria) {
    bool ok = true;
    std::string detail;
    for (const auto& name : c.experiments) {
      const auto outcome = ex::run_experiment(name, config, seed, workers);
      ok = ok && outcome.passed;
      if (outcome.attempts.size() > 1)
        detail += (detail.empty() ? "" : "; ") + name + " retried on an independent stream";
      if (!reports.empty())
        std::ofstream(reports + "/" + name + ".json") << outcome.to_json().dump(2) << "\n";
      if (!outcome.passed) {
        for (const auto& t : outcome.attempts.back().targets)
          if (!t.pass)
            detail += (detail.empty() ? "" : "; ") + t.label + " = " + std::to_string(t.observed);
      }
    }
    print(c.id, c.title, ok, detail);
    all = all && ok;
  }

  // Determinism: reduced-size reruns with different worker counts must give
  // byte-identical reports.
  const auto reduced = reduced_config();
  const std::size_t other = workers == 1 ? 3 : 1;
  std::string mismatch;
  for (const auto& name : ex::experiment_names()) {
    const auto a = ex::run_experiment(name, reduced, seed, workers).to_json().dump();
    const auto b = ex::run_experiment(name, reduced, seed, other).to_json().dump();
    const auto c = ex::run_experiment(name, reduced, seed, workers).to_json().dump();
    if (a != b || a != c) mismatch += (mismatch.empty() ? "" : ", ") + name;
  }
  print(15, "determinism across worker counts", mismatch.empty(),
        mismatch.empty() ? "" : "differs: " + mismatch);
  all = all && mismatch.empty();

  return all ? EXIT_SUCCESS : EXIT_FAILURE;
}
