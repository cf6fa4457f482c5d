#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

#include "pfp/experiments.hpp"

namespace ex = pfp::experiments;

TEST(Config, DefaultsAndOverrides) {
  auto cfg = ex::Config::defaults();
  EXPECT_EQ(cfg.count("gap.mc_reps"), 10000000u);
  EXPECT_EQ(cfg.numbers("policy-gap.t").size(), 4u);
  cfg.set("lis.reps", "5e3");
  EXPECT_EQ(cfg.count("lis.reps"), 5000u);
  EXPECT_THROW(cfg.set("lis.nope", "1"), ex::ConfigError);
  EXPECT_THROW(cfg.set("lis.reps", "many"), ex::ConfigError);
  cfg.set("lis.t", "2.5");
  EXPECT_THROW(cfg.count("lis.t"), ex::ConfigError);
}

TEST(Config, LoadFile) {
  const std::string path = ::testing::TempDir() + "pfp_config.txt";
  {
    std::ofstream out(path);
    out << "# sizes\nclt.reps = 20000  # smaller\n\nclt.t=400\n";
  }
  auto cfg = ex::Config::defaults();
  cfg.load_file(path);
  EXPECT_EQ(cfg.count("clt.reps"), 20000u);
  EXPECT_EQ(cfg.number("clt.t"), 400.0);
  {
    std::ofstream out(path);
    out << "clt.reps 20000\n";
  }
  EXPECT_THROW(cfg.load_file(path), ex::ConfigError);
  std::remove(path.c_str());
  EXPECT_THROW(cfg.load_file(path), ex::ConfigError);
}

TEST(Report, TargetsAndJson) {
  ex::ExperimentReport rep;
  rep.name = "demo";
  rep.check("inside", 1.0, 1.0, 0.5, 1.5);
  rep.check_p("ks", 0.5);
  EXPECT_TRUE(rep.passed());
  rep.check("exact miss", 2.0, 1.0, 0.5, 1.5, false);
  EXPECT_FALSE(rep.passed());
  EXPECT_TRUE(rep.deterministic_failure());
  const auto j = rep.to_json();
  EXPECT_EQ(j["targets"].size(), 3u);
  EXPECT_EQ(j["passed"], false);
  EXPECT_EQ(ex::Json::parse(j.dump()), j);
}

TEST(Experiments, NamesAndUnknown) {
  for (const char* name : {"gap", "variance", "duality", "clt", "coupling", "depoissonize",
                           "policy-gap", "lis", "tail", "capacity", "poissonize"})
    EXPECT_TRUE(ex::has_experiment(name)) << name;
  EXPECT_FALSE(ex::has_experiment("nope"));
  EXPECT_THROW(ex::run_attempt("nope", ex::Config::defaults(), pfp::RngStream(1, 0), 1),
               ex::ConfigError);
}

TEST(Experiments, SmallRunIsDeterministicAcrossWorkers) {
  auto cfg = ex::Config::defaults();
  cfg.set("duality.reps", "20000");
  const auto a = ex::run_experiment("duality", cfg, 7, 1).to_json().dump();
  const auto b = ex::run_experiment("duality", cfg, 7, 4).to_json().dump();
  EXPECT_EQ(a, b);
  const auto c = ex::run_experiment("duality", cfg, 8, 1).to_json().dump();
  EXPECT_NE(a, c);
  EXPECT_NE(a.find("\"seed\":7"), std::string::npos);
}

TEST(Config, ShippedFileMatchesDefaults) {
  const auto defaults = ex::Config::defaults();
  auto loaded = ex::Config::defaults();
  loaded.load_file(PFP_SOURCE_DIR "/config/experiments.conf");
  for (const auto& key : defaults.keys(""))
    EXPECT_EQ(loaded.numbers(key), defaults.numbers(key)) << key;
}
