#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "paoi/commands.hpp"
#include "paoi/config.hpp"

using namespace paoi;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("paoi_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

ExperimentConfig parse(const std::string& text, const fs::path& dir = {}) {
  ExperimentConfig cfg = parse_config_text(text);
  if (!dir.empty()) cfg.output_dir = dir;
  return cfg;
}

TEST(Config, ParsesEveryKind) {
  for (const char* d : {
           R"({"kind":"exponential","params":{"rate":2}})",
           R"({"kind":"erlang","params":{"shape":3,"rate":1}})",
           R"({"kind":"pareto","params":{"xm":1,"alpha":2}})",
           R"({"kind":"shifted_exponential","params":{"shift":1,"rate":1}})",
           R"({"kind":"two_point","params":{"t1":1,"t2":3,"p":0.5}})",
           R"({"kind":"hyperexponential","params":{"rates":[10,1],"weights":[0.5,0.5]}})",
           R"({"kind":"lognormal","params":{"mu":0,"sigma":1}})",
           R"({"kind":"deterministic","params":{"value":1}})"}) {
    EXPECT_NO_THROW(parse(std::string(R"({"distribution":)") + d + "}")) << d;
  }
}

TEST(Config, Defaults) {
  const ExperimentConfig c = parse(R"({"distribution":{"kind":"exponential","params":{"rate":1}}})");
  EXPECT_EQ(c.simulation.peaks, 10'000u);
  EXPECT_EQ(c.simulation.replications, 10u);
  EXPECT_EQ(c.simulation.seed, 1u);
  EXPECT_EQ(c.simulation.batches, 30u);
  EXPECT_EQ(c.policies.size(), 4u);
  EXPECT_EQ(c.sweep.count, 200u);
}

TEST(Config, UnknownKeysAreErrors) {
  EXPECT_THROW(parse(R"({"distrbution":{}})"), ConfigError);
  EXPECT_THROW(parse(R"({"distribution":{"kind":"exponential","params":{"rte":1}}})"), ConfigError);
  EXPECT_THROW(parse(R"({"simulation":{"peak":10}})"), ConfigError);
  EXPECT_THROW(parse(R"({"policies":[{"type":"fixed","theta":1,"extra":2}]})"), ConfigError);
}

TEST(Config, BadValuesAreErrors) {
  EXPECT_THROW(parse("{not json"), ConfigError);
  EXPECT_THROW(parse(R"({"distribution":{"kind":"erlang","params":{"shape":2.5,"rate":1}}})"), ConfigError);
  EXPECT_THROW(parse(R"({"distribution":{"kind":"pareto","params":{"xm":-1,"alpha":2}}})"), ConfigError);
  EXPECT_THROW(parse(R"({"distribution":{"kind":"weibull","params":{}}})"), ConfigError);
  EXPECT_THROW(parse(R"({"policies":["sometimes"]})"), ConfigError);
  EXPECT_THROW(parse(R"({"simulation":{"peaks":"many"}})"), ConfigError);
  EXPECT_THROW(parse(R"({"sweep":{"spacing":"cubic"}})"), ConfigError);
}

TEST(Config, PolicyForms) {
  const ExperimentConfig c = parse(R"({"policies":[
      "zero-wait", {"type":"fixed","theta":2}, {"type":"repetitive","thresholds":[1,2]},
      {"type":"randomized","sampler":{"kind":"log_uniform","low":1,"high":4}}]})");
  ASSERT_EQ(c.policies.size(), 4u);
  EXPECT_EQ(c.policies[1].label(), "fixed(2)");
  EXPECT_EQ(c.policies[2].label(), "repetitive[1,2]");
  EXPECT_EQ(c.policies[3].type, PolicySpec::Type::Randomized);
}

TEST(Commands, EvalTwoPoint) {
  std::ostringstream out;
  const auto cfg = parse(R"({"distribution":{"kind":"two_point","params":{"t1":1,"t2":3,"p":0.5}},
                             "policies":["xmin","zero-wait"]})");
  EXPECT_EQ(cmd_eval(cfg, out), 0);
  EXPECT_NE(out.str().find("xmin,3,"), std::string::npos);
  EXPECT_NE(out.str().find("zero-wait,4,"), std::string::npos);
}

TEST(Commands, EvalExponentialFixed) {
  std::ostringstream out;
  const auto cfg = parse(R"({"distribution":{"kind":"exponential","params":{"rate":1}},
                             "policies":[{"type":"fixed","theta":1.0}]})");
  cmd_eval(cfg, out);
  EXPECT_NE(out.str().find("fixed(1),1.41802"), std::string::npos) << out.str();
}

TEST(Commands, SweepSchemaAndFlatDeterministic) {
  const fs::path dir = scratch("sweep");
  std::ostringstream out;
  const auto cfg = parse(R"({"distribution":{"kind":"deterministic","params":{"value":1}},
                             "sweep":{"min":1,"max":2,"count":11}})", dir);
  cmd_sweep(cfg, out);
  const auto rows = lines(dir / "sweep.csv");
  ASSERT_EQ(rows.size(), 12u);
  EXPECT_EQ(rows[0], "theta,zeta,e_x_check,e_y,is_minimum");
  EXPECT_EQ(rows[1], "1,2,1,1,1");
  for (std::size_t i = 2; i < rows.size(); ++i) EXPECT_NE(rows[i].find(",2,1,1,0"), std::string::npos);
}

TEST(Commands, SweepRejectsWindowBelowSupport) {
  const auto cfg = parse(R"({"distribution":{"kind":"pareto","params":{"xm":1,"alpha":2}},
                             "sweep":{"min":0.5,"max":2}})", scratch("badsweep"));
  std::ostringstream out;
  try {
    cmd_sweep(cfg, out);
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_EQ(exit_code_for(e), kExitConfig);
  }
}

TEST(Commands, OptimizeTwoPoint) {
  const fs::path dir = scratch("opt");
  std::ostringstream out;
  const auto cfg = parse(R"({"distribution":{"kind":"two_point","params":{"t1":1,"t2":3,"p":0.5}},
                             "optimizer":{"theta_min":1,"theta_max":3}})", dir);
  cmd_optimize(cfg, out);
  const auto rows = lines(dir / "optimize.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NE(rows[1].find(",3,xmin,"), std::string::npos) << rows[1];
}

TEST(Commands, SimulateWritesPooledRowAndIsReproducible) {
  const fs::path dir = scratch("sim");
  const auto cfg = parse(R"({"distribution":{"kind":"deterministic","params":{"value":1}},
                             "policies":["zero-wait"],
                             "simulation":{"peaks":300,"replications":3,"trajectory_horizon":5,
                                           "export_peaks":true}})", dir);
  std::ostringstream out;
  cmd_simulate(cfg, out);
  const std::string first = slurp(dir / "simulate_zero-wait.csv");
  cmd_simulate(cfg, out);
  EXPECT_EQ(first, slurp(dir / "simulate_zero-wait.csv"));
  const auto rows = lines(dir / "simulate_zero-wait.csv");
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0], "replication,seed,peaks,mean,stderr,ci_low,ci_high");
  EXPECT_EQ(rows[4].substr(0, 7), "pooled,");
  EXPECT_NE(rows[4].find(",2,0,2,2"), std::string::npos) << rows[4];
  EXPECT_TRUE(fs::exists(dir / "peaks_zero-wait.csv"));
  EXPECT_TRUE(fs::exists(dir / "aoi_zero-wait.csv"));
}

TEST(Commands, SimulateStallMapsToExitThree) {
  const auto cfg = parse(R"({"distribution":{"kind":"pareto","params":{"xm":1,"alpha":2}},
                             "policies":[{"type":"fixed","theta":0.5}],
                             "simulation":{"peaks":10,"replications":1,"stall_limit":100}})",
                         scratch("stall"));
  std::ostringstream out;
  try {
    cmd_simulate(cfg, out);
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_EQ(exit_code_for(e), kExitSimulation);
  }
}

TEST(Commands, CheckTwoPointPrintsCriticalValue) {
  std::ostringstream out;
  cmd_check(parse(R"({"distribution":{"kind":"two_point","params":{"t1":1,"t2":2.1,"p":0.5}}})"), out);
  EXPECT_NE(out.str().find("necessary-sufficient: beneficial"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("critical t2* 2 "), std::string::npos);
}

TEST(Commands, CheckDeterministicNotBeneficial) {
  std::ostringstream out;
  cmd_check(parse(R"({"distribution":{"kind":"deterministic","params":{"value":1}}})"), out);
  EXPECT_NE(out.str().find("necessary-sufficient: no witness"), std::string::npos) << out.str();
}

TEST(Commands, ReproduceUnknownFigure) {
  try {
    reproduce_figures("fig9", scratch("fig9"));
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_EQ(exit_code_for(e), kExitConfig);
  }
}

TEST(Csv, QuotingAndInfinity) {
  const fs::path dir = scratch("csv");
  {
    CsvWriter w(dir / "a.csv", {"a", "b"});
    w.row({"x,y", format_real(std::numeric_limits<double>::infinity())});
    w.row({"say \"hi\"", format_real(0.1)});
  }
  EXPECT_EQ(slurp(dir / "a.csv"), "a,b\n\"x,y\",inf\n\"say \"\"hi\"\"\",0.1\n");
}

}  // namespace
