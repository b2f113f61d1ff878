#include <sstream>

#include <gtest/gtest.h>

#include "opo/report.hpp"
#include "opo/run_spec.hpp"

namespace opo {
namespace {

TEST(Config, ParsesKeyValueLinesWithComments) {
  const auto kv = parse_config_text("# reference point\nmu = 0.7\n  gamma_r=100   # pump damping\n\nout_dir = runs/a b\n");
  EXPECT_EQ(kv.at("mu"), "0.7");
  EXPECT_EQ(kv.at("gamma_r"), "100");
  EXPECT_EQ(kv.at("out_dir"), "runs/a b");
  EXPECT_EQ(kv.size(), 3u);
}

TEST(Config, MalformedLinesRejected) {
  EXPECT_THROW(parse_config_text("mu 0.5\n"), ConfigError);
  EXPECT_THROW(parse_config_text(" = 0.5\n"), ConfigError);
}

TEST(Config, UnknownKeyAndBadValueRejected) {
  EXPECT_THROW(build_run_spec({{"gama_r", "1"}}, {}), ConfigError);
  EXPECT_THROW(build_run_spec({{"mu", "half"}}, {}), ConfigError);
  EXPECT_THROW(build_run_spec({}, {{"n_trajectories", "12.5"}}), ConfigError);
}

TEST(Config, SpecifiedKeysAllAccepted) {
  RunSpec spec;
  for (const char* key : {"mu", "gamma_r", "g", "dt", "burn_in", "sample_interval", "n_samples_per_traj",
                          "n_trajectories", "master_seed", "divergence_threshold", "sigma_threshold", "out_dir"})
    EXPECT_NO_THROW(set_key(spec, key, std::string(key) == "out_dir" ? "x" : "1")) << key;
}

TEST(Config, FlagsOverrideConfigOverrideDefaults) {
  const auto spec = build_run_spec({{"mu", "0.3"}, {"g", "0.1"}}, {{"mu", "0.6"}});
  EXPECT_DOUBLE_EQ(spec.mu, 0.6);
  EXPECT_DOUBLE_EQ(spec.g, 0.1);
  EXPECT_DOUBLE_EQ(spec.gamma_r, 1.0);
  EXPECT_EQ(spec.master_seed, 42u);
}

TEST(Config, KebabCaseFlags) {
  EXPECT_EQ(kebab("gamma_r"), "gamma-r");
  EXPECT_EQ(kebab("n_samples_per_traj"), "n-samples-per-traj");
}

TEST(RunSpec, ThresholdAndStepperValidation) {
  RunSpec spec;
  spec.mu = 1.2;
  try {
    spec.sim_config();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("above threshold unsupported"), std::string::npos);
  }
  spec.mu = 0.5;
  spec.stepper = "rk4";
  EXPECT_THROW(spec.sim_config(), ConfigError);
  spec.stepper = "exponential";
  EXPECT_EQ(spec.sim_config().stepper, Stepper::kExponentialEuler);
  spec.g = -1.0;
  EXPECT_THROW(spec.params(), ConfigError);
}

TEST(RunSpec, OptionalOverridesReplaceScaledDefaults) {
  RunSpec spec;
  spec.gamma_r = 100.0;
  EXPECT_DOUBLE_EQ(spec.sim_config().dt, 1e-4);
  spec.dt = 5e-4;
  spec.sample_interval = 3.0;
  const SimConfig c = spec.sim_config();
  EXPECT_DOUBLE_EQ(c.dt, 5e-4);
  EXPECT_DOUBLE_EQ(c.sample_interval, 3.0);
  spec.dt = 1e-3;  // dt * gamma_r = 0.1 > 0.05
  EXPECT_THROW(spec.sim_config(), ConfigError);
}

TEST(Report, CsvHeadersArePinned) {
  std::ostringstream a, b, c;
  report::write_running_csv(a, {});
  report::write_sweep_csv(b, {});
  report::write_compare_csv(c, {});
  EXPECT_EQ(a.str(), "tau,n_samples,lhs,rhs,ratio\n");
  EXPECT_EQ(b.str(), "mu,gamma_r,g,mode,lhs,rhs,ratio,significance,verdict\n");
  EXPECT_EQ(c.str(), "moment,mc,mc_err,analytic,pull,rel_dev,closure,closure_pull,low_confidence,pass\n");
}

TEST(Report, NumberFormatting) {
  EXPECT_EQ(report::num(1.5), "1.5000000000e+00");
  EXPECT_EQ(report::num(NAN), "");
  EXPECT_EQ(report::num(-INFINITY), "-inf");
}

TEST(Report, AnalyticSweepRows) {
  std::ostringstream os;
  report::write_sweep_csv(os, {report::analytic_sweep_row(ModelParams(0.7, 0.01, 0.0071)),
                               report::analytic_sweep_row(ModelParams(0.7, 100.0, 0.0071)),
                               report::analytic_sweep_row(ModelParams(0.0, 1.0, 0.0071))});
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  EXPECT_EQ(line.substr(line.rfind(',') + 1), "satisfied");
  std::getline(in, line);
  EXPECT_EQ(line.substr(line.rfind(',') + 1), "violated");
  std::getline(in, line);
  EXPECT_EQ(line.substr(line.rfind(',') + 1), "no signal");
}

TEST(Report, AnalyticJsonCarriesVerdict) {
  const auto j = report::analytic_json(ModelParams(0.7, 100.0, 0.0071));
  EXPECT_EQ(j["cs_sides"]["verdict"], "violated");
  EXPECT_NEAR(j["cs_sides"]["ratio"].get<double>(), 1.523035, 1e-6);
  EXPECT_TRUE(j.contains("gaussian_closure"));
}

}  // namespace
}  // namespace opo
