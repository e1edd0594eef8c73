#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "kgqv/harness/config.hpp"
#include "kgqv/harness/experiments.hpp"
#include "kgqv/harness/report.hpp"

using namespace kgqv;
using namespace kgqv::harness;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("kgqv_harness_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string strip_wall_time(nlohmann::json j) {
  j.erase("wall_time_s");
  j.erase("csv");
  return j.dump();
}

ExperimentConfig quick_remainder(int jobs) {
  ExperimentConfig c;
  c.experiment = ExperimentId::remainder_rate;
  c.n = 64;
  c.eps = std::vector<double>{1.0 / 8, 1.0 / 16, 1.0 / 32};
  c.reps = 100;
  c.seed = 77;
  c.jobs = jobs;
  return c;
}

}  // namespace

TEST(Config, ExperimentIdsRoundTrip) {
  for (ExperimentId id : kAllExperiments) EXPECT_EQ(parse_experiment_id(to_string(id)), id);
  EXPECT_FALSE(parse_experiment_id("bogus"));
}

TEST(Config, MissingExperimentIsUsageError) {
  try {
    resolve(ExperimentConfig{});
    FAIL() << "expected UsageError";
  } catch (const UsageError& e) {
    EXPECT_EQ(e.field(), "experiment");
  }
}

TEST(Config, UnknownKeyIsRejected) {
  ExperimentConfig c;
  try {
    apply_json(c, nlohmann::json::parse(R"({"experiment": "kernel_lemma", "sede": 3})"));
    FAIL() << "expected UsageError";
  } catch (const UsageError& e) {
    EXPECT_EQ(e.field(), "sede");
  }
  EXPECT_THROW(apply_json(c, nlohmann::json::parse(R"({"a": "one"})")), UsageError);
  EXPECT_THROW(apply_json(c, nlohmann::json::parse("[1, 2]")), UsageError);
}

TEST(Config, ValuesFromJson) {
  ExperimentConfig c;
  apply_json(c, nlohmann::json::parse(
                    R"({"experiment": "quadvar_rate", "a": 2, "m": 0.25, "theta": 3, "diffusion": "affine",
                        "diffusion_params": [0.5, 0.1], "resolutions": [64, 128], "reps": 10, "seed": 9})"));
  const ResolvedConfig r = resolve(c);
  EXPECT_EQ(r.experiment, ExperimentId::quadvar_rate);
  EXPECT_EQ(r.params.a, 2.0);
  EXPECT_EQ(r.params.m, 0.25);
  EXPECT_EQ(r.params.theta, 3.0);
  EXPECT_EQ(r.params.diffusion, DiffusionId::affine);
  EXPECT_EQ(r.diffusion()(2.0), 0.7);
  EXPECT_EQ(r.resolutions, (std::vector<int>{64, 128}));
  EXPECT_EQ(r.reps, 10u);
  EXPECT_EQ(r.seed, 9u);
}

TEST(Config, Defaults) {
  ExperimentConfig c;
  c.experiment = ExperimentId::linear_variance;
  const ResolvedConfig r = resolve(c);
  EXPECT_EQ(r.n, 256);
  EXPECT_EQ(r.reps, 100000u);
  EXPECT_EQ(r.eps.size(), 5u);
  EXPECT_EQ(r.eps.front(), 1.0 / 16);
  EXPECT_EQ(r.eps.back(), 1.0 / 256);
  EXPECT_EQ(r.seed, 20240601u);

  c.experiment = ExperimentId::quadvar_rate;
  EXPECT_EQ(resolve(c).resolutions, (std::vector<int>{64, 128, 256, 512}));
  c.n = 128;  // a single --n narrows an N sweep to that resolution
  EXPECT_EQ(resolve(c).resolutions, (std::vector<int>{128}));
}

TEST(Config, ValidationErrors) {
  ExperimentConfig c;
  c.experiment = ExperimentId::quadvar_rate;
  c.resolutions = std::vector<int>{64, 100};
  EXPECT_THROW(resolve(c), UsageError);

  ExperimentConfig d;
  d.experiment = ExperimentId::linear_variance;
  d.n = 64;
  d.eps = std::vector<double>{1.0 / 16, 1.0 / 100};
  try {
    resolve(d);
    FAIL() << "expected UsageError";
  } catch (const UsageError& e) {
    EXPECT_EQ(e.field(), "eps");
    EXPECT_NE(std::string(e.what()).find("grid-aligned"), std::string::npos);
  }
  d.eps = std::vector<double>{1.0 / 16, 1.0 / 32};
  d.reps = 50;
  EXPECT_THROW(resolve(d), UsageError);
  d.reps = 100;
  d.n = 96;
  EXPECT_THROW(resolve(d), UsageError);

  ExperimentConfig o;
  o.experiment = ExperimentId::oracle_check;
  o.resolutions = std::vector<int>{32};
  EXPECT_THROW(resolve(o), UsageError);

  ExperimentConfig m;
  m.experiment = ExperimentId::green_identities;
  m.params.m = -1.0;
  EXPECT_THROW(resolve(m), UsageError);
}

TEST(Config, EchoOmitsJobs) {
  ExperimentConfig c;
  c.experiment = ExperimentId::kernel_lemma;
  c.jobs = 3;
  const nlohmann::json j = to_json(resolve(c));
  EXPECT_FALSE(j.contains("jobs"));
  EXPECT_EQ(j.at("experiment"), "kernel_lemma");
}

TEST(Report, CsvLayout) {
  ExperimentReport r;
  r.config.experiment = ExperimentId::kernel_lemma;
  r.rows.push_back({"a=1, p=2", 0.0625, 0.25, 0.0});
  r.rows.push_back({"say \"hi\"", 0.1, 1.0 / 3.0, 1e-300});
  const std::string csv = to_csv(r);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("# kgqv ", 0), 0u);
  std::getline(in, line);
  EXPECT_EQ(line, "series,control,statistic,se\r");
  std::getline(in, line);
  EXPECT_EQ(line, "\"a=1, p=2\",0.0625,0.25,0\r");
  std::getline(in, line);
  EXPECT_EQ(line, "\"say \"\"hi\"\"\",0.10000000000000001,0.33333333333333331,1e-300\r");
}

TEST(Report, PassedFollowsChecks) {
  ExperimentReport r;
  r.checks.push_back(within("x", 1.0, 0.0, 2.0));
  EXPECT_TRUE(r.passed());
  r.checks.push_back(within("y", 3.0, 0.0, 2.0));
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(r.find_check("y")->value, 3.0);
  EXPECT_EQ(r.find_check("z"), nullptr);
  ExperimentReport f;
  f.numeric_failure = true;
  EXPECT_FALSE(f.passed());
}

TEST(Experiments, GreenIdentitiesPass) {
  ExperimentConfig c;
  c.experiment = ExperimentId::green_identities;
  const ExperimentReport r = run(c);
  EXPECT_FALSE(r.numeric_failure) << r.diagnostic;
  EXPECT_TRUE(r.passed());
  EXPECT_FALSE(r.checks.empty());
}

TEST(Experiments, OutputIndependentOfJobs) {
  const ExperimentReport a = run(quick_remainder(1));
  const ExperimentReport b = run(quick_remainder(3));
  ASSERT_FALSE(a.numeric_failure) << a.diagnostic;
  EXPECT_EQ(to_csv(a), to_csv(b));
  EXPECT_EQ(strip_wall_time(to_json(a)), strip_wall_time(to_json(b)));
  EXPECT_EQ(a.fits.size(), 12u);
}

TEST(Experiments, FlagsOverrideConfigFile) {
  const auto dir = scratch("override");
  const auto path = dir / "cfg.json";
  std::ofstream(path) << R"({"experiment": "oracle_check", "reps": 3, "seed": 5, "resolutions": [4, 8]})";
  ExperimentConfig c = load_config_file(path);
  c.seed = 6;
  const ResolvedConfig r = resolve(c);
  EXPECT_EQ(r.seed, 6u);
  EXPECT_EQ(r.reps, 3u);
  EXPECT_THROW(load_config_file(dir / "missing.json"), UsageError);
}

namespace {

int run_cli(const std::string& args) {
  const char* cli = std::getenv("KGQV_CLI");
  if (cli == nullptr) return -1;
  const std::string cmd = std::string(cli) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

}  // namespace

TEST(Cli, ExitCodes) {
  if (std::getenv("KGQV_CLI") == nullptr) GTEST_SKIP() << "KGQV_CLI not set";
  const std::string out = scratch("cli").string();
  EXPECT_EQ(run_cli("--version"), 0);
  EXPECT_EQ(run_cli("run --quiet"), 2);
  EXPECT_EQ(run_cli("run --experiment nonsense --quiet"), 2);
  EXPECT_EQ(run_cli("run --experiment linear_variance --n 100 --quiet --out " + out), 2);
  EXPECT_EQ(run_cli("run --experiment green_identities --quiet --out " + out), 0);
  EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(out) / "green_identities.csv"));
  EXPECT_EQ(run_cli("run --experiment oracle_check --resolutions 4 --reps 2 --a -3000 --quiet --out " + out), 3);
}

TEST(Cli, SeedFlagOverridesConfigFile) {
  const char* cli = std::getenv("KGQV_CLI");
  if (cli == nullptr) GTEST_SKIP() << "KGQV_CLI not set";
  const auto dir = scratch("cli_seed");
  std::ofstream(dir / "cfg.json") << R"({"experiment": "oracle_check", "resolutions": [4], "reps": 2, "seed": 5})";
  const auto report = dir / "report.json";
  const std::string cmd = std::string(cli) + " run --config " + (dir / "cfg.json").string() + " --seed 42 --quiet --out " +
                          dir.string() + " >" + report.string() + " 2>/dev/null";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  std::ifstream in(report);
  const nlohmann::json j = nlohmann::json::parse(in);
  EXPECT_EQ(j.at("config").at("seed"), 42);
  EXPECT_EQ(j.at("config").at("reps"), 2);
}
