// kgqv command line: run one experiment, write its CSV, print the JSON summary.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "kgqv/harness/config.hpp"
#include "kgqv/harness/experiments.hpp"
#include "kgqv/harness/report.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitBoundFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct Flags {
  std::optional<std::string> experiment, config, diffusion, out;
  std::optional<double> a, m, theta;
  std::optional<int> n, jobs;
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> seed;
  std::vector<double> diffusion_params, eps;
  std::vector<int> resolutions;
  bool quiet = false;
};

kgqv::harness::ExperimentConfig merge(const Flags& f, const CLI::App& run) {
  using namespace kgqv::harness;
  ExperimentConfig cfg = f.config ? load_config_file(*f.config) : ExperimentConfig{};
  if (f.experiment) {
    const auto id = parse_experiment_id(*f.experiment);
    if (!id) throw UsageError("experiment", "unknown experiment id '" + *f.experiment + "'");
    cfg.experiment = id;
  }
  if (f.a) cfg.params.a = *f.a;
  if (f.m) cfg.params.m = *f.m;
  if (f.theta) cfg.params.theta = *f.theta;
  if (f.diffusion) {
    const auto id = kgqv::parse_diffusion_id(*f.diffusion);
    if (!id) throw UsageError("diffusion", "unknown diffusion id '" + *f.diffusion + "'");
    cfg.params.diffusion = *id;
  }
  if (run.count("--diffusion-params") > 0) cfg.diffusion_params = f.diffusion_params;
  if (run.count("--eps") > 0) cfg.eps = f.eps;
  if (run.count("--resolutions") > 0) cfg.resolutions = f.resolutions;
  if (f.n) cfg.n = *f.n;
  if (f.reps) cfg.reps = *f.reps;
  if (f.seed) cfg.seed = *f.seed;
  if (f.out) cfg.out = *f.out;
  if (f.jobs) cfg.jobs = *f.jobs;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Damped stochastic Klein-Gordon: lattice simulation and rate experiments"};
  app.set_version_flag("--version", kgqv::harness::kVersion);
  app.require_subcommand(1);

  Flags f;
  CLI::App* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("--experiment", f.experiment,
                  "green_identities | kernel_lemma | linear_variance | remainder_rate | quadvar_rate | "
                  "estimator_consistency | oracle_check");
  run->add_option("--config", f.config, "Flat JSON config file; flags override its values");
  run->add_option("--a", f.a, "Damping a (default 1)");
  run->add_option("--m", f.m, "Mass m (default 0.5)");
  run->add_option("--theta", f.theta, "Noise scale theta (default 1)");
  run->add_option("--diffusion", f.diffusion, "constant_one | affine | shifted_sine | clipped_linear");
  run->add_option("--diffusion-params,--diffusion_params", f.diffusion_params, "Two parameters of F")
      ->expected(0, 2);
  run->add_option("--n", f.n, "Lattice resolution (power of two)");
  run->add_option("--resolutions", f.resolutions, "Resolutions for N sweeps")->expected(1, -1);
  run->add_option("--eps", f.eps, "Increment sizes")->expected(1, -1);
  run->add_option("--reps", f.reps, "Replications");
  run->add_option("--seed", f.seed, "Master seed; replication r uses seed + r");
  run->add_option("--out", f.out, "Directory for the CSV output");
  run->add_option("--jobs", f.jobs, "Worker threads (0 = all cores)");
  run->add_flag("--quiet", f.quiet, "No progress lines on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitUsage;
  }

  using namespace kgqv::harness;
  ExperimentReport report;
  std::string csv_path;
  try {
    const ResolvedConfig cfg = resolve(merge(f, *run));
    report = kgqv::harness::run(cfg, RunOptions{!f.quiet});
    if (!cfg.out.empty()) csv_path = write_csv(report).string();
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  std::cout << to_json(report, csv_path).dump(2) << "\n";
  if (report.numeric_failure) {
    std::cerr << "numeric failure: " << report.diagnostic << "\n";
    return kExitNumeric;
  }
  return report.passed() ? kExitPass : kExitBoundFailed;
}
