#pragma once

// Experiment configuration: a flat JSON object whose keys the CLI flags mirror.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kgqv/diffusion.hpp"
#include "kgqv/greens.hpp"
#include "kgqv/solver.hpp"

namespace kgqv::harness {

class UsageError : public std::invalid_argument {
 public:
  UsageError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class ExperimentId {
  green_identities,
  kernel_lemma,
  linear_variance,
  remainder_rate,
  quadvar_rate,
  estimator_consistency,
  oracle_check,
};

inline constexpr ExperimentId kAllExperiments[] = {
    ExperimentId::green_identities, ExperimentId::kernel_lemma,    ExperimentId::linear_variance,
    ExperimentId::remainder_rate,   ExperimentId::quadvar_rate,    ExperimentId::estimator_consistency,
    ExperimentId::oracle_check,
};

inline std::string_view to_string(ExperimentId id) noexcept {
  switch (id) {
    case ExperimentId::green_identities: return "green_identities";
    case ExperimentId::kernel_lemma: return "kernel_lemma";
    case ExperimentId::linear_variance: return "linear_variance";
    case ExperimentId::remainder_rate: return "remainder_rate";
    case ExperimentId::quadvar_rate: return "quadvar_rate";
    case ExperimentId::estimator_consistency: return "estimator_consistency";
    case ExperimentId::oracle_check: return "oracle_check";
  }
  return "unknown";
}

inline std::optional<ExperimentId> parse_experiment_id(std::string_view name) noexcept {
  for (auto id : kAllExperiments)
    if (name == to_string(id)) return id;
  return std::nullopt;
}

/// Everything a run needs. Unset optionals take the experiment's defaults
/// (see resolve()).
struct ExperimentConfig {
  std::optional<ExperimentId> experiment;
  PhysParams params;
  std::vector<double> diffusion_params;  ///< empty = menu defaults
  std::optional<int> n;
  std::optional<std::vector<int>> resolutions;
  std::optional<std::vector<double>> eps;
  std::optional<std::size_t> reps;
  std::uint64_t seed = 20240601;
  std::string out = "kgqv-out";
  int jobs = 0;  ///< 0 = all available cores

  DiffusionCoefficient diffusion() const { return DiffusionCoefficient::make(params.diffusion, diffusion_params); }
};

inline constexpr std::string_view kConfigKeys[] = {"experiment", "a",   "m",    "theta", "diffusion",
                                                   "diffusion_params", "n", "resolutions", "eps", "reps",
                                                   "seed",       "out", "jobs"};

namespace detail {

inline bool is_power_of_two(long long v) noexcept { return v > 0 && (v & (v - 1)) == 0; }

template <typename T>
T json_number(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number()) throw UsageError(key, "expected a number");
  if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer()) throw UsageError(key, "expected an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (j.is_number_integer() && !j.is_number_unsigned() && j.get<long long>() < 0)
        throw UsageError(key, "expected a non-negative integer");
    }
  }
  return j.get<T>();
}

}  // namespace detail

/// Apply the keys of a flat JSON object on top of `cfg`.
inline void apply_json(ExperimentConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw UsageError("config", "top level must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto k : kConfigKeys) known = known || key == k;
    if (!known) throw UsageError(key, "unknown configuration key");
  }
  if (j.contains("experiment")) {
    const auto& v = j.at("experiment");
    if (!v.is_string()) throw UsageError("experiment", "expected a string");
    const auto id = parse_experiment_id(v.get<std::string>());
    if (!id) throw UsageError("experiment", "unknown experiment id '" + v.get<std::string>() + "'");
    cfg.experiment = id;
  }
  if (j.contains("a")) cfg.params.a = detail::json_number<double>(j.at("a"), "a");
  if (j.contains("m")) cfg.params.m = detail::json_number<double>(j.at("m"), "m");
  if (j.contains("theta")) cfg.params.theta = detail::json_number<double>(j.at("theta"), "theta");
  if (j.contains("diffusion")) {
    const auto& v = j.at("diffusion");
    if (!v.is_string()) throw UsageError("diffusion", "expected a string");
    const auto id = parse_diffusion_id(v.get<std::string>());
    if (!id) throw UsageError("diffusion", "unknown diffusion id '" + v.get<std::string>() + "'");
    cfg.params.diffusion = *id;
  }
  auto number_list = [&](const char* key) {
    const auto& v = j.at(key);
    if (!v.is_array()) throw UsageError(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) out.push_back(detail::json_number<double>(x, key));
    return out;
  };
  if (j.contains("diffusion_params")) cfg.diffusion_params = number_list("diffusion_params");
  if (j.contains("eps")) cfg.eps = number_list("eps");
  if (j.contains("n")) cfg.n = detail::json_number<int>(j.at("n"), "n");
  if (j.contains("resolutions")) {
    const auto& v = j.at("resolutions");
    if (!v.is_array()) throw UsageError("resolutions", "expected an array of integers");
    std::vector<int> out;
    for (const auto& x : v) out.push_back(detail::json_number<int>(x, "resolutions"));
    cfg.resolutions = out;
  }
  if (j.contains("reps")) cfg.reps = detail::json_number<std::size_t>(j.at("reps"), "reps");
  if (j.contains("seed")) cfg.seed = detail::json_number<std::uint64_t>(j.at("seed"), "seed");
  if (j.contains("out")) {
    if (!j.at("out").is_string()) throw UsageError("out", "expected a string");
    cfg.out = j.at("out").get<std::string>();
  }
  if (j.contains("jobs")) cfg.jobs = detail::json_number<int>(j.at("jobs"), "jobs");
}

inline ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("config", "cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config", std::string("malformed JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  apply_json(cfg, j);
  return cfg;
}

/// Concrete values after experiment defaults are filled in.
struct ResolvedConfig {
  ExperimentId experiment{};
  PhysParams params;
  std::vector<double> diffusion_params;
  int n = 0;
  std::vector<int> resolutions;
  std::vector<double> eps;
  std::size_t reps = 0;
  std::uint64_t seed = 0;
  std::string out;
  int jobs = 1;

  DiffusionCoefficient diffusion() const { return DiffusionCoefficient::make(params.diffusion, diffusion_params); }
};

inline std::vector<double> dyadic_range(int from, int to) {
  std::vector<double> out;
  for (int k = from; k <= to; ++k) out.push_back(std::ldexp(1.0, -k));
  return out;
}

/// Fill defaults and validate. Every failure names the offending field.
inline ResolvedConfig resolve(const ExperimentConfig& cfg) {
  if (!cfg.experiment) throw UsageError("experiment", "missing experiment id");
  ResolvedConfig r;
  r.experiment = *cfg.experiment;
  r.params = cfg.params;
  r.diffusion_params = cfg.diffusion_params;
  r.seed = cfg.seed;
  r.out = cfg.out;
  r.jobs = cfg.jobs;

  if (!std::isfinite(r.params.a)) throw UsageError("a", "must be finite");
  if (!(r.params.m >= 0.0) || !std::isfinite(r.params.m)) throw UsageError("m", "must be finite and >= 0");
  if (!(r.params.theta > 0.0) || !std::isfinite(r.params.theta)) throw UsageError("theta", "must be finite and > 0");
  try {
    (void)r.diffusion();
  } catch (const std::exception& e) {
    throw UsageError("diffusion_params", e.what());
  }
  if (r.jobs < 0) throw UsageError("jobs", "must be >= 0");

  // Per-experiment defaults.
  int n_default = 0;
  std::vector<int> res_default;
  std::vector<double> eps_default;
  std::size_t reps_default = 1;
  std::size_t reps_min = 1;
  bool eps_on_grid = false;
  switch (r.experiment) {
    case ExperimentId::green_identities: break;
    case ExperimentId::kernel_lemma: eps_default = dyadic_range(4, 8); break;
    case ExperimentId::linear_variance:
      n_default = 256;
      eps_default = dyadic_range(4, 8);
      reps_default = 100000;
      reps_min = 100;
      eps_on_grid = true;
      break;
    case ExperimentId::remainder_rate:
      n_default = 512;
      eps_default = dyadic_range(4, 9);
      reps_default = 500;
      reps_min = 100;
      eps_on_grid = true;
      break;
    case ExperimentId::quadvar_rate:
      res_default = {64, 128, 256, 512};
      reps_default = 500;
      reps_min = 2;
      break;
    case ExperimentId::estimator_consistency:
      res_default = {64, 128, 256, 512};
      reps_default = 200;
      break;
    case ExperimentId::oracle_check:
      res_default = {8, 16};
      reps_default = 20;
      break;
  }

  r.n = cfg.n.value_or(n_default);
  if (cfg.resolutions) {
    r.resolutions = *cfg.resolutions;
  } else if (cfg.n && !res_default.empty()) {
    r.resolutions = {*cfg.n};
  } else {
    r.resolutions = res_default;
  }
  r.eps = cfg.eps.value_or(eps_default);
  r.reps = cfg.reps.value_or(reps_default);

  if (n_default != 0 && !detail::is_power_of_two(r.n))
    throw UsageError("n", "resolution " + std::to_string(r.n) + " is not a power of two");
  for (int v : r.resolutions)
    if (!detail::is_power_of_two(v))
      throw UsageError("resolutions", "resolution " + std::to_string(v) + " is not a power of two");
  if (!res_default.empty() && r.resolutions.empty()) throw UsageError("resolutions", "empty list");
  if (r.experiment == ExperimentId::oracle_check)
    for (int v : r.resolutions)
      if (v > kPicardMaxResolution) throw UsageError("resolutions", "oracle runs need n <= 16");
  if (!eps_default.empty() && r.eps.size() < 2) throw UsageError("eps", "a rate fit needs at least two values");
  for (double e : r.eps) {
    if (!(e > 0.0)) throw UsageError("eps", "values must be positive");
    if (eps_on_grid) {
      const double k = e * r.n;
      if (std::abs(k - std::round(k)) > 1e-9 || std::round(k) < 1.0)
        throw UsageError("eps", "eps " + std::to_string(e) + " is not grid-aligned (not a multiple of 1/" +
                                    std::to_string(r.n) + ")");
    }
  }
  if (r.reps < 1) throw UsageError("reps", "must be >= 1");
  if (r.reps < reps_min)
    throw UsageError("reps", std::string(to_string(r.experiment)) + " needs at least " + std::to_string(reps_min));
  return r;
}

/// Echo of the resolved configuration. `jobs` is left out on purpose: output
/// must not depend on the degree of parallelism.
inline nlohmann::json to_json(const ResolvedConfig& r) {
  nlohmann::json j;
  j["experiment"] = std::string(to_string(r.experiment));
  j["a"] = r.params.a;
  j["m"] = r.params.m;
  j["theta"] = r.params.theta;
  j["diffusion"] = std::string(to_string(r.params.diffusion));
  const auto F = r.diffusion();
  j["diffusion_params"] = std::vector<double>(F.params().begin(), F.params().end());
  j["n"] = r.n;
  j["resolutions"] = r.resolutions;
  j["eps"] = r.eps;
  j["reps"] = r.reps;
  j["seed"] = r.seed;
  return j;
}

}  // namespace kgqv::harness
