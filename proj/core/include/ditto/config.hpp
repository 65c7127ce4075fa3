#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ditto/models.hpp"
#include "ditto/tmcmc.hpp"

namespace ditto {

struct ModelSettings {
  ModelKind kind = ModelKind::normal_gamma;
  int n = 10;  // normal_gamma sample size, autologistic chain length
  int rows = 10;
  int cols = 10;
  double radius = 0.05;
  double beta_max = 150.0;
  NormalGammaPriors priors;
};

struct DataSettings {
  std::vector<double> true_params;  // natural; empty = draw from the prior
  std::uint64_t seed = 1;
  DataGenConfig generation;
  std::string path;  // load instead of generating when set
};

struct AnnulusSettings {
  double r1 = 0.1;
  double step = 0.3;
  int bins = 100;
  std::int64_t draws = 1000;
};

struct SurrogateSettings {
  int design_points = 100;
  double ball_radius = 1.0;
  std::int64_t importance_draws = 10'000;
  std::vector<double> d_diag{1.0};  // one entry is broadcast
  std::optional<double> nugget;     // empty = calibrate from Monte Carlo errors
  AnnulusSettings annulus;
};

struct PartitionSettings {
  double sqrt_c1 = 2.3;
  double step = 0.02;
  std::size_t count = 100;
  bool median_center = false;
};

struct SamplerSettings {
  std::int64_t n_iid = 10'000;
  std::int64_t region_draws = 5000;
  double slack = 0.05;
  int max_doublings = 6;
  std::int64_t max_total_steps = 0;  // residual-step budget per run; 0 = unlimited
};

struct DiffeoSettings {
  bool enabled = false;
  double b = 0.01;
};

struct RunConfig {
  std::string preset;
  ModelSettings model;
  DataSettings data;
  SurrogateSettings surrogate;
  TmcmcConfig tmcmc;
  std::vector<double> tmcmc_init;  // unconstrained; empty = origin
  PartitionSettings partition;
  SamplerSettings sampler;
  DiffeoSettings diffeo;
  std::uint64_t seed = 7;
  int workers = 1;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Built-in experiment settings for each model.
RunConfig preset_config(std::string_view name);

/// Strict JSON schema: unknown keys are rejected. A top-level "preset"
/// key selects the base that the remaining keys override.
RunConfig parse_config_string(const std::string& text);
RunConfig parse_config(const std::string& path);

/// JSON echo of a config (round-trips through parse_config_string).
std::string config_to_json(const RunConfig& config);

std::shared_ptr<const Model> make_model(const ModelSettings& settings);

/// Worker count after the DITTO_WORKERS override.
int effective_workers(int configured);

}  // namespace ditto
