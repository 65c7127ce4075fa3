#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ditto/models.hpp"
#include "ditto/tmcmc.hpp"

namespace ditto {

struct DrawProvenance {
  std::size_t region = 0;
  std::int64_t backward_time = 1;
  std::uint64_t stream_index = 0;
  std::int64_t residual_rejections = 0;
  int retries = 0;  // re-runs after minorization violations
};

/// iid draws in the natural parameterization with per-row provenance.
struct SampleBatch {
  std::vector<std::string> columns;
  Matrix values;  // rows x columns
  std::vector<DrawProvenance> provenance;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct RunManifest {
  std::string format = "ditto-manifest/1";
  std::string config_json;
  std::string dataset_digest;
  std::string surrogate_digest;
  std::string regions_digest;
  std::string samples_digest;
  double nugget = 0.0;
  AcceptanceRates tmcmc_acceptance;
  // Partition geometry: center, Cholesky rows, ladder.
  std::vector<double> partition_center;
  std::vector<std::vector<double>> partition_chol;
  double partition_sqrt_c1 = 0.0;
  double partition_step = 0.0;
  std::size_t partition_count = 0;
  bool diffeo_space = false;
  std::vector<StageTiming> timings;
  double p_hat_min = 0.0;
  double p_hat_median = 0.0;
  double p_hat_max = 0.0;
  std::int64_t violations = 0;  // tasks that hit a minorization violation
  std::int64_t widened_regions = 0;
  int doublings = 0;
  std::int64_t draws = 0;
};

}  // namespace ditto
