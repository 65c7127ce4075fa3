#pragma once

// Small end-to-end checks shared by the unit tests and the acceptance
// binary. Each builds its own tractable target so the answer is known.

#include <array>
#include <cstdint>

#include "ditto/stats.hpp"

namespace scenario {

/// Discretized 1-d target on A_1 = [-1, 1] with 50 step levels in [p, 1].
/// Samples the mixture {prob p: uniform draw; else one residual step} from a
/// fixed start and tests it against the exact one-step law of the
/// independence sampler (50 bins plus the stay-put atom).
ditto::TestResult kernel_identity(double p_hat, std::uint64_t seed, std::int64_t steps = 1'000'000);

struct GaussianPerfectReport {
  std::array<double, 2> ks_p{};     // per-marginal two-sample KS p-values
  double cov_error = 0.0;           // max |S_ij - C_ij| / sqrt(C_ii C_jj)
  double backward_time_p = 0.0;     // chi-square p-value against the geometric law
  std::int64_t violations = 0;
  std::int64_t draws = 0;
};

/// Perfect draws from a correlated 2-d Gaussian on an ellipsoidal partition
/// built from its true moments, compared with direct draws.
GaussianPerfectReport gaussian_perfect(std::uint64_t seed, std::int64_t n);

}  // namespace scenario
