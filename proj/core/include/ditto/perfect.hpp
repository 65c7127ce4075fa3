#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ditto/geometry.hpp"
#include "ditto/tmcmc.hpp"

namespace ditto {

/// Monte Carlo summary of the target restricted to one annulus.
struct RegionEstimate {
  std::size_t index = 0;  // 1-based
  double log_volume = 0.0;
  double log_weight = 0.0;  // log of L(A_i) * mean density over uniform draws
  double log_s = 0.0;       // min log density over the draws
  double log_S = 0.0;       // max log density over the draws
  double slack = 0.05;
  double p_hat = 0.0;  // (1 - slack) exp(log_s - log_S)
  std::int64_t n_draws = 0;
  bool empty = false;  // every draw had zero density; never selected

  void refresh_p_hat();
};

/// Throws InvalidArgument for fewer than two draws or slack outside (0, 1).
/// A region where every draw has zero density comes back flagged `empty`
/// with log_weight = -inf instead of throwing.
RegionEstimate estimate_region(const EllipsoidalPartition& part, std::size_t i, const LogDensity& logpi,
                               std::int64_t n_draws, double slack, Rng& rng);

/// Re-estimates after a minorization violation: `factor` times the draws,
/// doubled slack, and a bracket merged with the previous one. The weight is
/// kept so region selection probabilities do not move.
RegionEstimate widen_region(const EllipsoidalPartition& part, const RegionEstimate& previous,
                            const LogDensity& logpi, Rng& rng, std::int64_t factor = 4);

/// Categorical draw proportional to exp(log_weight) by cumulative scan of
/// the single variate u in [0, 1). Returns the 1-based region index.
std::size_t select_region(std::span<const RegionEstimate> estimates, double u);
std::size_t select_region(std::span<const RegionEstimate> estimates, Rng& rng);

/// Normalized cumulative selection probabilities; throws NoMass if every
/// weight is -inf.
std::vector<double> selection_cdf(std::span<const RegionEstimate> estimates);
std::size_t select_from_cdf(std::span<const double> cdf, double u);

/// Geometric on {1, 2, ...} with success probability p, by inversion of
/// u in (0, 1].
std::int64_t draw_backward_time(double p_hat, double u);
std::int64_t draw_backward_time(double p_hat, Rng& rng);

/// One step of the residual kernel of the independence sampler with a
/// uniform proposal on A_i. Returns true if the state moved. Throws
/// MinorizationViolation when the acceptance probability is below p_hat.
bool residual_step(ChainState& state, const RegionEstimate& region, const EllipsoidalPartition& part,
                   const LogDensity& logpi, Rng& rng);

struct PerfectDraw {
  Vector theta;  // mapped back through h^{-1} when a diffeomorphism is used
  std::size_t region = 0;
  std::int64_t backward_time = 1;
  std::int64_t residual_rejections = 0;
};

/// Exact draw from the target restricted to A_i: start from the uniform
/// regeneration law and apply T - 1 residual steps, T ~ Geometric(p_hat).
PerfectDraw perfect_draw(const RegionEstimate& region, const EllipsoidalPartition& part, const LogDensity& logpi,
                         Rng& rng, std::optional<double> diffeo_b = std::nullopt);

struct PartitionExtension {
  EllipsoidalPartition partition;
  std::size_t first_new = 0;  // 1-based, inclusive
  std::size_t last_new = 0;
};

/// Multiplies the annulus count on the same ladder; existing annuli keep
/// their geometry and estimates.
PartitionExtension extend_partition(const EllipsoidalPartition& part, std::size_t factor = 2);

}  // namespace ditto
