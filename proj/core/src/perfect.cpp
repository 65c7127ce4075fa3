#include "ditto/perfect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ditto/diffeo.hpp"
#include "ditto/errors.hpp"
#include "ditto/numeric.hpp"

namespace ditto {

void RegionEstimate::refresh_p_hat() {
  if (empty || !std::isfinite(log_s) || !std::isfinite(log_S)) {
    p_hat = 0.0;
    return;
  }
  p_hat = (1.0 - slack) * std::exp(log_s - log_S);
}

RegionEstimate estimate_region(const EllipsoidalPartition& part, std::size_t i, const LogDensity& logpi,
                               std::int64_t n_draws, double slack, Rng& rng) {
  if (n_draws < 2) throw InvalidArgument("estimate_region: need at least two draws");
  if (!(slack > 0 && slack < 1)) throw InvalidArgument("estimate_region: slack must lie in (0, 1)");
  RegionEstimate est;
  est.index = i;
  est.log_volume = annulus_log_volume(part, i);
  est.slack = slack;
  est.n_draws = n_draws;
  est.log_s = std::numeric_limits<double>::infinity();
  est.log_S = kNegInf;
  LogMeanAccumulator acc;
  for (std::int64_t k = 0; k < n_draws; ++k) {
    const double lp = logpi(sample_uniform_annulus(part, i, rng));
    const double v = std::isnan(lp) ? kNegInf : lp;
    acc.add(v);
    est.log_s = std::min(est.log_s, v);
    est.log_S = std::max(est.log_S, v);
  }
  const double lm = acc.log_mean();
  est.empty = !std::isfinite(lm);
  est.log_weight = est.empty ? kNegInf : est.log_volume + lm;
  est.refresh_p_hat();
  return est;
}

RegionEstimate widen_region(const EllipsoidalPartition& part, const RegionEstimate& previous,
                            const LogDensity& logpi, Rng& rng, std::int64_t factor) {
  const double slack = std::min(0.5, 2.0 * previous.slack);
  RegionEstimate fresh = estimate_region(part, previous.index, logpi, previous.n_draws * factor, slack, rng);
  RegionEstimate out = previous;
  out.slack = slack;
  out.n_draws = fresh.n_draws;
  out.log_s = std::min(previous.log_s, fresh.log_s);
  out.log_S = std::max(previous.log_S, fresh.log_S);
  out.refresh_p_hat();
  return out;
}

std::vector<double> selection_cdf(std::span<const RegionEstimate> estimates) {
  std::vector<double> logw;
  logw.reserve(estimates.size());
  for (const auto& e : estimates) logw.push_back(e.empty ? kNegInf : e.log_weight);
  const double total = log_sum_exp(logw);
  if (!std::isfinite(total)) throw NoMass("select_region: every region weight is zero");
  std::vector<double> cdf(estimates.size());
  double run = 0.0;
  for (std::size_t k = 0; k < logw.size(); ++k) {
    run += std::exp(logw[k] - total);
    cdf[k] = run;
  }
  return cdf;
}

std::size_t select_from_cdf(std::span<const double> cdf, double u) {
  if (cdf.empty()) throw NoMass("select_region: no regions");
  const double scaled = u * cdf.back();
  // upper_bound never lands on a zero-probability entry (it shares the
  // cumulative value of its predecessor).
  auto it = std::upper_bound(cdf.begin(), cdf.end(), scaled);
  std::size_t k = static_cast<std::size_t>(it - cdf.begin());
  if (k == cdf.size()) {
    k = cdf.size() - 1;
    while (k > 0 && cdf[k] == cdf[k - 1]) --k;
  }
  return k + 1;
}

std::size_t select_region(std::span<const RegionEstimate> estimates, double u) {
  const auto cdf = selection_cdf(estimates);
  return estimates[select_from_cdf(cdf, u) - 1].index;
}

std::size_t select_region(std::span<const RegionEstimate> estimates, Rng& rng) {
  return select_region(estimates, rng.uniform());
}

std::int64_t draw_backward_time(double p_hat, double u) {
  if (!(p_hat > 0 && p_hat <= 1)) throw InvalidArgument("draw_backward_time: p_hat must lie in (0, 1]");
  if (p_hat == 1.0) return 1;
  if (!(u > 0 && u <= 1)) throw InvalidArgument("draw_backward_time: u must lie in (0, 1]");
  const double t = std::ceil(std::log(u) / std::log1p(-p_hat));
  if (!(t < 9.0e18)) throw InvalidArgument("draw_backward_time: p_hat too small");
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(t));
}

std::int64_t draw_backward_time(double p_hat, Rng& rng) { return draw_backward_time(p_hat, rng.uniform_pos()); }

bool residual_step(ChainState& state, const RegionEstimate& region, const EllipsoidalPartition& part,
                   const LogDensity& logpi, Rng& rng) {
  Vector proposal = sample_uniform_annulus(part, region.index, rng);
  const double u = region.p_hat + (1.0 - region.p_hat) * rng.uniform_pos();
  const double lp = logpi(proposal);
  const double log_ratio = (std::isnan(lp) ? kNegInf : lp) - state.log_density;
  const double alpha = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
  if (alpha < region.p_hat) throw MinorizationViolation(region.index);
  if (u <= alpha) {
    state.theta = std::move(proposal);
    state.log_density = lp;
    return true;
  }
  return false;
}

PerfectDraw perfect_draw(const RegionEstimate& region, const EllipsoidalPartition& part, const LogDensity& logpi,
                         Rng& rng, std::optional<double> diffeo_b) {
  if (region.empty) throw EmptyRegion("perfect_draw: region " + std::to_string(region.index) + " has no mass");
  PerfectDraw out;
  out.region = region.index;
  out.backward_time = draw_backward_time(region.p_hat, rng);
  ChainState state;
  state.theta = sample_uniform_annulus(part, region.index, rng);
  state.log_density = logpi(state.theta);
  // The start is the regeneration draw; T - 1 residual moves follow it.
  for (std::int64_t t = 1; t < out.backward_time; ++t) {
    if (!residual_step(state, region, part, logpi, rng)) ++out.residual_rejections;
  }
  out.theta = diffeo_b ? h_inverse(state.theta, *diffeo_b) : std::move(state.theta);
  return out;
}

PartitionExtension extend_partition(const EllipsoidalPartition& part, std::size_t factor) {
  if (factor < 2) throw InvalidArgument("extend_partition: factor must be at least 2");
  const std::size_t m = part.size();
  return {part.with_count(m * factor), m + 1, m * factor};
}

}  // namespace ditto
