#include "ditto/tmcmc.hpp"

#include <cmath>
#include <vector>

#include "ditto/errors.hpp"

namespace ditto {
namespace {

Vector broadcast(const Vector& scales, Eigen::Index d) {
  if (scales.size() == d) return scales;
  if (scales.size() == 1) return Vector::Constant(d, scales[0]);
  throw InvalidArgument("tmcmc: scales must have length 1 or d");
}

bool metropolis(ChainState& state, Vector proposal, double log_jacobian, const LogDensity& logpi, Rng& rng) {
  const double lp = logpi(proposal);
  if (std::isnan(lp) || lp == -std::numeric_limits<double>::infinity()) return false;
  const double log_ratio = lp - state.log_density + log_jacobian;
  if (log_ratio >= 0.0 || std::log(rng.uniform_pos()) < log_ratio) {
    state.theta = std::move(proposal);
    state.log_density = lp;
    return true;
  }
  return false;
}

struct Counter {
  std::int64_t tried = 0;
  std::int64_t accepted = 0;
  void record(bool ok) {
    ++tried;
    accepted += ok ? 1 : 0;
  }
  double rate() const { return tried == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(tried); }
};

}  // namespace

void TmcmcConfig::validate() const {
  if (scales.size() < 1) throw InvalidArgument("tmcmc: scales must not be empty");
  for (Eigen::Index j = 0; j < scales.size(); ++j) {
    if (!(scales[j] > 0)) throw InvalidArgument("tmcmc: scales must be positive");
  }
  if (burn_in < 0 || keep < 0) throw InvalidArgument("tmcmc: iteration counts must be non-negative");
  if (thin_a < 1 || thin_b < 1) throw InvalidArgument("tmcmc: thinning counts must be at least 1");
  if (!(multiplicative_floor > 0 && multiplicative_floor < 1)) {
    throw InvalidArgument("tmcmc: multiplicative floor must lie in (0, 1)");
  }
}

Vector additive_map(const Vector& theta, const Vector& scales, double e, std::span<const int> signs) {
  const Vector a = broadcast(scales, theta.size());
  Vector out = theta;
  for (Eigen::Index j = 0; j < theta.size(); ++j) out[j] += signs[static_cast<std::size_t>(j)] * a[j] * e;
  return out;
}

Vector multiplicative_map(const Vector& theta, double eps, std::span<const int> signs) {
  Vector out = theta;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    out[j] = signs[static_cast<std::size_t>(j)] > 0 ? out[j] * eps : out[j] / eps;
  }
  return out;
}

double multiplicative_log_jacobian(double eps, std::span<const int> signs) {
  int net = 0;
  for (int b : signs) net += b;
  return net * std::log(eps);
}

bool additive_step(ChainState& state, const Vector& scales, const LogDensity& logpi, Rng& rng, double fixed_e) {
  const double e = fixed_e >= 0 ? fixed_e : std::abs(rng.normal());
  std::vector<int> signs(static_cast<std::size_t>(state.theta.size()));
  for (int& b : signs) b = rng.sign();
  return metropolis(state, additive_map(state.theta, scales, e, signs), 0.0, logpi, rng);
}

bool multiplicative_step(ChainState& state, const LogDensity& logpi, double floor, Rng& rng, double fixed_eps) {
  const double eps = fixed_eps > 0 ? fixed_eps : rng.uniform(floor, 1.0);
  std::vector<int> signs(static_cast<std::size_t>(state.theta.size()));
  for (int& b : signs) b = rng.sign();
  return metropolis(state, multiplicative_map(state.theta, eps, signs), multiplicative_log_jacobian(eps, signs),
                    logpi, rng);
}

bool deterministic_step(ChainState& state, const Vector& scales, const LogDensity& logpi, TmcmcMode mode,
                        std::int64_t parity, Rng& rng) {
  bool multiplicative = false;
  if (mode == TmcmcMode::mixture) {
    // parity decides which branch the coin maps to; the branch law stays 1/2.
    const bool coin = rng.bernoulli(0.5);
    multiplicative = (parity % 2 == 0) ? coin : !coin;
  }
  if (multiplicative) return multiplicative_step(state, logpi, 0.5, rng, 0.9);
  return additive_step(state, scales, logpi, rng, 1.0);
}

Chain run_chain(const LogDensity& logpi, const TmcmcConfig& config, const Vector& init, Rng& rng) {
  config.validate();
  if (!init.allFinite()) throw BadInit("tmcmc: initial state is not finite");
  ChainState state{init, logpi(init)};
  if (!std::isfinite(state.log_density)) throw BadInit("tmcmc: log density is not finite at the initial state");
  const Vector scales = broadcast(config.scales, init.size());

  Counter add, mult, det;
  const auto iterate = [&](std::int64_t it) {
    if (config.mode == TmcmcMode::mixture && rng.bernoulli(0.5)) {
      mult.record(multiplicative_step(state, logpi, config.multiplicative_floor, rng));
    } else {
      add.record(additive_step(state, scales, logpi, rng));
    }
    if (config.deterministic_step) det.record(deterministic_step(state, scales, logpi, config.mode, it, rng));
  };

  std::int64_t it = 0;
  for (; it < config.burn_in; ++it) iterate(it);
  const std::int64_t thin = config.thin_a * config.thin_b;
  Chain chain;
  chain.draws.resize(config.keep, init.size());
  for (std::int64_t k = 0; k < config.keep; ++k) {
    for (std::int64_t t = 0; t < thin; ++t, ++it) iterate(it);
    chain.draws.row(k) = state.theta.transpose();
  }
  chain.acceptance = {add.rate(), mult.rate(), det.rate()};
  return chain;
}

}  // namespace ditto
