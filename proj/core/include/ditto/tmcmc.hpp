#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "ditto/models.hpp"
#include "ditto/rng.hpp"

namespace ditto {

using LogDensity = std::function<double(const Vector&)>;

enum class TmcmcMode { additive, mixture };

struct TmcmcConfig {
  Vector scales;  // a_j; a single entry is broadcast to every coordinate
  TmcmcMode mode = TmcmcMode::additive;
  std::int64_t burn_in = 100'000;
  std::int64_t keep = 10'000;
  std::int64_t thin_a = 10;
  std::int64_t thin_b = 5;
  bool deterministic_step = true;
  double multiplicative_floor = 0.01;

  void validate() const;
};

/// Current state of a chain together with its cached log density.
struct ChainState {
  Vector theta;
  double log_density = 0.0;
};

/// Proposal maps with explicit signs b_j in {-1, +1}. Flipping every sign
/// inverts the map.
Vector additive_map(const Vector& theta, const Vector& scales, double e, std::span<const int> signs);
Vector multiplicative_map(const Vector& theta, double eps, std::span<const int> signs);
/// log |det| of multiplicative_map: (sum b_j) log eps.
double multiplicative_log_jacobian(double eps, std::span<const int> signs);

/// theta'_j = theta_j + b_j a_j e with e = |N(0,1)| (or `fixed_e` when
/// given) and fair random signs b_j. Returns whether the move was accepted.
bool additive_step(ChainState& state, const Vector& scales, const LogDensity& logpi, Rng& rng,
                   double fixed_e = -1.0);

/// theta'_j = theta_j * eps^{b_j}, eps ~ U(floor, 1) (or `fixed_eps`),
/// accepted with the Jacobian eps^{sum b_j}.
bool multiplicative_step(ChainState& state, const LogDensity& logpi, double floor, Rng& rng,
                         double fixed_eps = -1.0);

/// Degenerate-epsilon move: e = 1 additive, or in mixture mode with
/// probability 1/2 a multiplicative move with eps = 0.9. Even parity draws
/// the additive branch first.
bool deterministic_step(ChainState& state, const Vector& scales, const LogDensity& logpi, TmcmcMode mode,
                        std::int64_t parity, Rng& rng);

struct AcceptanceRates {
  double additive = 0.0;
  double multiplicative = 0.0;
  double deterministic = 0.0;
};

struct Chain {
  Matrix draws;  // kept iterations x d, unconstrained coordinates
  AcceptanceRates acceptance;
};

/// Burn-in, then keep * thin_a * thin_b iterations; every (thin_a * thin_b)-th
/// state is kept. Throws BadInit if logpi(init) is not finite.
Chain run_chain(const LogDensity& logpi, const TmcmcConfig& config, const Vector& init, Rng& rng);

}  // namespace ditto
