#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace ditto {

/// Counter-based Philox4x32-10 generator. The (key, stream) pair selects a
/// disjoint region of the counter space, so streams never overlap.
class Rng {
 public:
  using result_type = std::uint64_t;

  Rng(std::uint64_t key, std::uint64_t stream) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on (0, 1].
  double uniform_pos() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal() noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }
  /// Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n) noexcept;
  /// Sign in {-1, +1} with probability 1/2 each.
  int sign() noexcept { return ((*this)() >> 63) ? 1 : -1; }
  std::int64_t poisson(double mean);

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Deterministic stream keyed by (master_seed, stage_tag, task_index).
Rng rng_stream(std::uint64_t master_seed, std::string_view stage_tag, std::uint64_t task_index);

/// SplitMix64 finalizer, exposed for seed derivation.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace ditto
