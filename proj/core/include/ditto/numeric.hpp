#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

namespace ditto {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(sum(exp(values))); -inf for an empty span or all -inf entries.
double log_sum_exp(std::span<const double> values);

/// log(mean(exp(values))).
double log_mean_exp(std::span<const double> values);

/// log(exp(a) - exp(b)) for a >= b.
double log_sub_exp(double a, double b);

/// log(exp(a) + exp(b)).
double log_add_exp(double a, double b);

inline double logistic(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

/// log of the logistic derivative sigma(t) * (1 - sigma(t)).
inline double log_logistic_deriv(double t) {
  const double a = std::abs(t);
  return -a - 2.0 * std::log1p(std::exp(-a));
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

/// Streaming accumulator of log-weights. Keeps a running maximum so raw
/// weights are never exponentiated; also tracks the second moment for a
/// delta-method standard error of the log-mean.
class LogMeanAccumulator {
 public:
  void add(double log_value);

  std::size_t count() const noexcept { return count_; }
  double log_sum() const;
  double log_mean() const;
  /// Standard error of log(mean) by the delta method; NaN when count < 2.
  double log_mean_std_error() const;

 private:
  std::size_t count_ = 0;
  double max_ = kNegInf;
  double sum_ = 0.0;     // sum exp(l - max_)
  double sum_sq_ = 0.0;  // sum exp(2 (l - max_))
};

}  // namespace ditto
