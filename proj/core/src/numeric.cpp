#include "ditto/numeric.hpp"

#include <algorithm>

namespace ditto {

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return kNegInf;
  const double m = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

double log_mean_exp(std::span<const double> values) {
  if (values.empty()) return kNegInf;
  return log_sum_exp(values) - std::log(static_cast<double>(values.size()));
}

double log_sub_exp(double a, double b) {
  if (b == kNegInf) return a;
  if (a == b) return kNegInf;
  return a + std::log(-std::expm1(b - a));
}

double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

void LogMeanAccumulator::add(double log_value) {
  ++count_;
  if (log_value == kNegInf) return;
  if (log_value > max_) {
    const double shift = std::exp(max_ - log_value);
    sum_ *= shift;
    sum_sq_ *= shift * shift;
    max_ = log_value;
  }
  const double w = std::exp(log_value - max_);
  sum_ += w;
  sum_sq_ += w * w;
}

double LogMeanAccumulator::log_sum() const {
  if (sum_ == 0.0) return kNegInf;
  return max_ + std::log(sum_);
}

double LogMeanAccumulator::log_mean() const {
  if (count_ == 0) return kNegInf;
  return log_sum() - std::log(static_cast<double>(count_));
}

double LogMeanAccumulator::log_mean_std_error() const {
  if (count_ < 2 || sum_ == 0.0) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(count_);
  const double mean = sum_ / n;
  const double var = std::max(0.0, (sum_sq_ / n - mean * mean) * n / (n - 1.0));
  return std::sqrt(var / n) / mean;
}

}  // namespace ditto
