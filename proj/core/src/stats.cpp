#include "ditto/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "ditto/errors.hpp"

namespace ditto {

double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

double ks_p_value(double d, double effective_n) {
  const double root = std::sqrt(effective_n);
  return kolmogorov_q((root + 0.12 + 0.11 / root) * d);
}

}  // namespace

TestResult ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw InvalidArgument("ks_one_sample: empty sample");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return {d, ks_p_value(d, n)};
}

TestResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("ks_two_sample: empty sample");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return {d, ks_p_value(d, n * m / (n + m))};
}

double chi_square_sf(double statistic, double dof) {
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

TestResult chi_square_gof(std::span<const std::size_t> observed, std::span<const double> expected_prob) {
  if (observed.size() != expected_prob.size()) throw InvalidArgument("chi_square_gof: size mismatch");
  const double total = static_cast<double>(std::accumulate(observed.begin(), observed.end(), std::size_t{0}));
  double stat = 0.0;
  int used = 0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    const double e = total * expected_prob[k];
    if (e <= 0.0) {
      if (observed[k] > 0) return {std::numeric_limits<double>::infinity(), 0.0};
      continue;
    }
    const double diff = static_cast<double>(observed[k]) - e;
    stat += diff * diff / e;
    ++used;
  }
  return {stat, chi_square_sf(stat, used - 1)};
}

TestResult chi_square_two_sample(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.size() != b.size()) throw InvalidArgument("chi_square_two_sample: size mismatch");
  const double na = static_cast<double>(std::accumulate(a.begin(), a.end(), std::size_t{0}));
  const double nb = static_cast<double>(std::accumulate(b.begin(), b.end(), std::size_t{0}));
  double stat = 0.0;
  int used = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double row = static_cast<double>(a[k] + b[k]);
    if (row == 0.0) continue;
    const double ea = row * na / (na + nb);
    const double eb = row * nb / (na + nb);
    stat += (a[k] - ea) * (a[k] - ea) / ea + (b[k] - eb) * (b[k] - eb) / eb;
    ++used;
  }
  return {stat, chi_square_sf(stat, used - 1)};
}

double student_t_cdf(double x, double dof, double location, double precision) {
  boost::math::students_t dist(dof);
  return boost::math::cdf(dist, (x - location) * std::sqrt(precision));
}

double gamma_cdf(double x, double shape, double rate) {
  if (x <= 0.0) return 0.0;
  boost::math::gamma_distribution<double> dist(shape, 1.0 / rate);
  return boost::math::cdf(dist, x);
}

double standard_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw InvalidArgument("quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double pos = prob * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::pair<double, double> hpd_interval(std::vector<double> values, double mass) {
  if (values.empty()) throw InvalidArgument("hpd_interval: empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  const auto span = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(mass * static_cast<double>(n))));
  if (span >= n) return {values.front(), values.back()};
  std::size_t best = 0;
  double width = values[span - 1] - values[0];
  for (std::size_t i = 1; i + span <= n; ++i) {
    const double w = values[i + span - 1] - values[i];
    if (w < width) {
      width = w;
      best = i;
    }
  }
  return {values[best], values[best + span - 1]};
}

ColumnSummary summarize_column(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("summarize_column: empty column");
  ColumnSummary s;
  const double n = static_cast<double>(values.size());
  // Two-pass with compensation keeps the variance accurate for large offsets.
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0, comp = 0.0;
  for (double v : values) {
    ss += (v - s.mean) * (v - s.mean);
    comp += v - s.mean;
  }
  s.mean += comp / n;
  ss -= comp * comp / n;
  s.sd = values.size() > 1 ? std::sqrt(std::max(0.0, ss) / (n - 1.0)) : 0.0;
  std::vector<double> v(values.begin(), values.end());
  s.q025 = quantile(v, 0.025);
  s.median = quantile(v, 0.5);
  s.q975 = quantile(v, 0.975);
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  s.min = *mn;
  s.max = *mx;
  return s;
}

}  // namespace ditto
