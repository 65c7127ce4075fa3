#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace ditto {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Kolmogorov complementary distribution Q(lambda) = P(K > lambda).
double kolmogorov_q(double lambda);

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
TestResult ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov test.
TestResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Upper tail probability of a chi-square statistic.
double chi_square_sf(double statistic, double dof);

/// Pearson goodness of fit. Expected probabilities must sum to one; bins with
/// zero expectation are skipped. Degrees of freedom are (used bins - 1).
TestResult chi_square_gof(std::span<const std::size_t> observed, std::span<const double> expected_prob);

/// Two-sample chi-square homogeneity test over shared bins.
TestResult chi_square_two_sample(std::span<const std::size_t> a, std::span<const std::size_t> b);

/// Location-scale Student-t CDF with precision lambda: density proportional
/// to (1 + lambda (x - loc)^2 / dof)^(-(dof + 1) / 2).
double student_t_cdf(double x, double dof, double location, double precision);

/// Gamma CDF with shape/rate parameterization.
double gamma_cdf(double x, double shape, double rate);

double standard_normal_cdf(double x);

/// Linear-interpolation empirical quantile (type 7).
double quantile(std::vector<double> values, double prob);

/// Shortest interval holding `mass` of the samples.
std::pair<double, double> hpd_interval(std::vector<double> values, double mass);

struct ColumnSummary {
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double median = 0.0;
  double q975 = 0.0;
  double min = 0.0;
  double max = 0.0;
};

ColumnSummary summarize_column(std::span<const double> values);

}  // namespace ditto
