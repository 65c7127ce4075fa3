#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "ditto/models.hpp"
#include "ditto/rng.hpp"

namespace ditto {

/// A log-scale Monte Carlo estimate with its delta-method standard error.
struct LogEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// K iid uniform draws from the centered d-ball of the given radius.
std::vector<Vector> draw_design_points(int count, int dim, double ball_radius, Rng& rng);

/// log of the importance-sampling estimate mean(f(x)/g(x)), x ~ g, over
/// `draws` envelope draws. Throws EstimatorDegenerate if every ratio is zero.
LogEstimate is_log_normconst(const Model& model, const Dataset& data, const Vector& natural, std::int64_t draws,
                             Rng& rng);

/// Bins B_i = {x : r_{i-1} <= sqrt(tau)|x - psi| <= r_i}, r_0 = 0.
struct AnnulusSchedule1D {
  std::vector<double> radii;  // r_1 < ... < r_M
  std::vector<std::int64_t> per_bin_draws;

  /// r_1 = first, r_i = first + step (i - 1), same draw count everywhere.
  static AnnulusSchedule1D ladder(double first, double step, int bins, std::int64_t draws_per_bin);
  void validate() const;
};

/// log of sum_i L(B_i) mean f over uniform draws in B_i, where `log_f` is
/// the log integrand in x and L(B_i) = 2 (r_i - r_{i-1}) / sqrt(tau).
LogEstimate annulus_1d_log_integral(const std::function<double(double)>& log_f, double psi, double tau,
                                    const AnnulusSchedule1D& schedule, Rng& rng);

/// Integral of exp(-tau (x - psi)^2 / 2) over the schedule's span.
LogEstimate annulus_1d_log_normconst(double psi, double tau, const AnnulusSchedule1D& schedule, Rng& rng);

/// Design points with their estimated log-normalizers.
struct DesignSet {
  std::vector<Vector> points;
  std::vector<double> values;
  std::vector<double> std_errors;  // optional Monte Carlo errors of `values`
  double ball_radius = 1.0;

  int dim() const { return points.empty() ? 0 : static_cast<int>(points.front().size()); }
  int size() const { return static_cast<int>(points.size()); }
};

/// Squared-exponential correlation exp(-(a - b)' D (a - b)), D = diag(d_diag).
double gp_correlation(const Vector& a, const Vector& b, const Vector& d_diag);

/// Kriging interpolator of log C with linear mean h(theta) = (1, theta).
struct GpSurrogate {
  Matrix points;        // K x d
  Vector values;        // K
  Vector d_diag;        // d
  double nugget = 0.0;  // effective nugget after escalation
  double ball_radius = 1.0;
  Vector beta;          // d + 1
  Vector resid_solve;   // (R + nugget I)^{-1} (Z - H beta)
  Matrix chol;          // lower Cholesky factor of R + nugget I
  double sigma2 = 0.0;  // diagnostic process variance

  int dim() const { return static_cast<int>(points.cols()); }
  int size() const { return static_cast<int>(points.rows()); }

  /// Predictive mean of log C at theta.
  double predict(const Vector& theta) const;
};

/// Fits the surrogate. The nugget escalates by x10 up to max(nugget, 1e-6)
/// until the Cholesky succeeds and every design value is reproduced within
/// 10 * nugget * K. Throws IllConditionedKernel for coincident points or when
/// no level works, and InsufficientDesign when K <= d + 1.
GpSurrogate gp_fit(const DesignSet& design, const Vector& d_diag, double nugget);

/// Nugget maximizing the Gaussian likelihood of the design values when the
/// Monte Carlo errors act as known observation noise, among the levels at
/// which gp_fit meets its interpolation bound. Returns `fallback` when the
/// design carries no usable standard errors or no level qualifies.
double calibrate_nugget(const DesignSet& design, const Vector& d_diag, double fallback = 1e-10);

void surrogate_save(const GpSurrogate& surrogate, const std::string& path);
GpSurrogate surrogate_load(const std::string& path);

/// Text serialization used by surrogate_save; exposed for digests.
std::string surrogate_to_string(const GpSurrogate& surrogate);
GpSurrogate surrogate_from_string(const std::string& text);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

}  // namespace ditto
