#pragma once

#include <cstddef>
#include <optional>

#include "ditto/models.hpp"
#include "ditto/rng.hpp"

namespace ditto {

/// Radius ladder sqrt(c_i) = sqrt_c1 + step (i - 1), i = 1..count.
struct RadiusLadder {
  double sqrt_c1 = 1.0;
  double step = 0.1;
  std::size_t count = 1;

  double sqrt_c(std::size_t i) const { return i == 0 ? 0.0 : sqrt_c1 + step * static_cast<double>(i - 1); }
  double c(std::size_t i) const { return sqrt_c(i) * sqrt_c(i); }
  void validate() const;
};

/// Nested Mahalanobis ellipsoids {(t - mu)' S^{-1} (t - mu) <= c_i}; the
/// annulus A_i lies between c_{i-1} and c_i with c_0 = 0.
class EllipsoidalPartition {
 public:
  EllipsoidalPartition(Vector center, const Matrix& scale, RadiusLadder ladder);
  /// Builds directly from a lower Cholesky factor of the scale.
  static EllipsoidalPartition from_cholesky(Vector center, Matrix chol_lower, RadiusLadder ladder);

  int dim() const { return static_cast<int>(center_.size()); }
  std::size_t size() const { return ladder_.count; }
  const Vector& center() const { return center_; }
  const Matrix& chol() const { return chol_; }
  double log_det_scale() const { return log_det_; }
  const RadiusLadder& ladder() const { return ladder_; }

  /// Same center and scale with `count` annuli on the same ladder.
  EllipsoidalPartition with_count(std::size_t count) const;

  /// Squared Mahalanobis norm of theta.
  double mahalanobis_sq(const Vector& theta) const;

 private:
  EllipsoidalPartition() = default;

  Vector center_;
  Matrix chol_;
  double log_det_ = 0.0;
  RadiusLadder ladder_;
};

struct Moments {
  Vector mean;
  Matrix cov;
};

/// Sample mean (or coordinate-wise median) and covariance of the rows of
/// `draws`; the covariance gets 1e-8 trace / d on the diagonal if it is not
/// positive definite. Needs at least d + 2 rows.
Moments estimate_moments(const Matrix& draws, bool use_median = false);

/// log of the Lebesgue measure of annulus i (1-based).
double annulus_log_volume(const EllipsoidalPartition& part, std::size_t i);

/// Radius in Mahalanobis units of a uniform draw in the shell between
/// sqrt(c_lo) and sqrt(c_hi), from the uniform variate u.
double annulus_radius(int dim, double c_lo, double c_hi, double u);

Vector sample_uniform_annulus(const EllipsoidalPartition& part, std::size_t i, Rng& rng);

struct RegionIndex {
  std::size_t index = 0;  // 1-based
  bool overflow = false;  // beyond c_M; index is then M
};

RegionIndex mahalanobis_index(const EllipsoidalPartition& part, const Vector& theta);

}  // namespace ditto
