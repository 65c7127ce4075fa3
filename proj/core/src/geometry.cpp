#include "ditto/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>

#include "ditto/errors.hpp"
#include "ditto/numeric.hpp"

namespace ditto {

void RadiusLadder::validate() const {
  if (!(sqrt_c1 > 0)) throw InvalidArgument("radius ladder: sqrt_c1 must be positive");
  if (!(step > 0)) throw InvalidArgument("radius ladder: step must be positive");
  if (count < 1) throw InvalidArgument("radius ladder: need at least one annulus");
}

EllipsoidalPartition::EllipsoidalPartition(Vector center, const Matrix& scale, RadiusLadder ladder) {
  ladder.validate();
  if (scale.rows() != center.size() || scale.cols() != center.size()) {
    throw InvalidArgument("partition: scale matrix does not match center");
  }
  Eigen::LLT<Matrix> llt(scale);
  if (llt.info() != Eigen::Success) throw InvalidArgument("partition: scale matrix is not positive definite");
  *this = from_cholesky(std::move(center), llt.matrixL(), ladder);
}

EllipsoidalPartition EllipsoidalPartition::from_cholesky(Vector center, Matrix chol_lower, RadiusLadder ladder) {
  ladder.validate();
  if (center.size() < 1) throw InvalidArgument("partition: empty center");
  if (chol_lower.rows() != center.size() || chol_lower.cols() != center.size()) {
    throw InvalidArgument("partition: Cholesky factor does not match center");
  }
  EllipsoidalPartition p;
  p.center_ = std::move(center);
  p.chol_ = chol_lower.triangularView<Eigen::Lower>();
  p.ladder_ = ladder;
  double log_det = 0.0;
  for (Eigen::Index j = 0; j < p.chol_.rows(); ++j) {
    if (!(p.chol_(j, j) > 0)) throw InvalidArgument("partition: Cholesky diagonal must be positive");
    log_det += 2.0 * std::log(p.chol_(j, j));
  }
  p.log_det_ = log_det;
  return p;
}

EllipsoidalPartition EllipsoidalPartition::with_count(std::size_t count) const {
  EllipsoidalPartition p = *this;
  p.ladder_.count = count;
  p.ladder_.validate();
  return p;
}

double EllipsoidalPartition::mahalanobis_sq(const Vector& theta) const {
  const Vector z = chol_.triangularView<Eigen::Lower>().solve(theta - center_);
  return z.squaredNorm();
}

Moments estimate_moments(const Matrix& draws, bool use_median) {
  const Eigen::Index n = draws.rows();
  const Eigen::Index d = draws.cols();
  if (d < 1 || n < d + 2) {
    throw InsufficientChain("estimate_moments: need at least d + 2 = " + std::to_string(d + 2) + " draws, got " +
                            std::to_string(n));
  }
  Moments m;
  m.mean = draws.colwise().mean().transpose();
  const Matrix centered = draws.rowwise() - m.mean.transpose();
  m.cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  if (use_median) {
    for (Eigen::Index j = 0; j < d; ++j) {
      std::vector<double> col(draws.col(j).begin(), draws.col(j).end());
      const auto mid = col.begin() + static_cast<std::ptrdiff_t>(col.size() / 2);
      std::nth_element(col.begin(), mid, col.end());
      double med = *mid;
      if (col.size() % 2 == 0) med = 0.5 * (med + *std::max_element(col.begin(), mid));
      m.mean[j] = med;
    }
  }
  Eigen::LLT<Matrix> llt(m.cov);
  if (llt.info() != Eigen::Success || (llt.matrixLLT().diagonal().array() <= 0).any()) {
    double jitter = 1e-8 * m.cov.trace() / static_cast<double>(d);
    if (!(jitter > 0)) jitter = 1e-8;  // constant chain: fall back to a multiple of I
    m.cov.diagonal().array() += jitter;
  }
  return m;
}

double annulus_log_volume(const EllipsoidalPartition& part, std::size_t i) {
  if (i < 1 || i > part.size()) throw InvalidArgument("annulus_log_volume: index out of range");
  const double d = part.dim();
  const double log_unit_ball = 0.5 * d * std::log(std::numbers::pi) - std::lgamma(0.5 * d + 1.0);
  const double outer = d * std::log(part.ladder().sqrt_c(i));
  const double inner = i == 1 ? kNegInf : d * std::log(part.ladder().sqrt_c(i - 1));
  return log_unit_ball + 0.5 * part.log_det_scale() + log_sub_exp(outer, inner);
}

double annulus_radius(int dim, double c_lo, double c_hi, double u) {
  const double d = dim;
  const double a = c_lo > 0 ? 0.5 * d * std::log(c_lo) : kNegInf;
  const double b = 0.5 * d * std::log(c_hi);
  // rho^d = c_lo^{d/2} + u (c_hi^{d/2} - c_lo^{d/2}), in logs
  const double log_rho_d = u > 0 ? log_add_exp(a, std::log(u) + log_sub_exp(b, a)) : a;
  const double rho = std::exp(log_rho_d / d);
  // Keep the draw inside (sqrt(c_lo), sqrt(c_hi)] despite rounding.
  return std::clamp(rho, std::sqrt(c_lo), std::sqrt(c_hi));
}

Vector sample_uniform_annulus(const EllipsoidalPartition& part, std::size_t i, Rng& rng) {
  if (i < 1 || i > part.size()) throw InvalidArgument("sample_uniform_annulus: index out of range");
  const int d = part.dim();
  Vector u(d);
  double norm = 0.0;
  do {
    for (int j = 0; j < d; ++j) u[j] = rng.normal();
    norm = u.norm();
  } while (norm == 0.0);
  const double c_lo = part.ladder().c(i - 1);
  const double c_hi = part.ladder().c(i);
  double rho = annulus_radius(d, c_lo, c_hi, rng.uniform_pos());
  if (i > 1 && rho <= std::sqrt(c_lo)) rho = std::nextafter(std::sqrt(c_lo), std::sqrt(c_hi));
  return part.center() + part.chol().triangularView<Eigen::Lower>() * (u * (rho / norm));
}

RegionIndex mahalanobis_index(const EllipsoidalPartition& part, const Vector& theta) {
  const double q = part.mahalanobis_sq(theta);
  const auto& ladder = part.ladder();
  const std::size_t m = part.size();
  if (q > ladder.c(m)) return {m, true};
  // Smallest i with q <= c_i; invert the ladder then correct for rounding.
  const double r = std::sqrt(q);
  double guess = r <= ladder.sqrt_c1 ? 1.0 : std::ceil((r - ladder.sqrt_c1) / ladder.step) + 1.0;
  std::size_t i = static_cast<std::size_t>(std::clamp(guess, 1.0, static_cast<double>(m)));
  while (i > 1 && q <= ladder.c(i - 1)) --i;
  while (i < m && q > ladder.c(i)) ++i;
  return {i, false};
}

}  // namespace ditto
