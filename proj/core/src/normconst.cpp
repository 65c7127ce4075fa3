#include "ditto/normconst.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "ditto/errors.hpp"
#include "ditto/numeric.hpp"

namespace ditto {
namespace {

Matrix design_matrix(const Matrix& points) {
  Matrix h(points.rows(), points.cols() + 1);
  h.col(0).setOnes();
  h.rightCols(points.cols()) = points;
  return h;
}

Matrix correlation_matrix(const Matrix& points, const Vector& d_diag, double nugget) {
  const Eigen::Index k = points.rows();
  Matrix r(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    r(i, i) = 1.0 + nugget;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double q = ((points.row(i) - points.row(j)).array().square() * d_diag.transpose().array()).sum();
      r(i, j) = r(j, i) = std::exp(-q);
    }
  }
  return r;
}

struct GlsFit {
  Eigen::LLT<Matrix> llt;
  Vector beta;
  Vector resid;        // Z - H beta
  Vector white_resid;  // L^{-1} (Z - H beta)
  bool ok = false;
};

GlsFit gls(const Matrix& points, const Vector& values, const Vector& d_diag, double nugget) {
  GlsFit fit;
  fit.llt.compute(correlation_matrix(points, d_diag, nugget));
  if (fit.llt.info() != Eigen::Success) return fit;
  const auto lower = fit.llt.matrixL();
  const Matrix h = design_matrix(points);
  const Matrix wh = lower.solve(h);
  const Vector wz = lower.solve(values);
  // Whitened least squares == GLS; column pivoting tolerates rank deficiency.
  fit.beta = wh.colPivHouseholderQr().solve(wz);
  fit.resid = values - h * fit.beta;
  fit.white_resid = lower.solve(fit.resid);
  fit.ok = fit.beta.allFinite() && fit.white_resid.allFinite();
  return fit;
}

Matrix to_matrix(const std::vector<Vector>& rows, int dim) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t k = 0; k < rows.size(); ++k) m.row(static_cast<Eigen::Index>(k)) = rows[k].transpose();
  return m;
}

/// Design-point error of the predictor is nugget * resid_solve; the fit must
/// keep it within 10 * nugget * K.
bool interpolates(const Vector& resid_solve, int count) {
  return resid_solve.cwiseAbs().maxCoeff() <= 10.0 * count;
}

void check_design(const DesignSet& design, const Vector& d_diag) {
  if (design.points.empty()) throw InsufficientDesign("gp_fit: empty design");
  if (design.values.size() != design.points.size()) throw InvalidArgument("gp_fit: values/points size mismatch");
  const int d = design.dim();
  for (const auto& p : design.points) {
    if (p.size() != d) throw InvalidArgument("gp_fit: design points have inconsistent dimension");
  }
  for (double v : design.values) {
    if (!std::isfinite(v)) throw InvalidArgument("gp_fit: non-finite design value");
  }
  if (d_diag.size() != d) throw InvalidArgument("gp_fit: D diagonal has the wrong length");
  for (Eigen::Index j = 0; j < d_diag.size(); ++j) {
    if (!(d_diag[j] > 0)) throw InvalidArgument("gp_fit: D diagonal must be positive");
  }
}

}  // namespace

std::vector<Vector> draw_design_points(int count, int dim, double ball_radius, Rng& rng) {
  if (count < 1 || dim < 1) throw InvalidArgument("draw_design_points: count and dim must be positive");
  if (!(ball_radius > 0)) throw InvalidArgument("draw_design_points: ball radius must be positive");
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    Vector u(dim);
    double norm = 0.0;
    do {
      for (int j = 0; j < dim; ++j) u[j] = rng.normal();
      norm = u.norm();
    } while (norm == 0.0);
    const double radius = ball_radius * std::pow(rng.uniform(), 1.0 / dim);
    out.push_back(u * (radius / norm));
  }
  return out;
}

LogEstimate is_log_normconst(const Model& model, const Dataset& data, const Vector& natural, std::int64_t draws,
                             Rng& rng) {
  if (draws < 1) throw InvalidArgument("is_log_normconst: need at least one draw");
  const auto envelope = model.make_envelope(data, natural);
  LogMeanAccumulator acc;
  for (std::int64_t k = 0; k < draws; ++k) acc.add(envelope->draw_log_ratio(rng));
  const double value = acc.log_mean();
  if (!std::isfinite(value)) throw EstimatorDegenerate("is_log_normconst: every importance ratio vanished");
  const double se = acc.log_mean_std_error();
  return {value, std::isfinite(se) ? se : 0.0};
}

AnnulusSchedule1D AnnulusSchedule1D::ladder(double first, double step, int bins, std::int64_t draws_per_bin) {
  AnnulusSchedule1D s;
  for (int i = 0; i < bins; ++i) s.radii.push_back(first + step * i);
  s.per_bin_draws.assign(static_cast<std::size_t>(bins), draws_per_bin);
  s.validate();
  return s;
}

void AnnulusSchedule1D::validate() const {
  if (radii.empty()) throw InvalidArgument("annulus schedule: no bins");
  if (radii.size() != per_bin_draws.size()) throw InvalidArgument("annulus schedule: radii/draws size mismatch");
  double prev = 0.0;
  for (double r : radii) {
    if (!(r > prev)) throw InvalidArgument("annulus schedule: radii must be strictly increasing from 0");
    prev = r;
  }
  for (auto n : per_bin_draws) {
    if (n < 1) throw InvalidArgument("annulus schedule: each bin needs at least one draw");
  }
}

LogEstimate annulus_1d_log_integral(const std::function<double(double)>& log_f, double psi, double tau,
                                    const AnnulusSchedule1D& schedule, Rng& rng) {
  if (!(tau > 0)) throw InvalidArgument("annulus_1d: tau must be positive");
  schedule.validate();
  const double inv_sqrt_tau = 1.0 / std::sqrt(tau);
  std::vector<double> log_bins;
  log_bins.reserve(schedule.radii.size());
  // Variance of each bin estimate, in units of exp(2 * reference) to stay finite.
  std::vector<double> log_bin_var;
  double lo = 0.0;
  for (std::size_t i = 0; i < schedule.radii.size(); ++i) {
    const double hi = schedule.radii[i];
    const double log_len = std::log(2.0 * (hi - lo) * inv_sqrt_tau);
    LogMeanAccumulator acc;
    for (std::int64_t k = 0; k < schedule.per_bin_draws[i]; ++k) {
      const double r = rng.uniform(lo, hi);
      acc.add(log_f(psi + rng.sign() * r * inv_sqrt_tau));
    }
    const double lm = acc.log_mean();
    log_bins.push_back(log_len + lm);
    const double rel = acc.log_mean_std_error();
    log_bin_var.push_back(std::isfinite(lm) && std::isfinite(rel) && rel > 0
                              ? 2.0 * (log_len + lm + std::log(rel))
                              : kNegInf);
    lo = hi;
  }
  const double total = log_sum_exp(log_bins);
  const double log_var = log_sum_exp(log_bin_var);
  const double se = std::isfinite(total) && std::isfinite(log_var) ? std::exp(0.5 * log_var - total) : 0.0;
  return {total, se};
}

LogEstimate annulus_1d_log_normconst(double psi, double tau, const AnnulusSchedule1D& schedule, Rng& rng) {
  return annulus_1d_log_integral([psi, tau](double x) { return -0.5 * tau * (x - psi) * (x - psi); }, psi, tau,
                                 schedule, rng);
}

double gp_correlation(const Vector& a, const Vector& b, const Vector& d_diag) {
  return std::exp(-((a - b).array().square() * d_diag.array()).sum());
}

double GpSurrogate::predict(const Vector& theta) const {
  const Eigen::Index d = points.cols();
  double mean = beta[0];
  for (Eigen::Index j = 0; j < d; ++j) mean += beta[j + 1] * theta[j];
  // Column sweeps keep the kernel evaluation vectorized; this sits on the
  // innermost loop of every sampler.
  Eigen::ArrayXd q = d_diag[0] * (points.col(0).array() - theta[0]).square();
  for (Eigen::Index j = 1; j < d; ++j) q += d_diag[j] * (points.col(j).array() - theta[j]).square();
  return mean + (-q).exp().matrix().dot(resid_solve);
}

GpSurrogate gp_fit(const DesignSet& design, const Vector& d_diag, double nugget) {
  check_design(design, d_diag);
  if (!(nugget > 0)) throw InvalidArgument("gp_fit: nugget must be positive");
  const int d = design.dim();
  const int count = design.size();
  const Matrix points = to_matrix(design.points, d);
  const Vector values = Eigen::Map<const Vector>(design.values.data(), count);

  // Kernel conditioning comes first: a singular kernel is reported as such
  // even when the design is also too small. Coincident points make R exactly
  // singular; the nugget would only hide that.
  for (int a = 0; a < count; ++a) {
    for (int b = a + 1; b < count; ++b) {
      if (points.row(a) == points.row(b)) {
        throw IllConditionedKernel("gp_fit: design points " + std::to_string(a) + " and " + std::to_string(b) +
                                   " coincide; the correlation matrix is singular");
      }
    }
  }
  const double top = std::max(nugget, 1e-6) * (1.0 + 1e-9);
  for (double level = nugget; level <= top; level *= 10.0) {
    GlsFit fit = gls(points, values, d_diag, level);
    if (!fit.ok) continue;
    Vector resid_solve = fit.llt.matrixU().solve(fit.white_resid);
    if (!interpolates(resid_solve, count)) continue;
    if (count <= d + 1) {
      throw InsufficientDesign("gp_fit: need more than d + 1 = " + std::to_string(d + 1) + " design points");
    }
    GpSurrogate s;
    s.points = points;
    s.values = values;
    s.d_diag = d_diag;
    s.nugget = level;
    s.ball_radius = design.ball_radius;
    s.beta = std::move(fit.beta);
    s.resid_solve = std::move(resid_solve);
    s.chol = fit.llt.matrixL();
    s.sigma2 = fit.white_resid.squaredNorm() / static_cast<double>(count - d - 1);
    return s;
  }
  throw IllConditionedKernel("gp_fit: correlation matrix is singular at every nugget level up to " +
                             std::to_string(top));
}

double calibrate_nugget(const DesignSet& design, const Vector& d_diag, double fallback) {
  check_design(design, d_diag);
  if (design.std_errors.size() != design.values.size()) return fallback;
  double noise = 0.0;
  for (double se : design.std_errors) {
    if (!std::isfinite(se)) return fallback;
    noise += se * se;
  }
  noise /= static_cast<double>(design.std_errors.size());
  if (!(noise > 0)) return fallback;

  const int d = design.dim();
  const int count = design.size();
  const Matrix points = to_matrix(design.points, d);
  const Vector values = Eigen::Map<const Vector>(design.values.data(), count);

  // Covariance (noise / nu) (R + nu I): the process variance is tied to the
  // known noise through nu. Minimize -2 log-likelihood over a log grid,
  // skipping levels at which the fit would break the interpolation bound
  // (the reported errors understate heavy-tailed Monte Carlo noise).
  double best_nu = fallback;
  double best = std::numeric_limits<double>::infinity();
  for (int step = 0; step <= 40; ++step) {
    const double nu = std::pow(10.0, -10.0 + 0.25 * step);
    GlsFit fit = gls(points, values, d_diag, nu);
    if (!fit.ok || !interpolates(fit.llt.matrixU().solve(fit.white_resid), count)) continue;
    const double log_det = 2.0 * fit.llt.matrixLLT().diagonal().array().log().sum();
    const double objective =
        count * std::log(noise / nu) + log_det + (nu / noise) * fit.white_resid.squaredNorm();
    if (objective < best) {
      best = objective;
      best_nu = nu;
    }
  }
  return best_nu;
}

}  // namespace ditto
