#include "ditto/diffeo.hpp"

#include <cmath>
#include <numbers>

#include "ditto/errors.hpp"

namespace ditto {
namespace {

constexpr double kE = std::numbers::e;

void check_b(double b) {
  if (!(b > 0)) throw InvalidArgument("diffeomorphism: b must be positive");
}

/// f(r) / r, continuous at r = 0.
double f_over_r(double r, double b) {
  if (r * b <= 1.0) return b * kE / 2.0 + r * r * b * b * b * kE / 6.0;
  return f_radial(r, b) / r;
}

}  // namespace

double f_radial(double x, double b) {
  if (x * b > 1.0) return std::exp(b * x) - kE / 3.0;
  const double bx = b * x;
  return kE * (bx * bx * bx / 6.0 + bx / 2.0);
}

double f_radial_deriv(double x, double b) {
  if (x * b > 1.0) return b * std::exp(b * x);
  const double bx = b * x;
  return b * kE * (bx * bx / 2.0 + 0.5);
}

double f_inverse(double y, double b) {
  check_b(b);
  if (y <= 0.0) return 0.0;
  if (y > 2.0 * kE / 3.0) return std::log(y + kE / 3.0) / b;
  // u = bx solves u^3 + 3u = 6y/e; Cardano in hyperbolic form.
  const double q = 6.0 * y / kE;
  double u = 2.0 * std::sinh(std::asinh(q / 2.0) / 3.0);
  // Safeguarded Newton polish on g(u) = u^3/6 + u/2 - y/e over [0, 1].
  double lo = 0.0, hi = 1.0;
  const double target = y / kE;
  for (int it = 0; it < 100; ++it) {
    const double g = u * u * u / 6.0 + u / 2.0 - target;
    if (std::abs(g) <= 1e-13 * (1.0 + target)) break;
    if (g > 0) hi = u; else lo = u;
    double next = u - g / (u * u / 2.0 + 0.5);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == u) break;
    u = next;
  }
  return u / b;
}

Vector h_apply(const Vector& theta, double b) {
  check_b(b);
  const double r = theta.norm();
  if (r == 0.0) return Vector::Zero(theta.size());
  return theta * f_over_r(r, b);
}

Vector h_inverse(const Vector& gamma, double b) {
  check_b(b);
  const double s = gamma.norm();
  if (s == 0.0) return Vector::Zero(gamma.size());
  return gamma * (f_inverse(s, b) / s);
}

double log_det_grad_h(const Vector& theta, double b) {
  check_b(b);
  const double d = static_cast<double>(theta.size());
  const double r = theta.norm();
  return std::log(f_radial_deriv(r, b)) + (d - 1.0) * std::log(f_over_r(r, b));
}

double flattened_log_density(const LogDensity& logpi, const Vector& gamma, double b) {
  const Vector theta = h_inverse(gamma, b);
  return logpi(theta) - log_det_grad_h(theta, b);
}

LogDensity flatten(LogDensity logpi, double b) {
  check_b(b);
  return [logpi = std::move(logpi), b](const Vector& gamma) { return flattened_log_density(logpi, gamma, b); };
}

}  // namespace ditto
