#pragma once

#include "ditto/models.hpp"
#include "ditto/tmcmc.hpp"

namespace ditto {

/// Radial profile: x^3 b^3 e / 6 + x b e / 2 for x <= 1/b, e^{bx} - e/3 beyond.
double f_radial(double x, double b);
double f_radial_deriv(double x, double b);
/// Inverse of f_radial on [0, inf).
double f_inverse(double y, double b);

/// Isotropic map h(theta) = f(|theta|) theta / |theta|, h(0) = 0.
Vector h_apply(const Vector& theta, double b);
Vector h_inverse(const Vector& gamma, double b);

/// log |det grad h(theta)| = log f'(r) + (d - 1) log(f(r) / r), r = |theta|.
double log_det_grad_h(const Vector& theta, double b);

/// log density of gamma = h(theta) when theta has log density logpi.
double flattened_log_density(const LogDensity& logpi, const Vector& gamma, double b);

/// Wraps logpi into the gamma-space log density.
LogDensity flatten(LogDensity logpi, double b);

}  // namespace ditto
