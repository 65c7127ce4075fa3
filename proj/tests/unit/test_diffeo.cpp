#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/LU>

#include "ditto/diffeo.hpp"
#include "ditto/errors.hpp"
#include "ditto/rng.hpp"
#include "oracles.hpp"

using namespace ditto;

namespace {

constexpr double kE = std::numbers::e;
constexpr double kPi = std::numbers::pi;

double std_normal(const Vector& t) {
  return -0.5 * t.squaredNorm() - 0.5 * static_cast<double>(t.size()) * std::log(2 * kPi);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_SUITE("diffeo") {

TEST_CASE("radial profile branch point") {
  for (double b : {0.01, 0.5, 1.0, 7.0}) {
    const double x = 1.0 / b;
    CHECK(f_radial(0.0, b) == 0.0);
    // The two branches evaluated on either side of 1/b.
    const double cubic = kE * (1.0 / 6.0 + 0.5);
    const double expo = std::exp(1.0) - kE / 3.0;
    CHECK(rel(cubic, 2 * kE / 3) <= 1e-12);
    CHECK(rel(expo, 2 * kE / 3) <= 1e-12);
    CHECK(rel(f_radial(x, b), 2 * kE / 3) <= 1e-12);
    CHECK(rel(f_radial(std::nextafter(x, 1e300), b), 2 * kE / 3) <= 1e-12);
    CHECK(rel(f_radial_deriv(x, b), b * kE) <= 1e-12);
    CHECK(rel(f_radial_deriv(std::nextafter(x, 1e300), b), b * kE) <= 1e-12);
    CHECK(f_inverse(0.0, b) == 0.0);
    CHECK(rel(f_inverse(2 * kE / 3, b), x) <= 1e-12);
  }
}

TEST_CASE("radial profile is increasing") {
  for (double b : {0.01, 1.0}) {
    double prev = -1.0;
    for (double lx = -8; lx <= std::log10(50.0 / b); lx += 0.01) {
      const double x = std::pow(10.0, lx);
      REQUIRE(f_radial_deriv(x, b) > 0.0);
      const double fx = f_radial(x, b);
      REQUIRE(fx > prev);
      prev = fx;
    }
  }
}

TEST_CASE("radial inverse round trip") {
  Rng rng(1, 0);
  for (int k = 0; k < 10'000; ++k) {
    const double b = std::pow(10.0, rng.uniform(-3, 1));
    const double x = std::pow(10.0, rng.uniform(-6, 1.5)) / b;
    const double y = f_radial(x, b);
    const double back = f_inverse(y, b);
    REQUIRE(rel(back, x) <= 1e-10);
    REQUIRE(std::abs(f_radial(back, b) - y) <= 1e-12 * (1 + y));
  }
}

TEST_CASE("isotropic map") {
  CHECK(h_apply(Vector::Zero(3), 0.2) == Vector::Zero(3));
  CHECK(h_inverse(Vector::Zero(3), 0.2) == Vector::Zero(3));
  Rng rng(2, 0);
  for (int k = 0; k < 2000; ++k) {
    const int d = 1 + static_cast<int>(rng.index(6));
    const double b = std::pow(10.0, rng.uniform(-2, 0.5));
    Vector t(d);
    for (int j = 0; j < d; ++j) t[j] = rng.normal() * rng.uniform(0.01, 3.0) / b;
    const Vector g = h_apply(t, b);
    REQUIRE(rel(g.norm(), f_radial(t.norm(), b)) <= 1e-12);
    REQUIRE((g.normalized() - t.normalized()).norm() <= 1e-14);
    REQUIRE((h_inverse(g, b) - t).norm() <= 1e-10 * t.norm());
  }
  CHECK_THROWS_AS(h_apply(Vector::Ones(2), 0.0), InvalidArgument);
}

TEST_CASE("log determinant against a finite-difference Jacobian") {
  CHECK(rel(log_det_grad_h(Vector::Zero(4), 0.3), 4 * std::log(0.3 * kE / 2)) <= 1e-14);
  CHECK(log_det_grad_h(Vector::Constant(1, 2.5), 0.7) == std::log(f_radial_deriv(2.5, 0.7)));
  Rng rng(3, 0);
  for (int d : {2, 5}) {
    for (int k = 0; k < 100; ++k) {
      const double b = std::pow(10.0, rng.uniform(-1, 0.3));
      Vector t(d);
      for (int j = 0; j < d; ++j) t[j] = rng.normal() * rng.uniform(0.2, 2.0) / b;
      Matrix jac(d, d);
      for (int j = 0; j < d; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(t[j]));
        Vector tp = t, tm = t;
        tp[j] += h;
        tm[j] -= h;
        jac.col(j) = (h_apply(tp, b) - h_apply(tm, b)) / (2 * h);
      }
      const double fd = std::log(std::abs(jac.determinant()));
      REQUIRE(std::abs(fd - log_det_grad_h(t, b)) <= 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("flattening preserves mass in one dimension") {
  for (double b : {0.01, 0.3, 1.0}) {
    const LogDensity target = std_normal;
    auto log_g = [&](double g) { return flattened_log_density(target, Vector::Constant(1, g), b); };
    // Split at the images of a few standard deviations; the far tail in
    // gamma-space is long when b is large.
    double mass = 0.0;
    double lo = 0.0;
    for (double r : {0.5, 1.0, 2.0, 4.0, 7.0, 12.0}) {
      const double hi = f_radial(r, b);
      mass += 2.0 * oracle::integrate([&](double g) { return std::exp(log_g(g)); }, lo, hi);
      lo = hi;
    }
    CHECK(std::abs(mass - 1.0) <= 1e-4);
  }
}

TEST_CASE("flattening preserves mass in two dimensions") {
  // Shifted, correlated Gaussian: nested quadrature over a square in gamma-space.
  const double b = 0.5;
  const Vector mu{{0.4, -0.3}};
  Matrix prec(2, 2);
  prec << 2.0, 0.6, 0.6, 1.0;
  const double log_norm = 0.5 * std::log(prec.determinant()) - std::log(2 * kPi);
  const LogDensity target = [&](const Vector& t) {
    const Vector z = t - mu;
    return log_norm - 0.5 * z.dot(prec * z);
  };
  const double edge = f_radial(9.0, b);
  const double mass = oracle::integrate(
      [&](double g0) {
        return oracle::integrate(
            [&](double g1) { return std::exp(flattened_log_density(target, Vector{{g0, g1}}, b)); }, -edge,
            edge);
      },
      -edge, edge);
  CHECK(std::abs(mass - 1.0) <= 1e-4);
}

TEST_CASE("pointwise density ratios under the flattening map") {
  // With the Jacobian evaluated at the preimage, log-det grows with the
  // radius, so the ratio to the mode can only shrink at corresponding points.
  const LogDensity target = std_normal;
  for (double b : {0.01, 1.0}) {
    const double gamma_ratio = flattened_log_density(target, h_apply(Vector::Constant(1, 3.0), b), b) -
                               flattened_log_density(target, Vector::Zero(1), b);
    const double theta_ratio = target(Vector::Constant(1, 3.0)) - target(Vector::Zero(1));
    CHECK(gamma_ratio <= theta_ratio);
    CHECK(gamma_ratio == doctest::Approx(theta_ratio - log_det_grad_h(Vector::Constant(1, 3.0), b) +
                                         log_det_grad_h(Vector::Zero(1), b)));
  }
}

TEST_CASE("flattening thickens the tails") {
  // Kurtosis of gamma = h(theta) for theta ~ N(0, 1), computed in theta-space.
  auto moment = [](int k, double b) {
    return 2.0 * oracle::integrate(
                     [&](double x) { return std::pow(f_radial(x, b), k) * std::exp(-0.5 * x * x) / std::sqrt(2 * kPi); },
                     0.0, 40.0);
  };
  for (double b : {0.3, 1.0}) {
    const double m2 = moment(2, b), m4 = moment(4, b);
    CHECK(m4 / (m2 * m2) > 3.0);
  }
}

TEST_CASE("small-b limit is a rescaling") {
  const double b = 1e-6;
  const double c = b * kE / 2;
  const LogDensity target = std_normal;
  for (int d : {1, 3}) {
    Vector t = Vector::Zero(d);
    t[0] = 1.0;
    const Vector g = h_apply(t, b);
    const double rescaled = target(g / c) - d * std::log(c);
    CHECK(std::abs(flattened_log_density(target, g, b) - rescaled) <= 1e-3);
  }
}

}  // TEST_SUITE
